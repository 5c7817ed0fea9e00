#pragma once

#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>

#include "cid.hpp"

namespace medvault {

// Files are split into chunks of exactly this many bytes (last chunk short).
constexpr std::size_t kChunkSize = 262144;
static_assert(kChunkSize == 256 * 1024);

struct CasLink {
    Cid cid;
    // Canonical serialized length of the linked object, recorded so DAG
    // consumers can size transfers without fetching.
    std::uint64_t total_size = 0;
};

// One node of the content DAG. Three shapes occur in practice:
//   leaf:   data (possibly empty), no links
//   root:   empty data, one link per chunk
//   commit: tagged data payload, link to a root (+ optional parent commit)
struct CasObject {
    Bytes data;
    std::vector<CasLink> links;

    // Layout: 0x01 | u32be(data len) | data | u32be(link count)
    //         | per link: 34-byte cid | u64be(total_size)
    Bytes canonical_bytes() const {
        if (data.size() > kChunkSize)
            throw Error(ErrorCode::OversizeData, "object data exceeds chunk size");
        ByteWriter w;
        w.u8(0x01);
        w.sized(as_span(data));
        w.u32be(static_cast<std::uint32_t>(links.size()));
        for (const CasLink& l : links) {
            w.raw(l.cid.bytes());
            w.u64be(l.total_size);
        }
        return w.take();
    }

    static CasObject parse(ByteSpan raw) {
        ByteReader r(raw);
        if (r.u8() != 0x01) throw Error(ErrorCode::Malformed, "unknown object version");
        CasObject obj;
        obj.data = r.sized(kChunkSize);
        std::uint32_t count = r.u32be();
        obj.links.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            CasLink l;
            l.cid = Cid::from_bytes(r.raw(Cid::kSize));
            l.total_size = r.u64be();
            obj.links.push_back(std::move(l));
        }
        r.expect_end();
        return obj;
    }
};

inline Cid cid_of(const CasObject& obj) {
    return Cid::from_digest(sha256(obj.canonical_bytes()));
}

// Keyed blob storage underneath the store. Implementations hold canonical
// object bytes verbatim; all verification happens a layer up.
class ObjectBackend {
  public:
    virtual ~ObjectBackend() = default;

    virtual bool contains(const Cid& cid) const = 0;
    virtual std::optional<Bytes> fetch(const Cid& cid) const = 0;
    virtual void store(const Cid& cid, ByteSpan bytes) = 0;
    virtual void erase(const Cid& cid) = 0;
    virtual std::vector<Cid> list() const = 0;
    virtual std::uint64_t stored_bytes() const = 0;
    virtual std::uint64_t object_count() const = 0;
};

class MemoryBackend : public ObjectBackend {
  public:
    explicit MemoryBackend(std::optional<std::uint64_t> capacity_bytes = {})
        : capacity_(capacity_bytes) {}

    bool contains(const Cid& cid) const override { return objects_.count(cid) > 0; }

    std::optional<Bytes> fetch(const Cid& cid) const override {
        auto it = objects_.find(cid);
        if (it == objects_.end()) return std::nullopt;
        return it->second;
    }

    void store(const Cid& cid, ByteSpan bytes) override {
        if (objects_.count(cid) > 0) return;
        if (capacity_ && bytes_ + bytes.size() > *capacity_)
            throw Error(ErrorCode::StorageFull, "memory backend capacity exceeded");
        objects_.emplace(cid, Bytes(bytes.begin(), bytes.end()));
        bytes_ += bytes.size();
    }

    void erase(const Cid& cid) override {
        auto it = objects_.find(cid);
        if (it == objects_.end()) return;
        bytes_ -= it->second.size();
        objects_.erase(it);
    }

    std::vector<Cid> list() const override {
        std::vector<Cid> out;
        out.reserve(objects_.size());
        for (const auto& [cid, _] : objects_) out.push_back(cid);
        return out;
    }

    std::uint64_t stored_bytes() const override { return bytes_; }

    std::uint64_t object_count() const override { return objects_.size(); }

  private:
    std::map<Cid, Bytes> objects_;
    std::uint64_t bytes_ = 0;
    std::optional<std::uint64_t> capacity_;
};

// One file per object under <root>/objects, named by the cid display form.
class DiskBackend : public ObjectBackend {
  public:
    explicit DiskBackend(std::filesystem::path root) : root_(std::move(root)) {
        std::error_code ec;
        std::filesystem::create_directories(objects_dir(), ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create object directory: " + ec.message());
        for (const auto& entry : std::filesystem::directory_iterator(objects_dir())) {
            if (!entry.is_regular_file()) continue;
            bytes_ += entry.file_size();
            ++count_;
        }
    }

    std::filesystem::path object_path(const Cid& cid) const {
        return objects_dir() / cid.str();
    }

    bool contains(const Cid& cid) const override {
        return std::filesystem::exists(object_path(cid));
    }

    std::optional<Bytes> fetch(const Cid& cid) const override {
        std::ifstream in(object_path(cid), std::ios::binary);
        if (!in) return std::nullopt;
        Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + cid.str());
        return out;
    }

    void store(const Cid& cid, ByteSpan bytes) override {
        if (contains(cid)) return;
        std::filesystem::path tmp = object_path(cid);
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
            if (!out) throw Error(ErrorCode::IoError, "write failed for " + cid.str());
        }
        std::filesystem::rename(tmp, object_path(cid));
        bytes_ += bytes.size();
        ++count_;
    }

    void erase(const Cid& cid) override {
        std::error_code ec;
        auto path = object_path(cid);
        if (!std::filesystem::exists(path, ec)) return;
        std::uint64_t size = std::filesystem::file_size(path, ec);
        std::filesystem::remove(path, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot remove " + cid.str());
        bytes_ -= size;
        --count_;
    }

    std::vector<Cid> list() const override {
        std::vector<Cid> out;
        for (const auto& entry : std::filesystem::directory_iterator(objects_dir())) {
            if (!entry.is_regular_file()) continue;
            try {
                out.push_back(Cid::parse(entry.path().filename().string()));
            } catch (const Error&) {
                // stray file, not one of ours
            }
        }
        return out;
    }

    std::uint64_t stored_bytes() const override { return bytes_; }

    std::uint64_t object_count() const override { return count_; }

  private:
    std::filesystem::path objects_dir() const { return root_ / "objects"; }

    std::filesystem::path root_;
    std::uint64_t bytes_ = 0;
    std::uint64_t count_ = 0;
};

struct StoreStats {
    std::uint64_t object_count = 0;
    std::uint64_t stored_bytes = 0;
    std::uint64_t pinned_objects = 0;
    std::uint64_t submitted_bytes = 0;    // cumulative put_file input
    std::uint64_t unique_data_bytes = 0;  // leaf data actually written
    std::uint64_t dedup_saved_bytes = 0;  // submitted minus unique
};

struct CommitView {
    Cid commit_cid;
    Cid root;
    std::optional<Cid> parent;
    std::uint64_t timestamp = 0;
    std::string metadata;
};

// Content-addressed store: chunking, commits, pinning, TTL-based collection.
// Reads verify bytes against the cid, so silent corruption surfaces as
// CorruptObject instead of wrong data.
class Store {
  public:
    using NowFn = std::function<std::uint64_t()>;

    explicit Store(std::unique_ptr<ObjectBackend> backend,
                   NowFn now = [] { return std::uint64_t{0}; },
                   std::optional<std::filesystem::path> meta_file = {})
        : backend_(std::move(backend)), now_(std::move(now)), meta_file_(std::move(meta_file)) {
        load_meta();
    }

    Cid put_object(const CasObject& obj) {
        std::unique_lock lock(mu_);
        return put_object_locked(obj);
    }

    CasObject get_object(const Cid& cid) {
        std::unique_lock lock(mu_);
        CasObject obj = fetch_verified(cid);
        touch(cid);
        flush_meta();
        return obj;
    }

    bool contains(const Cid& cid) const {
        std::shared_lock lock(mu_);
        return backend_->contains(cid);
    }

    Cid put_file(ByteSpan content) {
        std::unique_lock lock(mu_);
        submitted_bytes_ += content.size();

        std::vector<CasLink> links;
        std::size_t chunks = content.size() / kChunkSize + (content.size() % kChunkSize ? 1 : 0);
        if (content.size() <= kChunkSize) {
            CasObject leaf{Bytes(content.begin(), content.end()), {}};
            Cid cid = put_leaf_locked(leaf);
            flush_meta();
            return cid;
        }
        links.reserve(chunks);
        for (std::size_t i = 0; i < chunks; ++i) {
            std::size_t off = i * kChunkSize;
            std::size_t len = std::min(kChunkSize, content.size() - off);
            CasObject leaf{Bytes(content.begin() + off, content.begin() + off + len), {}};
            std::uint64_t serialized = 1 + 4 + leaf.data.size() + 4;
            links.push_back({put_leaf_locked(leaf), serialized});
        }
        CasObject root{{}, std::move(links)};
        Cid cid = put_object_locked(root);
        flush_meta();
        return cid;
    }

    Bytes get_file(const Cid& root) {
        std::unique_lock lock(mu_);
        Bytes out;
        collect_file(root, out, 0);
        flush_meta();
        return out;
    }

    Cid commit(const Cid& root, const std::optional<Cid>& parent, std::string_view metadata) {
        std::unique_lock lock(mu_);
        if (!backend_->contains(root))
            throw Error(ErrorCode::NotFound, "commit root not in store: " + root.str());
        if (parent) read_commit_locked(*parent);  // must exist and be a commit
        CasObject obj;
        ByteWriter w;
        w.u8(kCommitTag);
        w.u64be(now_());
        w.sized(str_span(metadata));
        obj.data = w.take();
        obj.links.push_back({root, object_size(root)});
        if (parent) obj.links.push_back({*parent, object_size(*parent)});
        Cid cid = put_object_locked(obj);
        flush_meta();
        return cid;
    }

    CommitView read_commit(const Cid& cid) {
        std::unique_lock lock(mu_);
        CommitView v = read_commit_locked(cid);
        touch(cid);
        flush_meta();
        return v;
    }

    // Newest first, following parent links back to the initial commit.
    std::vector<CommitView> history(const Cid& head) {
        std::unique_lock lock(mu_);
        std::vector<CommitView> out;
        std::set<Cid> seen;
        std::optional<Cid> cursor = head;
        while (cursor) {
            if (!seen.insert(*cursor).second)
                throw Error(ErrorCode::CorruptObject, "commit parent cycle at " + cursor->str());
            CommitView v = read_commit_locked(*cursor);
            cursor = v.parent;
            out.push_back(std::move(v));
        }
        flush_meta();
        return out;
    }

    // Pinning protects the whole closure under the root. The closure must be
    // fully present, otherwise the guarantee would be hollow.
    void pin(const Cid& root) {
        std::unique_lock lock(mu_);
        closure_of(std::vector<Cid>{root});  // raises NotFound on gaps
        pins_.insert(root);
        flush_meta();
    }

    void unpin(const Cid& root) {
        std::unique_lock lock(mu_);
        if (!backend_->contains(root))
            throw Error(ErrorCode::NotFound, "unpin target not in store: " + root.str());
        pins_.erase(root);
        flush_meta();
    }

    bool is_pinned(const Cid& root) const {
        std::shared_lock lock(mu_);
        return pins_.count(root) > 0;
    }

    // Mark phase keeps the pin closures plus everything reachable from any
    // object that is itself still fresh, so no surviving object ever links to
    // an evicted one. Sweep removes the rest once idle past the ttl.
    std::vector<Cid> gc(std::uint64_t ttl_seconds) {
        std::unique_lock lock(mu_);
        std::uint64_t now = now_();
        std::vector<Cid> all = backend_->list();

        std::vector<Cid> fresh_roots(pins_.begin(), pins_.end());
        for (const Cid& cid : all)
            if (!expired(cid, now, ttl_seconds)) fresh_roots.push_back(cid);
        std::set<Cid> keep = closure_of(fresh_roots);

        std::vector<Cid> evicted;
        for (const Cid& cid : all) {
            if (keep.count(cid) > 0) continue;
            backend_->erase(cid);
            last_access_.erase(cid);
            evicted.push_back(cid);
        }
        std::sort(evicted.begin(), evicted.end());
        flush_meta();
        return evicted;
    }

    StoreStats stats() const {
        std::shared_lock lock(mu_);
        StoreStats s;
        s.object_count = backend_->object_count();
        s.stored_bytes = backend_->stored_bytes();
        s.submitted_bytes = submitted_bytes_;
        s.unique_data_bytes = unique_data_bytes_;
        s.dedup_saved_bytes = submitted_bytes_ - unique_data_bytes_;
        s.pinned_objects = closure_of_lenient(pins_).size();
        return s;
    }

    std::vector<Cid> pinned_roots() const {
        std::shared_lock lock(mu_);
        return {pins_.begin(), pins_.end()};
    }

  private:
    static constexpr std::uint8_t kCommitTag = 0x02;

    Cid put_object_locked(const CasObject& obj) {
        Bytes bytes = obj.canonical_bytes();
        Cid cid = Cid::from_digest(sha256(bytes));
        backend_->store(cid, as_span(bytes));
        touch(cid);
        return cid;
    }

    // Leaf writes feed the dedup accounting: only bytes not already present
    // count as unique.
    Cid put_leaf_locked(const CasObject& leaf) {
        Bytes bytes = leaf.canonical_bytes();
        Cid cid = Cid::from_digest(sha256(bytes));
        if (!backend_->contains(cid)) unique_data_bytes_ += leaf.data.size();
        backend_->store(cid, as_span(bytes));
        touch(cid);
        return cid;
    }

    CasObject fetch_verified(const Cid& cid) const {
        std::optional<Bytes> raw = backend_->fetch(cid);
        if (!raw) throw Error(ErrorCode::NotFound, "object not in store: " + cid.str());
        if (sha256(*raw) != cid.digest())
            throw Error(ErrorCode::CorruptObject, "stored bytes do not match " + cid.str());
        return CasObject::parse(as_span(*raw));
    }

    std::uint64_t object_size(const Cid& cid) const {
        std::optional<Bytes> raw = backend_->fetch(cid);
        if (!raw) throw Error(ErrorCode::NotFound, "object not in store: " + cid.str());
        return raw->size();
    }

    void collect_file(const Cid& cid, Bytes& out, int depth) {
        if (depth > 64) throw Error(ErrorCode::CorruptObject, "file DAG too deep");
        CasObject obj = fetch_verified(cid);
        touch(cid);
        if (obj.links.empty()) {
            out.insert(out.end(), obj.data.begin(), obj.data.end());
            return;
        }
        if (!obj.data.empty())
            throw Error(ErrorCode::NotAFile, "object mixes data and links: " + cid.str());
        for (const CasLink& l : obj.links) collect_file(l.cid, out, depth + 1);
    }

    CommitView read_commit_locked(const Cid& cid) const {
        CasObject obj = fetch_verified(cid);
        if (obj.data.empty() || obj.data[0] != kCommitTag || obj.links.empty() ||
            obj.links.size() > 2)
            throw Error(ErrorCode::NotACommit, "object is not a commit: " + cid.str());
        ByteReader r(as_span(obj.data));
        r.u8();
        CommitView v;
        v.commit_cid = cid;
        v.timestamp = r.u64be();
        v.metadata = bytes_str(as_span(r.sized()));
        r.expect_end();
        v.root = obj.links[0].cid;
        if (obj.links.size() == 2) v.parent = obj.links[1].cid;
        return v;
    }

    bool expired(const Cid& cid, std::uint64_t now, std::uint64_t ttl) const {
        auto it = last_access_.find(cid);
        std::uint64_t last = it == last_access_.end() ? 0 : it->second;
        if (now <= last) return false;
        return now - last > ttl;
    }

    template <typename Roots>
    std::set<Cid> closure_of(const Roots& roots) const {
        std::set<Cid> seen;
        std::deque<Cid> queue(roots.begin(), roots.end());
        while (!queue.empty()) {
            Cid cid = queue.front();
            queue.pop_front();
            if (!seen.insert(cid).second) continue;
            CasObject obj = fetch_verified(cid);
            for (const CasLink& l : obj.links) queue.push_back(l.cid);
        }
        return seen;
    }

    // Same walk but tolerating gaps; used only for stats reporting.
    std::set<Cid> closure_of_lenient(const std::set<Cid>& roots) const {
        std::set<Cid> seen;
        std::deque<Cid> queue(roots.begin(), roots.end());
        while (!queue.empty()) {
            Cid cid = queue.front();
            queue.pop_front();
            if (!backend_->contains(cid)) continue;
            if (!seen.insert(cid).second) continue;
            CasObject obj = fetch_verified(cid);
            for (const CasLink& l : obj.links) queue.push_back(l.cid);
        }
        return seen;
    }

    void touch(const Cid& cid) { last_access_[cid] = now_(); }

    void load_meta() {
        if (!meta_file_) return;
        std::ifstream in(*meta_file_);
        if (!in) return;  // fresh store
        std::string line;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "submitted") {
                ls >> submitted_bytes_;
            } else if (key == "unique") {
                ls >> unique_data_bytes_;
            } else if (key == "pin") {
                std::string cid;
                ls >> cid;
                pins_.insert(Cid::parse(cid));
            } else if (key == "access") {
                std::string cid;
                std::uint64_t t = 0;
                ls >> cid >> t;
                last_access_[Cid::parse(cid)] = t;
            } else if (!key.empty()) {
                throw Error(ErrorCode::CorruptChain, "unknown store meta entry: " + key);
            }
        }
    }

    void flush_meta() const {
        if (!meta_file_) return;
        std::filesystem::path tmp = *meta_file_;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw Error(ErrorCode::IoError, "cannot write store meta");
            out << "submitted " << submitted_bytes_ << "\n";
            out << "unique " << unique_data_bytes_ << "\n";
            for (const Cid& cid : pins_) out << "pin " << cid.str() << "\n";
            for (const auto& [cid, t] : last_access_)
                out << "access " << cid.str() << " " << t << "\n";
        }
        std::filesystem::rename(tmp, *meta_file_);
    }

    mutable std::shared_mutex mu_;
    std::unique_ptr<ObjectBackend> backend_;
    NowFn now_;
    std::optional<std::filesystem::path> meta_file_;
    std::set<Cid> pins_;
    std::map<Cid, std::uint64_t> last_access_;
    std::uint64_t submitted_bytes_ = 0;
    std::uint64_t unique_data_bytes_ = 0;
};

}  // namespace medvault
