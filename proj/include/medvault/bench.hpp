#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "scenario.hpp"

namespace medvault {

// Host line included in every benchmark report so numbers from different
// machines are never compared blind.
inline std::string bench_host_line() {
    return "host_cores " + std::to_string(std::thread::hardware_concurrency());
}

// Benchmarks report CSV with '#'-prefixed metadata lines up front, so a
// report is self-describing (seed, trial counts, units) yet still loads in
// anything that reads CSV.
struct CsvReport {
    std::vector<std::string> meta;
    std::string header;
    std::vector<std::string> rows;

    std::string to_string() const {
        std::string out;
        for (const std::string& m : meta) out += "# " + m + "\n";
        out += header + "\n";
        for (const std::string& r : rows) out += r + "\n";
        return out;
    }
};

inline double time_call(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

// Spearman rank correlation with average ranks for ties. Returns 0 for
// degenerate inputs (fewer than two points, or a constant series).
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::size_t n = xs.size();
    if (n != ys.size() || n < 2) return 0.0;

    auto ranks = [](const std::vector<double>& v) {
        std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };

    std::vector<double> rx = ranks(xs), ry = ranks(ys);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
    double cov = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = rx[i] - mx, dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if (vx == 0 || vy == 0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

inline std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return buf;
}

// Upload/download latency of the disk-backed store across payload sizes,
// plus a dedup column: unique bytes added when the same payload is stored a
// second time (expected to stay near zero).
inline CsvReport bench_storage(const std::vector<std::size_t>& sizes, int trials,
                               const std::filesystem::path& work_dir, std::uint64_t seed) {
    CsvReport report;
    report.meta = {"content store benchmark", "seed " + std::to_string(seed),
                   "trials " + std::to_string(trials),
                   "chunk_bytes " + std::to_string(kChunkSize), "units seconds",
                   bench_host_line()};
    report.header =
        "size_bytes,mean_upload_seconds,mean_download_seconds,repeat_upload_unique_bytes";

    DeterministicRng rng(seed);
    for (std::size_t size : sizes) {
        Bytes payload = rng.derive("payload-" + std::to_string(size)).bytes(size);
        double up = 0, down = 0;
        std::uint64_t repeat_unique = 0;
        for (int t = 0; t < trials; ++t) {
            std::filesystem::path dir =
                work_dir / ("s" + std::to_string(size) + "-t" + std::to_string(t));
            std::filesystem::create_directories(dir);
            Store store(std::make_unique<DiskBackend>(dir));
            Cid cid;
            up += time_call([&] { cid = store.put_file(as_span(payload)); });
            Bytes back;
            down += time_call([&] { back = store.get_file(cid); });
            if (back != payload)
                throw Error(ErrorCode::CorruptObject, "benchmark roundtrip mismatch");
            if (t == 0) {
                std::uint64_t before = store.stats().unique_data_bytes;
                store.put_file(as_span(payload));
                repeat_unique = store.stats().unique_data_bytes - before;
            }
            std::filesystem::remove_all(dir);
        }
        report.rows.push_back(std::to_string(size) + "," +
                              format_seconds(up / trials) + "," +
                              format_seconds(down / trials) + "," +
                              std::to_string(repeat_unique));
    }
    return report;
}

// Latency of each ledger operation, timed end to end: build, sign, apply and
// seal into a block (with persistence when work_dir is given). "deploy" is
// the account funding step. One patient wallet per row group, a shared
// requestor as counterparty, means over the repeat count.
inline CsvReport bench_events(int wallets, int repeats, std::uint64_t seed,
                              std::optional<std::filesystem::path> work_dir = {}) {
    static const char* kOps[] = {"deploy",           "create_contract", "requesting_access",
                                 "approve_IRs",      "trace_authorization", "remove_IRs"};
    CsvReport report;
    report.meta = {"ledger operation latency benchmark", "seed " + std::to_string(seed),
                   "wallets " + std::to_string(wallets),
                   "repeats " + std::to_string(repeats), "units seconds",
                   bench_host_line()};
    report.header = "operation,wallet,mean_seconds,gas_used";

    std::map<std::string, std::vector<double>> times;  // "<op>,<wallet>" -> samples
    std::map<std::string, std::uint64_t> gas;

    for (int rep = 0; rep < repeats; ++rep) {
        WorldOptions opts;
        opts.seed = seed + static_cast<std::uint64_t>(rep);
        if (work_dir) {
            opts.data_dir = *work_dir / ("rep" + std::to_string(rep));
            std::filesystem::create_directories(*opts.data_dir);
        }
        World world(opts);
        world.add_actor("requestor", Role::Requestor);
        world.seal();

        for (int wi = 0; wi < wallets; ++wi) {
            std::string wname = "w" + std::to_string(wi);
            auto sample = [&](const char* op, double seconds, std::uint64_t used) {
                std::string key = std::string(op) + "," + wname;
                times[key].push_back(seconds);
                gas[key] = used;
            };

            double t = time_call([&] {
                world.add_actor(wname, Role::Patient);
                world.seal();
            });
            sample("deploy", t, 0);

            Actor& patient = world.actor(wname);
            Actor& requestor = world.actor("requestor");
            Cid cid = Cid::from_digest(
                sha256(patient.rng.derive("bench-image").bytes(64)));

            Receipt r;
            t = time_call([&] {
                r = world.op_create(patient, cid, "benchmark image");
                world.seal();
            });
            sample("create_contract", t, r.gas_used);
            t = time_call([&] {
                r = world.op_request(requestor, patient.wallet.address, "benchmark");
                world.seal();
            });
            sample("requesting_access", t, r.gas_used);
            t = time_call([&] {
                r = world.op_approve(patient, requestor.wallet.address, Decision::Grant, {},
                                     cid);
                world.seal();
            });
            sample("approve_IRs", t, r.gas_used);
            t = time_call([&] {
                r = world.op_trace(requestor, patient.wallet.address,
                                   requestor.wallet.address);
                world.seal();
            });
            sample("trace_authorization", t, r.gas_used);
            t = time_call([&] {
                r = world.op_remove(patient, requestor.wallet.address);
                world.seal();
            });
            sample("remove_IRs", t, r.gas_used);
        }
        if (work_dir) std::filesystem::remove_all(*opts.data_dir);
    }

    for (const char* op : kOps) {
        for (int wi = 0; wi < wallets; ++wi) {
            std::string key = std::string(op) + "," + ("w" + std::to_string(wi));
            const std::vector<double>& samples = times[key];
            double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                          static_cast<double>(samples.size());
            report.rows.push_back(key + "," + format_seconds(mean) + "," +
                                  std::to_string(gas[key]));
        }
    }
    return report;
}

// Reference throughput target used to express block gas as a utilization
// percentage; one conventional mainnet block target.
constexpr std::uint64_t kBlockGasTarget = 15000000;

// Gas versus block size: blocks with more and larger calls must cost more
// gas. The schedule's per-note-byte surcharge is turned on so call payload
// size feeds both the serialized block and the metered gas, then the report
// carries the rank correlation between the two columns.
inline CsvReport bench_gas(int blocks, std::uint64_t seed, std::uint64_t per_note_byte = 68) {
    WorldOptions opts;
    opts.seed = seed;
    opts.schedule.per_note_byte = per_note_byte;
    World world(opts);
    DeterministicRng rng = DeterministicRng(seed).derive("bench-gas");

    CsvReport report;
    report.meta = {"gas versus block size benchmark", "seed " + std::to_string(seed),
                   "per_note_byte " + std::to_string(per_note_byte),
                   "gas_target " + std::to_string(kBlockGasTarget), bench_host_line()};
    report.header = "block,entries,gas_used,block_bytes,gas_target_pct";

    Actor& patient = world.add_actor("filer", Role::Patient, {}, 100 * kWeiPerEther);
    world.seal();

    std::vector<double> gas_col, size_col;
    for (int b = 0; b < blocks; ++b) {
        std::uint64_t entries = 1 + rng.below(6);
        for (std::uint64_t i = 0; i < entries; ++i) {
            Cid cid = Cid::from_digest(rng.seed32());
            std::string description(16 + rng.below(1200), 'd');
            Receipt r = world.op_create(patient, cid, description);
            if (r.status != TxStatus::Success)
                throw Error(ErrorCode::Unauthorized, "benchmark create failed");
        }
        const Block& sealed = world.seal();
        gas_col.push_back(static_cast<double>(sealed.gas_used));
        size_col.push_back(static_cast<double>(sealed.size_bytes));
        char pct[32];
        std::snprintf(pct, sizeof pct, "%.2f",
                      100.0 * static_cast<double>(sealed.gas_used) /
                          static_cast<double>(kBlockGasTarget));
        report.rows.push_back(std::to_string(sealed.height) + "," + std::to_string(entries) +
                              "," + std::to_string(sealed.gas_used) + "," +
                              std::to_string(sealed.size_bytes) + "," + pct);
    }
    report.meta.push_back("spearman_gas_vs_bytes " +
                          format_seconds(spearman(gas_col, size_col)));
    return report;
}

}  // namespace medvault
