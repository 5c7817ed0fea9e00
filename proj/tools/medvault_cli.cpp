// Command line front end: persistent actors, ledger and content store under
// one data directory, plus the scenario runner and benchmark reports.
//
// Exit codes: 0 success, 1 usage, 2 domain error (rejected or reverted
// operations, missing inputs), 3 corrupted chain or store.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "medvault/medvault.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace medvault;

namespace {

std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Bytes read_binary_file(const fs::path& p) {
    std::string s = read_text_file(p);
    return Bytes(s.begin(), s.end());
}

void write_text_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
}

// Session state persisted in the data directory. The gas schedule and rate
// limit are fixed when the directory is initialized: changing them later
// would make the existing block file unreplayable.
struct Session {
    fs::path dir;
    std::uint64_t seed = 0;
    GasSchedule schedule = GasSchedule::defaults();
    RateLimitConfig rate_limit;
    std::uint64_t now = 1;

    fs::path config_path() const { return dir / "config.json"; }
    fs::path clock_path() const { return dir / "clock"; }
    fs::path keys_dir() const { return dir / "keys"; }
    fs::path key_path(const std::string& name) const { return keys_dir() / (name + ".json"); }

    void load_or_init(const std::optional<std::string>& schedule_file,
                      std::optional<std::uint64_t> rate_limit_grants,
                      std::optional<std::uint64_t> rate_window) {
        fs::create_directories(dir);
        if (fs::exists(config_path())) {
            if (schedule_file || rate_limit_grants || rate_window)
                throw Error(ErrorCode::BadScenario,
                            "schedule and rate limit are fixed when the data dir is created; "
                            "start a fresh --data-dir to change them");
            json cfg = json::parse(read_text_file(config_path()));
            schedule.base_gas.clear();
            for (auto& [k, v] : cfg["schedule"]["base_gas"].items())
                schedule.base_gas[k] = v.get<std::uint64_t>();
            schedule.per_note_byte = cfg["schedule"]["per_note_byte"].get<std::uint64_t>();
            schedule.default_gas_price =
                wei_from_string(cfg["schedule"]["default_gas_price"].get<std::string>());
            schedule.default_gas_limit = cfg["schedule"]["default_gas_limit"].get<std::uint64_t>();
            schedule.usd_per_ether = cfg["schedule"]["usd_per_ether"].get<double>();
            rate_limit.enabled = cfg["rate_limit"]["enabled"].get<bool>();
            rate_limit.max_grants = cfg["rate_limit"]["max_grants"].get<std::uint32_t>();
            rate_limit.window_seconds = cfg["rate_limit"]["window_seconds"].get<std::uint64_t>();
        } else {
            if (schedule_file) {
                json s = json::parse(read_text_file(*schedule_file));
                for (auto& [k, v] : s.items()) {
                    if (k == "per_note_byte")
                        schedule.per_note_byte = v.get<std::uint64_t>();
                    else if (k == "usd_per_ether")
                        schedule.usd_per_ether = v.get<double>();
                    else
                        schedule.base_gas[k] = v.get<std::uint64_t>();
                }
            }
            if (rate_limit_grants) {
                rate_limit.enabled = *rate_limit_grants > 0;
                if (*rate_limit_grants > 0)
                    rate_limit.max_grants = static_cast<std::uint32_t>(*rate_limit_grants);
            }
            if (rate_window) rate_limit.window_seconds = *rate_window;
            save_config();
        }
        if (fs::exists(clock_path()))
            now = std::stoull(read_text_file(clock_path()));
    }

    void save_config() const {
        json cfg;
        json base = json::object();
        for (const auto& [k, v] : schedule.base_gas) base[k] = v;
        cfg["schedule"] = {{"base_gas", base},
                           {"per_note_byte", schedule.per_note_byte},
                           {"default_gas_price", wei_to_string(schedule.default_gas_price)},
                           {"default_gas_limit", schedule.default_gas_limit},
                           {"usd_per_ether", schedule.usd_per_ether}};
        cfg["rate_limit"] = {{"enabled", rate_limit.enabled},
                             {"max_grants", rate_limit.max_grants},
                             {"window_seconds", rate_limit.window_seconds}};
        write_text_file(config_path(), cfg.dump(2) + "\n");
    }

    void bump_clock() const { write_text_file(clock_path(), std::to_string(now + 1) + "\n"); }

    std::unique_ptr<World> open_world() const {
        WorldOptions opts;
        opts.seed = seed;
        opts.schedule = schedule;
        opts.rate_limit = rate_limit;
        opts.data_dir = dir;
        opts.start_time = now;
        return std::make_unique<World>(opts);
    }

    void save_keystore(const Actor& a) const {
        fs::create_directories(keys_dir());
        json j;
        j["name"] = a.name;
        j["role"] = role_name(a.role);
        j["address"] = a.wallet.address.str();
        j["chain_public"] = to_hex(as_span(a.wallet.keys.public_key));
        j["chain_private"] = to_hex(as_span(a.wallet.keys.private_key));
        j["enc_public"] = to_hex(as_span(a.enc_keys.public_key));
        j["enc_private"] = to_hex(as_span(a.enc_keys.private_key));
        j["sign_public"] = to_hex(as_span(a.sign_keys.public_key));
        j["sign_private"] = to_hex(as_span(a.sign_keys.private_key));
        if (a.own_signature)
            j["image_signature"] = to_hex(as_span(a.own_signature->serialize()));
        write_text_file(key_path(a.name), j.dump(2) + "\n");
    }

    Actor& load_actor(World& world, const std::string& name) const {
        if (world.has_actor(name)) return world.actor(name);
        fs::path p = key_path(name);
        if (!fs::exists(p))
            throw Error(ErrorCode::NotFound, "no keystore for actor " + name +
                                                 "; run keygen --name " + name + " first");
        json j = json::parse(read_text_file(p));
        Wallet wallet = Wallet::with_address(
            KeyPair{KeyKind::Signing, from_hex(j["chain_public"].get<std::string>()),
                    from_hex(j["chain_private"].get<std::string>())},
            Address::parse(j["address"].get<std::string>()));
        KeyPair enc{KeyKind::Encryption, from_hex(j["enc_public"].get<std::string>()),
                    from_hex(j["enc_private"].get<std::string>())};
        KeyPair sign{KeyKind::Signing, from_hex(j["sign_public"].get<std::string>()),
                     from_hex(j["sign_private"].get<std::string>())};
        Actor& a = world.adopt_actor(name, role_from_name(j["role"].get<std::string>()),
                                     std::move(wallet), std::move(enc), std::move(sign),
                                     std::to_string(now));
        if (j.contains("image_signature"))
            a.own_signature = ImageSignature::parse(
                as_span(from_hex(j["image_signature"].get<std::string>())));
        return a;
    }

    // An actor argument may be a known keystore name or a raw address.
    Address resolve_address(World& world, const std::string& who) const {
        if (who.rfind("0x", 0) == 0) return Address::parse(who);
        return load_actor(world, who).wallet.address;
    }
};

json receipt_json(const Receipt& r, const GasSchedule& schedule) {
    json j;
    j["tx"] = hash_hex(r.tx_hash);
    j["status"] = tx_status_name(r.status);
    if (r.revert_reason) j["revert_reason"] = error_code_name(*r.revert_reason);
    j["gas_used"] = r.gas_used;
    j["fee_wei"] = wei_to_string(r.fee_wei);
    j["fee_ether"] = wei_to_ether_string(r.fee_wei);
    char usd[32];
    std::snprintf(usd, sizeof usd, "%.3f", wei_to_usd(r.fee_wei, schedule.usd_per_ether));
    j["fee_usd"] = usd;
    json events = json::array();
    for (const Event& e : r.events) events.push_back(e.record());
    j["events"] = std::move(events);
    return j;
}

// Receipt printing plus the exit policy: a transaction that landed but did
// not succeed is a domain failure.
int finish_op(Session& session, const Receipt& r) {
    std::cout << receipt_json(r, session.schedule).dump(2) << "\n";
    session.bump_clock();
    return r.status == TxStatus::Success ? 0 : 2;
}

void emit_report(const CsvReport& report, const std::optional<std::string>& out) {
    if (out)
        write_text_file(*out, report.to_string());
    else
        std::cout << report.to_string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"patient-centric medical image ledger"};
    app.require_subcommand(1);

    Session session;
    std::optional<std::string> schedule_file;
    std::optional<std::uint64_t> rate_grants, rate_window;
    std::string gas_price_str;
    std::optional<std::uint64_t> gas_limit_opt;

    app.add_option("--data-dir", session.dir, "state directory")->required();
    app.add_option("--seed", session.seed, "deterministic randomness seed");
    app.add_option("--schedule", schedule_file,
                   "gas schedule JSON, honored only when the data dir is created");
    app.add_option("--rate-limit", rate_grants,
                   "max approvals per window at initialization, 0 disables");
    app.add_option("--rate-window", rate_window, "rate limit window seconds at initialization");
    app.add_option("--gas-price", gas_price_str, "gas price in wei for new transactions");
    app.add_option("--gas-limit", gas_limit_opt, "gas limit for new transactions");

    // keygen
    auto* keygen = app.add_subcommand("keygen", "create an actor identity and fund its account");
    std::string kg_name, kg_role = "patient", kg_address;
    std::string kg_fund = wei_to_string(kWeiPerEther);
    keygen->add_option("--name", kg_name, "actor name")->required();
    keygen->add_option("--role", kg_role, "patient | radiologist | requestor");
    keygen->add_option("--address", kg_address, "bind a specific 0x address");
    keygen->add_option("--fund", kg_fund, "initial balance in wei");

    // store
    auto* store_cmd = app.add_subcommand("store", "encrypt, store and register an image");
    std::string st_patient, st_radiologist, st_file, st_description;
    store_cmd->add_option("--patient", st_patient)->required();
    store_cmd->add_option("--radiologist", st_radiologist)->required();
    store_cmd->add_option("--file", st_file, "image file")->required();
    store_cmd->add_option("--description", st_description)->required();

    // request / approve / deny / trace / remove
    auto* request_cmd = app.add_subcommand("request", "request access to a patient's image");
    std::string rq_requester, rq_patient, rq_notes;
    request_cmd->add_option("--requester", rq_requester)->required();
    request_cmd->add_option("--patient", rq_patient)->required();
    request_cmd->add_option("--notes", rq_notes)->required();

    auto* approve_cmd = app.add_subcommand("approve", "grant a pending request");
    std::string ap_patient, ap_requester, ap_share, ap_notes;
    approve_cmd->add_option("--patient", ap_patient)->required();
    approve_cmd->add_option("--requester", ap_requester)->required();
    approve_cmd->add_option("--share-cid", ap_share, "content id recorded in the share map");
    approve_cmd->add_option("--notes", ap_notes);

    auto* deny_cmd = app.add_subcommand("deny", "deny a pending request");
    std::string dn_patient, dn_requester, dn_reason;
    deny_cmd->add_option("--patient", dn_patient)->required();
    deny_cmd->add_option("--requester", dn_requester)->required();
    deny_cmd->add_option("--reason", dn_reason)->required();

    auto* trace_cmd = app.add_subcommand("trace", "check and log an authorization");
    std::string tr_caller, tr_patient, tr_requester;
    trace_cmd->add_option("--caller", tr_caller)->required();
    trace_cmd->add_option("--patient", tr_patient)->required();
    trace_cmd->add_option("--requester", tr_requester)->required();

    auto* remove_cmd = app.add_subcommand("remove", "revoke an authorization");
    std::string rm_patient, rm_requester;
    remove_cmd->add_option("--patient", rm_patient)->required();
    remove_cmd->add_option("--requester", rm_requester)->required();

    // share (full flow)
    auto* share_cmd = app.add_subcommand("share", "run the request-approve-deliver flow");
    std::string sh_patient, sh_requestor, sh_notes;
    share_cmd->add_option("--patient", sh_patient)->required();
    share_cmd->add_option("--requestor", sh_requestor)->required();
    share_cmd->add_option("--notes", sh_notes)->required();

    // run-scenario
    auto* scenario_cmd = app.add_subcommand("run-scenario", "drive a scripted simulation");
    std::string sc_preset, sc_file;
    scenario_cmd->add_option("--preset", sc_preset, "built-in script name (access-demo)");
    scenario_cmd->add_option("--file", sc_file, "script path");

    // export-events
    auto* export_cmd = app.add_subcommand("export-events", "print the event log");
    std::string ex_concerning, ex_name;
    export_cmd->add_option("--concerning", ex_concerning, "actor name or 0x address");
    export_cmd->add_option("--event", ex_name, "filter by event name");

    // validate / stats / gc
    auto* validate_cmd = app.add_subcommand("validate", "check the stored chain");
    auto* stats_cmd = app.add_subcommand("stats", "ledger and store summary");
    auto* gc_cmd = app.add_subcommand("gc", "collect unpinned idle content");
    std::uint64_t gc_ttl = 30ull * 24 * 3600;
    gc_cmd->add_option("--ttl", gc_ttl, "idle seconds before eviction");

    // benches
    auto* bstore = app.add_subcommand("bench-storage", "store upload/download latency CSV");
    std::vector<std::uint64_t> bs_sizes_mib = {1, 10, 50, 100};
    int bs_trials = 3;
    std::optional<std::string> bs_out;
    bstore->add_option("--sizes-mib", bs_sizes_mib, "payload sizes in MiB");
    bstore->add_option("--trials", bs_trials);
    bstore->add_option("--out", bs_out, "write CSV here instead of stdout");

    auto* bevents = app.add_subcommand("bench-events", "ledger operation latency CSV");
    int be_wallets = 5, be_repeats = 3;
    std::optional<std::string> be_out;
    bevents->add_option("--wallets", be_wallets);
    bevents->add_option("--repeats", be_repeats);
    bevents->add_option("--out", be_out);

    auto* bgas = app.add_subcommand("bench-gas", "gas versus block size CSV");
    int bg_blocks = 20;
    std::uint64_t bg_note = 68;
    std::optional<std::string> bg_out;
    bgas->add_option("--blocks", bg_blocks);
    bgas->add_option("--per-note-byte", bg_note);
    bgas->add_option("--out", bg_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        session.load_or_init(schedule_file, rate_grants, rate_window);
        if (!gas_price_str.empty())
            session.schedule.default_gas_price = wei_from_string(gas_price_str);
        if (gas_limit_opt) session.schedule.default_gas_limit = *gas_limit_opt;

        if (*keygen) {
            if (fs::exists(session.key_path(kg_name)))
                throw Error(ErrorCode::BadScenario, "actor already exists: " + kg_name);
            auto world = session.open_world();
            std::optional<Address> addr;
            if (!kg_address.empty()) addr = Address::parse(kg_address);
            Actor& a = world->add_actor(kg_name, role_from_name(kg_role), addr,
                                        wei_from_string(kg_fund));
            world->seal();
            session.save_keystore(a);
            json j{{"name", a.name},
                   {"role", role_name(a.role)},
                   {"address", a.wallet.address.str()},
                   {"balance_wei", wei_to_string(world->chain().account(a.wallet.address)->balance)}};
            std::cout << j.dump(2) << "\n";
            session.bump_clock();
            return 0;
        }

        if (*store_cmd) {
            auto world = session.open_world();
            session.load_actor(*world, st_patient);
            session.load_actor(*world, st_radiologist);
            Bytes image = read_binary_file(st_file);
            StoreFlowResult flow =
                world->store_image_flow(st_patient, st_radiologist, as_span(image),
                                        st_description);
            session.save_keystore(world->actor(st_patient));  // keeps the attestation
            json j = receipt_json(flow.create_receipt, session.schedule);
            j["cid"] = flow.envelope_cid.str();
            j["roundtrip_ok"] = flow.roundtrip_ok;
            std::cout << j.dump(2) << "\n";
            session.bump_clock();
            return flow.create_receipt.status == TxStatus::Success ? 0 : 2;
        }

        if (*request_cmd) {
            auto world = session.open_world();
            Actor& requester = session.load_actor(*world, rq_requester);
            Address patient = session.resolve_address(*world, rq_patient);
            Receipt r = world->op_request(requester, patient, rq_notes);
            world->seal();
            return finish_op(session, r);
        }

        if (*approve_cmd) {
            auto world = session.open_world();
            Actor& patient = session.load_actor(*world, ap_patient);
            Address requester = session.resolve_address(*world, ap_requester);
            std::optional<Cid> share;
            if (!ap_share.empty()) share = Cid::parse(ap_share);
            Receipt r = world->op_approve(patient, requester, Decision::Grant, ap_notes, share);
            world->seal();
            return finish_op(session, r);
        }

        if (*deny_cmd) {
            auto world = session.open_world();
            Actor& patient = session.load_actor(*world, dn_patient);
            Address requester = session.resolve_address(*world, dn_requester);
            Receipt r = world->op_approve(patient, requester, Decision::Deny, dn_reason);
            world->seal();
            return finish_op(session, r);
        }

        if (*trace_cmd) {
            auto world = session.open_world();
            Actor& caller = session.load_actor(*world, tr_caller);
            Address patient = session.resolve_address(*world, tr_patient);
            Address requester = session.resolve_address(*world, tr_requester);
            Receipt r = world->op_trace(caller, patient, requester);
            world->seal();
            if (r.status != TxStatus::Success) return finish_op(session, r);
            for (const Event& e : r.events) std::cout << e.export_line() << "\n";
            session.bump_clock();
            return 0;
        }

        if (*remove_cmd) {
            auto world = session.open_world();
            Actor& patient = session.load_actor(*world, rm_patient);
            Address requester = session.resolve_address(*world, rm_requester);
            Receipt r = world->op_remove(patient, requester);
            world->seal();
            return finish_op(session, r);
        }

        if (*share_cmd) {
            auto world = session.open_world();
            session.load_actor(*world, sh_patient);
            session.load_actor(*world, sh_requestor);
            ShareFlowResult flow = world->share_image_flow(sh_patient, sh_requestor, sh_notes);
            json j = receipt_json(flow.approve_receipt, session.schedule);
            j["share_cid"] = flow.share_cid.str();
            j["plaintext_matches"] = flow.plaintext_matches;
            if (flow.signature_ok) j["signature_ok"] = *flow.signature_ok;
            std::cout << j.dump(2) << "\n";
            session.bump_clock();
            return 0;
        }

        if (*scenario_cmd) {
            if (sc_preset.empty() == sc_file.empty())
                throw Error(ErrorCode::BadScenario, "pass exactly one of --preset or --file");
            std::string script;
            if (!sc_preset.empty()) {
                std::optional<std::string> preset = preset_scenario(sc_preset);
                if (!preset)
                    throw Error(ErrorCode::BadScenario, "no preset named " + sc_preset);
                script = *preset;
            } else {
                script = read_text_file(sc_file);
            }
            auto world = session.open_world();
            if (world->chain().height() > 0)
                throw Error(ErrorCode::BadScenario,
                            "scenarios need a fresh chain; use an empty --data-dir");
            RunReport report = run_scenario(script, *world);
            for (const StepResult& s : report.steps) {
                std::cout << "line " << s.line << " t=" << s.at << " " << s.actor << " "
                          << s.verb << (s.ok ? " ok" : " FAIL " + s.detail);
                if (s.gas_used > 0) std::cout << " gas=" << s.gas_used;
                std::cout << "\n";
            }
            std::cout << "blocks " << report.blocks << ", total gas " << report.total_gas
                      << ", head " << report.final_hash << "\n";
            std::cout << world->chain().export_events();
            write_text_file(session.clock_path(),
                            std::to_string(world->clock().now() + 1) + "\n");
            return report.all_ok() ? 0 : 2;
        }

        if (*export_cmd) {
            auto world = session.open_world();
            std::optional<Address> concerning;
            if (!ex_concerning.empty())
                concerning = session.resolve_address(*world, ex_concerning);
            std::optional<std::string> name;
            if (!ex_name.empty()) name = ex_name;
            std::cout << world->chain().export_events(concerning, name);
            return 0;
        }

        if (*validate_cmd) {
            ValidationReport report = Chain::validate_file(session.dir / "chain");
            if (report.ok) {
                std::cout << "ok: " << report.blocks << " blocks\n";
                return 0;
            }
            std::cout << "corrupt: " << report.detail << "\n";
            return 3;
        }

        if (*stats_cmd) {
            auto world = session.open_world();
            StoreStats s = world->store().stats();
            json j;
            j["chain"] = {{"height", world->chain().height()},
                          {"head", hash_hex(world->chain().last_hash())},
                          {"contracts", world->chain().registry().contract_count()},
                          {"fees_wei", wei_to_string(world->chain().fees_collected())}};
            j["store"] = {{"objects", s.object_count},
                          {"stored_bytes", s.stored_bytes},
                          {"pinned_objects", s.pinned_objects},
                          {"submitted_bytes", s.submitted_bytes},
                          {"unique_data_bytes", s.unique_data_bytes},
                          {"dedup_saved_bytes", s.dedup_saved_bytes}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*gc_cmd) {
            auto world = session.open_world();
            std::vector<Cid> evicted = world->store().gc(gc_ttl);
            for (const Cid& cid : evicted) std::cout << cid.str() << "\n";
            std::cout << "evicted " << evicted.size() << " objects\n";
            session.bump_clock();
            return 0;
        }

        if (*bstore) {
            std::vector<std::size_t> sizes;
            for (std::uint64_t mib : bs_sizes_mib)
                sizes.push_back(static_cast<std::size_t>(mib) * 1024 * 1024);
            fs::path work = session.dir / "bench-work";
            fs::create_directories(work);
            CsvReport report = bench_storage(sizes, bs_trials, work, session.seed);
            fs::remove_all(work);
            emit_report(report, bs_out);
            return 0;
        }

        if (*bevents) {
            fs::path work = session.dir / "bench-work";
            fs::create_directories(work);
            CsvReport report = bench_events(be_wallets, be_repeats, session.seed, work);
            fs::remove_all(work);
            emit_report(report, be_out);
            return 0;
        }

        if (*bgas) {
            emit_report(bench_gas(bg_blocks, session.seed, bg_note), bg_out);
            return 0;
        }

        throw Error(ErrorCode::BadScenario, "no subcommand handled");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == ErrorCode::CorruptChain || e.code() == ErrorCode::CorruptObject)
            return 3;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
