#pragma once

#include <cctype>
#include <sstream>

#include "protocol.hpp"

namespace medvault {

// Scenario scripts drive a World line by line. Grammar, one step per line:
//
//   <time> <actor> <verb> <args...>
//
// with '#' comments, double-quoted strings for arguments containing spaces,
// and '-' as the actor for steps that have no subject (seal, gc). The time
// column sets the simulated clock before the step runs.
//
// Verbs:
//   actor <role> [0xaddress] [funding_wei]      declare the acting name
//   create <cid> <description>                  create_contract for an image
//   store <radiologist> <bytes> <description>   full storage flow, seeded image
//   request <patient> <notes>                   requesting_access
//   approve <requester> [share_cid]             approve_IRs, grant
//   deny <requester> <reason>                   approve_IRs, deny
//   trace <patient> <requester>                 trace_authorization
//   remove <requester>                          remove_IRs
//   share <requestor> <notes>                   full sharing flow
//   transfer <to> <amount_wei>                  plain value transfer
//   seal                                        seal a block at this time
//   gc <ttl_seconds>                            collect the content store
struct ScenarioStep {
    int line = 0;
    std::uint64_t at = 0;
    std::string actor;
    std::string verb;
    std::vector<std::string> args;
};

struct StepResult {
    int line = 0;
    std::uint64_t at = 0;
    std::string actor;
    std::string verb;
    bool ok = true;
    std::string detail;  // error code name, or tx status when not success
    std::uint64_t gas_used = 0;
};

struct RunReport {
    std::vector<StepResult> steps;
    std::uint64_t blocks = 0;
    std::uint64_t total_gas = 0;
    std::string final_hash;

    bool all_ok() const {
        for (const StepResult& s : steps)
            if (!s.ok) return false;
        return true;
    }
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line, int line_no) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '#') break;
        if (line[i] == '"') {
            std::size_t close = line.find('"', i + 1);
            if (close == std::string::npos)
                throw Error(ErrorCode::BadScenario,
                            "line " + std::to_string(line_no) + ": unterminated quote");
            out.push_back(line.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            std::size_t end = i;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])))
                ++end;
            out.push_back(line.substr(i, end - i));
            i = end;
        }
    }
    return out;
}

inline std::uint64_t parse_u64(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadScenario,
                    "line " + std::to_string(line_no) + ": bad " + what + ": " + s);
    }
}

// Argument count limits per verb; also the registry of known verbs.
inline const std::map<std::string, std::pair<std::size_t, std::size_t>>& verb_arity() {
    static const std::map<std::string, std::pair<std::size_t, std::size_t>> table = {
        {"actor", {1, 3}},  {"create", {2, 2}}, {"store", {3, 3}},  {"request", {2, 2}},
        {"approve", {1, 2}}, {"deny", {2, 2}},  {"trace", {2, 2}},  {"remove", {1, 1}},
        {"share", {2, 2}},  {"transfer", {2, 2}}, {"seal", {0, 0}}, {"gc", {1, 1}},
    };
    return table;
}

}  // namespace detail

inline std::vector<ScenarioStep> parse_scenario(const std::string& text) {
    std::vector<ScenarioStep> steps;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::uint64_t prev_at = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string> tokens = detail::tokenize(line, line_no);
        if (tokens.empty()) continue;
        if (tokens.size() < 3)
            throw Error(ErrorCode::BadScenario,
                        "line " + std::to_string(line_no) + ": want <time> <actor> <verb>");
        ScenarioStep s;
        s.line = line_no;
        s.at = detail::parse_u64(tokens[0], line_no, "time");
        s.actor = tokens[1];
        s.verb = tokens[2];
        s.args.assign(tokens.begin() + 3, tokens.end());

        if (s.at < prev_at)
            throw Error(ErrorCode::BadScenario,
                        "line " + std::to_string(line_no) + ": time moves backwards");
        prev_at = s.at;

        auto arity = detail::verb_arity().find(s.verb);
        if (arity == detail::verb_arity().end())
            throw Error(ErrorCode::BadScenario,
                        "line " + std::to_string(line_no) + ": unknown verb " + s.verb);
        if (s.args.size() < arity->second.first || s.args.size() > arity->second.second)
            throw Error(ErrorCode::BadScenario, "line " + std::to_string(line_no) +
                                                    ": wrong argument count for " + s.verb);
        steps.push_back(std::move(s));
    }
    return steps;
}

// The built-in access-control walkthrough: one patient, two requestors, one
// grant, one denial, traces of both, then revocation. Every decision lands
// in its own block; the two traces share block six.
inline const char* kAccessDemoScenario = R"(# access-demo: grant one requestor, deny the other, trace both, then revoke
0 patient actor patient 0x5575805E19b4807974Be0B77Fd9d385D4A0e6d1E
0 ir1 actor requestor 0xdD870fA1b7C4700F2BD7f44238821C26f7392148
0 ir2 actor requestor 0x583031D1113aD414F02576BD6afaBfb302140225
0 - seal
100 patient create QmNaS5gQzoPxr3S2n6T6BsFuVRmMFwpohLVFfAFrU8gyTq "Liver image"
100 - seal
200 ir1 request patient "Requesting access to the liver image"
200 - seal
300 ir2 request patient "Requesting access to the liver image"
300 - seal
400 patient approve ir1 QmNaS5gQzoPxr3S2n6T6BsFuVRmMFwpohLVFfAFrU8gyTq
400 - seal
500 patient deny ir2 "Need more detailed information to access my image"
500 - seal
600 ir1 trace patient ir1
600 ir2 trace patient ir2
600 - seal
700 patient remove ir1
700 - seal
)";

inline std::optional<std::string> preset_scenario(const std::string& name) {
    if (name == "access-demo") return std::string(kAccessDemoScenario);
    return std::nullopt;
}

// Runs a parsed script against a world. Step failures (rejected transactions,
// reverted calls, flow errors) are recorded and the run continues; only a
// malformed script stops the engine.
inline RunReport run_scenario(const std::vector<ScenarioStep>& steps, World& world) {
    RunReport report;

    auto address_of = [&world](const std::string& name) -> Address {
        if (name.rfind("0x", 0) == 0) return Address::parse(name);
        return world.actor(name).wallet.address;
    };
    auto want_args = [](const ScenarioStep& s, std::size_t min, std::size_t max) {
        if (s.args.size() < min || s.args.size() > max)
            throw Error(ErrorCode::BadScenario, "line " + std::to_string(s.line) +
                                                    ": wrong argument count for " + s.verb);
    };

    for (const ScenarioStep& s : steps) {
        world.clock().set(s.at);
        StepResult r;
        r.line = s.line;
        r.at = s.at;
        r.actor = s.actor;
        r.verb = s.verb;

        auto record_receipt = [&r](const Receipt& receipt) {
            r.gas_used = receipt.gas_used;
            if (receipt.status != TxStatus::Success) {
                r.ok = false;
                r.detail = receipt.revert_reason ? error_code_name(*receipt.revert_reason)
                                                 : tx_status_name(receipt.status);
            }
        };

        try {
            if (s.verb == "actor") {
                want_args(s, 1, 3);
                Role role = role_from_name(s.args[0]);
                std::optional<Address> addr;
                std::optional<Wei> funding;
                for (std::size_t i = 1; i < s.args.size(); ++i) {
                    if (s.args[i].rfind("0x", 0) == 0)
                        addr = Address::parse(s.args[i]);
                    else
                        funding = wei_from_string(s.args[i]);
                }
                world.add_actor(s.actor, role, addr, funding);
            } else if (s.verb == "create") {
                want_args(s, 2, 2);
                record_receipt(world.op_create(world.actor(s.actor), Cid::parse(s.args[0]),
                                               s.args[1]));
            } else if (s.verb == "store") {
                want_args(s, 3, 3);
                std::uint64_t n = detail::parse_u64(s.args[1], s.line, "byte count");
                Bytes image = world.actor(s.actor).rng.derive("image").bytes(n);
                StoreFlowResult flow =
                    world.store_image_flow(s.actor, s.args[0], as_span(image), s.args[2]);
                record_receipt(flow.create_receipt);
                if (!flow.roundtrip_ok) {
                    r.ok = false;
                    r.detail = "roundtrip mismatch";
                }
            } else if (s.verb == "request") {
                want_args(s, 2, 2);
                record_receipt(world.op_request(world.actor(s.actor), address_of(s.args[0]),
                                                s.args[1]));
            } else if (s.verb == "approve") {
                want_args(s, 1, 2);
                std::optional<Cid> share;
                if (s.args.size() == 2 && s.args[1] != "-") share = Cid::parse(s.args[1]);
                record_receipt(world.op_approve(world.actor(s.actor), address_of(s.args[0]),
                                                Decision::Grant, {}, share));
            } else if (s.verb == "deny") {
                want_args(s, 2, 2);
                record_receipt(world.op_approve(world.actor(s.actor), address_of(s.args[0]),
                                                Decision::Deny, s.args[1]));
            } else if (s.verb == "trace") {
                want_args(s, 2, 2);
                record_receipt(world.op_trace(world.actor(s.actor), address_of(s.args[0]),
                                              address_of(s.args[1])));
            } else if (s.verb == "remove") {
                want_args(s, 1, 1);
                record_receipt(world.op_remove(world.actor(s.actor), address_of(s.args[0])));
            } else if (s.verb == "share") {
                want_args(s, 2, 2);
                ShareFlowResult flow = world.share_image_flow(s.actor, s.args[0], s.args[1]);
                record_receipt(flow.approve_receipt);
                if (!flow.plaintext_matches) {
                    r.ok = false;
                    r.detail = "shared plaintext mismatch";
                }
            } else if (s.verb == "transfer") {
                want_args(s, 2, 2);
                record_receipt(world.op_transfer(world.actor(s.actor), address_of(s.args[0]),
                                                 wei_from_string(s.args[1])));
            } else if (s.verb == "seal") {
                want_args(s, 0, 0);
                world.seal();
            } else if (s.verb == "gc") {
                want_args(s, 1, 1);
                world.store().gc(detail::parse_u64(s.args[0], s.line, "ttl"));
            } else {
                throw Error(ErrorCode::BadScenario,
                            "line " + std::to_string(s.line) + ": unknown verb " + s.verb);
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::BadScenario) throw;
            r.ok = false;
            r.detail = error_code_name(e.code());
        }
        report.total_gas += r.gas_used;
        report.steps.push_back(std::move(r));
    }

    report.blocks = world.chain().height();
    report.final_hash = hash_hex(world.chain().last_hash());
    return report;
}

inline RunReport run_scenario(const std::string& text, World& world) {
    return run_scenario(parse_scenario(text), world);
}

}  // namespace medvault
