// Black-box checks of the command line front end. argv[1] is the path to the
// built binary; every invocation runs as a separate process against a scratch
// data directory, which is exactly how real sessions use it.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "medvault/medvault.hpp"

namespace fs = std::filesystem;
using namespace medvault;

namespace {

std::string g_cli;
int g_failures = 0;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        std::perror("popen");
        std::exit(70);
    }
    RunResult r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return r;
}

void check(bool ok, const std::string& what, const RunResult* r = nullptr) {
    if (ok) return;
    ++g_failures;
    std::cout << "FAILED: " << what << "\n";
    if (r != nullptr)
        std::cout << "  exit " << r->exit_code << "\n  output:\n" << r->output << "\n";
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("medvault-cli-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

// The scripted demo through the binary must land on the same head hash as
// the same scenario driven through the library in memory.
void test_scenario_equivalence() {
    World w{WorldOptions{}};
    RunReport expected = run_scenario(*preset_scenario("access-demo"), w);

    fs::path dir = fresh_dir("scenario");
    RunResult r = run("--data-dir " + quoted(dir) + " run-scenario --preset access-demo");
    check(r.exit_code == 0, "run-scenario exit code", &r);
    check(contains(r.output, "head " + expected.final_hash),
          "scenario head matches the library run", &r);
    check(contains(r.output, "blocks 8"), "scenario block count", &r);
    check(contains(r.output, "\"event\":\"Removed\""), "event export present", &r);

    // The chain file the run left behind validates, and a re-run on the used
    // directory is refused as a domain error.
    RunResult v = run("--data-dir " + quoted(dir) + " validate");
    check(v.exit_code == 0 && contains(v.output, "ok: 8 blocks"), "validate after scenario", &v);
    RunResult again = run("--data-dir " + quoted(dir) + " run-scenario --preset access-demo");
    check(again.exit_code == 2, "re-running on a used dir is refused", &again);

    fs::remove_all(dir);
}

// keygen / store / request / approve / trace / remove, one process each.
void test_persistent_session() {
    fs::path dir = fresh_dir("session");
    std::string base = "--data-dir " + quoted(dir) + " ";

    RunResult r = run(base + "keygen --name pat --role patient");
    check(r.exit_code == 0 && contains(r.output, "\"address\""), "keygen pat", &r);
    r = run(base + "keygen --name rad --role radiologist");
    check(r.exit_code == 0, "keygen rad", &r);
    r = run(base + "keygen --name req --role requestor --fund 2000000000000000000");
    check(r.exit_code == 0 && contains(r.output, "\"balance_wei\": \"2000000000000000000\""),
          "keygen req with funding", &r);

    fs::path image = dir / "scan.bin";
    {
        std::ofstream out(image, std::ios::binary);
        for (int i = 0; i < 300000; ++i) out.put(static_cast<char>(i * 31 % 251));
    }
    r = run(base + "store --patient pat --radiologist rad --file " + quoted(image) +
            " --description \"CT chest\"");
    check(r.exit_code == 0 && contains(r.output, "\"roundtrip_ok\": true"), "store image", &r);
    check(contains(r.output, "\"cid\": \"Qm"), "store prints a content id", &r);
    check(contains(r.output, "\"gas_used\": 67394"), "store charges the create fee", &r);

    r = run(base + "request --requester req --patient pat --notes \"consult\"");
    check(r.exit_code == 0 && contains(r.output, "\"status\": \"success\""), "request", &r);
    check(contains(r.output, "\"gas_used\": 246908"), "request gas is flat by default", &r);

    r = run(base + "approve --patient pat --requester req");
    check(r.exit_code == 0 && contains(r.output, "\"Requestaccepted\""), "approve", &r);

    r = run(base + "trace --caller req --patient pat --requester req");
    check(r.exit_code == 0 && contains(r.output, "\"AuthorizationSuccess\""),
          "trace while authorized", &r);

    r = run(base + "remove --patient pat --requester req");
    check(r.exit_code == 0 && contains(r.output, "\"Removed\""), "remove", &r);

    r = run(base + "trace --caller req --patient pat --requester req");
    check(r.exit_code == 0 && contains(r.output, "\"AuthorizationFailed\""),
          "trace after removal", &r);

    r = run(base + "export-events --event Removed");
    check(r.exit_code == 0 && contains(r.output, "Access revoked by patient"),
          "export filtered events", &r);

    r = run(base + "stats");
    check(r.exit_code == 0 && contains(r.output, "\"contracts\": 1"), "stats", &r);

    r = run(base + "validate");
    check(r.exit_code == 0, "validate clean session chain", &r);

    // Second image for the same patient dedups nothing but stores fine, and
    // the full share flow runs end to end in one invocation.
    fs::path image2 = dir / "scan2.bin";
    {
        std::ofstream out(image2, std::ios::binary);
        for (int i = 0; i < 1000; ++i) out.put(static_cast<char>(i % 97));
    }
    r = run(base + "store --patient pat --radiologist rad --file " + quoted(image2) +
            " --description \"follow-up\"");
    check(r.exit_code == 0, "store second image", &r);
    r = run(base + "share --patient pat --requestor req --notes \"second opinion\"");
    check(r.exit_code == 0 && contains(r.output, "\"plaintext_matches\": true") &&
              contains(r.output, "\"signature_ok\": true"),
          "share flow", &r);

    fs::remove_all(dir);
}

void test_error_paths() {
    fs::path dir = fresh_dir("errors");
    std::string base = "--data-dir " + quoted(dir) + " ";

    RunResult r = run(base + "frobnicate");
    check(r.exit_code == 1, "unknown subcommand is a usage error", &r);
    r = run("");
    check(r.exit_code == 1, "missing arguments is a usage error", &r);

    r = run(base + "keygen --name dup");
    check(r.exit_code == 0, "first keygen", &r);
    r = run(base + "keygen --name dup");
    check(r.exit_code == 2 && contains(r.output, "already exists"), "duplicate keygen", &r);

    r = run(base + "store --patient dup --radiologist dup --file /no/such/file "
                   "--description x");
    check(r.exit_code == 2, "missing image file is a domain error", &r);

    r = run(base + "trace --caller dup --patient dup --requester dup");
    check(r.exit_code == 2 && contains(r.output, "NoSuchContract"),
          "trace with no contract reverts", &r);

    r = run(base + "--rate-limit 5 stats");
    check(r.exit_code == 2 && contains(r.output, "fixed when the data dir is created"),
          "config changes on an existing dir are refused", &r);

    r = run(base + "export-events");
    check(r.exit_code == 0 && r.output.empty(), "eventless chain exports nothing", &r);

    fs::remove_all(dir);
}

// A schedule file at initialization turns on the per-note-byte surcharge.
void test_custom_schedule() {
    fs::path dir = fresh_dir("schedule");
    fs::path sched = dir / "sched.json";
    {
        std::ofstream out(sched);
        out << "{\"per_note_byte\": 68}\n";
    }
    fs::path data = dir / "data";
    std::string base = "--data-dir " + quoted(data) + " ";

    RunResult r = run(base + "--schedule " + quoted(sched) + " keygen --name pat");
    check(r.exit_code == 0, "keygen under custom schedule", &r);
    r = run(base + "keygen --name req --role requestor");
    check(r.exit_code == 0, "second keygen reuses the stored schedule", &r);

    fs::path image = dir / "img.bin";
    {
        std::ofstream out(image, std::ios::binary);
        out << "tiny";
    }
    r = run(base + "keygen --name rad --role radiologist");
    check(r.exit_code == 0, "third keygen", &r);
    r = run(base + "store --patient pat --radiologist rad --file " + quoted(image) +
            " --description \"x\"");
    check(r.exit_code == 0 && contains(r.output, "\"gas_used\": 67462"),
          "create pays one surcharged byte", &r);  // 67394 + 68
    r = run(base + "request --requester req --patient pat --notes \"consult\"");
    check(r.exit_code == 0 && contains(r.output, "\"gas_used\": 247384"),
          "request pays the note surcharge", &r);  // 246908 + 68 * 7

    fs::remove_all(dir);
}

void test_tamper_detection() {
    fs::path dir = fresh_dir("tamper");
    RunResult r = run("--data-dir " + quoted(dir) + " run-scenario --preset access-demo");
    check(r.exit_code == 0, "scenario for tamper test", &r);

    fs::path file = dir / "chain" / "blocks.dat";
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    check(f.good(), "chain file exists");
    f.seekg(0, std::ios::end);
    std::streamoff size = f.tellg();
    std::streamoff pos = size / 2;
    f.seekg(pos);
    char c = 0;
    f.get(c);
    f.seekp(pos);
    f.put(static_cast<char>(c ^ 0x20));
    f.close();

    r = run("--data-dir " + quoted(dir) + " validate");
    check(r.exit_code == 3 && contains(r.output, "corrupt:"), "validate flags the flip", &r);
    fs::remove_all(dir);
}

void test_bench_reports() {
    fs::path dir = fresh_dir("bench");
    fs::path csv = dir / "gas.csv";
    RunResult r = run("--data-dir " + quoted(dir) + " bench-gas --blocks 6 --out " +
                      quoted(csv));
    check(r.exit_code == 0, "bench-gas runs", &r);
    std::ifstream in(csv);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    check(contains(text, "block,entries,gas_used,block_bytes,gas_target_pct"),
          "bench-gas header");
    check(contains(text, "# spearman_gas_vs_bytes"), "bench-gas correlation meta line");
    fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cout << "usage: cli_tests <path-to-medvault-cli>\n";
        return 64;
    }
    g_cli = argv[1];

    test_scenario_equivalence();
    test_persistent_session();
    test_error_paths();
    test_custom_schedule();
    test_tamper_detection();
    test_bench_reports();

    if (g_failures == 0) {
        std::cout << "cli: all checks passed\n";
        return 0;
    }
    std::cout << "cli: " << g_failures << " checks failed\n";
    return 1;
}
