#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "recounter/analyzer.hpp"
#include "recounter/errors.hpp"
#include "recounter/machine.hpp"
#include "recounter/machine_io.hpp"
#include "recounter/oracle.hpp"
#include "recounter/parse.hpp"

using namespace recounter;

namespace {

constexpr size_t kChunk = 64 * 1024;

std::string read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "'");
    std::string out;
    char buf[kChunk];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0)
        out.append(buf, got);
    std::fclose(f);
    return out;
}

void write_file(const std::string& path, std::string_view text) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    size_t written = std::fwrite(text.data(), 1, text.size(), f);
    int rc = std::fclose(f);
    if (written != text.size() || rc != 0)
        throw IoError("short write to '" + path + "'");
}

uint32_t resolve_cap(const std::optional<uint32_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("RECOUNTER_STATE_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0 && v <= UINT32_MAX)
            return uint32_t(v);
        throw Error("RECOUNTER_STATE_CAP is not a positive integer");
    }
    return kDefaultStateCap;
}

std::string event_json(const MatchEvent& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "{\"rule\":%u,\"stage\":%u,\"offset\":%llu,\"kind\":\"%s\"}",
                  e.rule, e.stage, (unsigned long long)e.offset,
                  e.kind == EventKind::RuleMatch ? "rule_match"
                                                 : "stage_advance");
    return buf;
}

std::string summary_json(uint64_t bytes, const OutputVector& v) {
    std::string s = "{\"bytes\":" + std::to_string(bytes) + ",\"vector\":\"";
    for (uint8_t b : v.bits) s += b ? '1' : '0';
    s += "\",\"matched\":[";
    bool first = true;
    for (size_t r = 0; r + 1 < v.bits.size(); ++r) {
        if (!v.bits[r]) continue;
        if (!first) s += ',';
        first = false;
        s += std::to_string(r);
    }
    s += "]}";
    return s;
}

struct CompileCfg {
    std::string rules, out;
    std::string mode, window = "paper";
    std::optional<uint32_t> cap;
};

int run_compile(const CompileCfg& cfg) {
    std::optional<RulesetMode> mode;
    if (cfg.mode == "plain") mode = RulesetMode::Plain;
    else if (cfg.mode == "double_counting") mode = RulesetMode::DoubleCounting;
    Ruleset rs = parse_ruleset(read_file(cfg.rules), mode);
    CompileOptions opts;
    opts.window_mode =
        cfg.window == "exact" ? WindowMode::Exact : WindowMode::Paper;
    opts.state_cap = resolve_cap(cfg.cap);
    CounterMachine m = compile(rs, opts);
    save_machine(m, cfg.out);
    SizeReport rep = size_report(m);
    std::string s = "{\"detector_states\":" +
                    std::to_string(rep.detector_states) +
                    ",\"transition_bits\":" +
                    std::to_string(rep.transition_bits) +
                    ",\"output_bits\":" + std::to_string(rep.output_bits) +
                    ",\"counter_bits\":" + std::to_string(rep.counter_bits) +
                    ",\"triggers\":" + std::to_string(rep.trigger_count) +
                    ",\"gates\":" + std::to_string(rep.gate_count) + "}";
    std::printf("%s\n", s.c_str());
    return 0;
}

struct ScanCfg {
    std::string machine;
    std::vector<std::string> inputs;
    bool fail_on_match = false;
    bool quiet = false;
    uint32_t jobs = 1;
};

// Scans one stream; returns matched flag, appends records to `out`.
bool scan_stream(const CounterMachine& m, std::FILE* f, bool quiet,
                 std::string& out) {
    Scanner sc(m);
    size_t printed = 0;
    std::vector<char> buf(kChunk);
    size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), f)) > 0) {
        sc.feed(std::string_view(buf.data(), got));
        if (!quiet) {
            for (; printed < sc.events().size(); ++printed)
                out += event_json(sc.events()[printed]) + "\n";
        }
    }
    OutputVector v = sc.vector();
    if (!quiet) out += summary_json(sc.state().position, v) + "\n";
    return v.any();
}

int run_scan(const ScanCfg& cfg) {
    CounterMachine m = load_machine(cfg.machine);
    bool matched = false;

    if (cfg.inputs.empty()) {
        std::string out;
        matched = scan_stream(m, stdin, cfg.quiet, out);
        std::fwrite(out.data(), 1, out.size(), stdout);
    } else if (cfg.jobs <= 1 || cfg.inputs.size() == 1) {
        for (const auto& path : cfg.inputs) {
            std::FILE* f = std::fopen(path.c_str(), "rb");
            if (!f) throw IoError("cannot open '" + path + "'");
            std::string out;
            matched |= scan_stream(m, f, cfg.quiet, out);
            std::fclose(f);
            std::fwrite(out.data(), 1, out.size(), stdout);
        }
    } else {
        // One worker per job; per-file output buffered, printed in input
        // order so concurrency never reorders records.
        std::vector<std::string> outs(cfg.inputs.size());
        std::vector<uint8_t> hits(cfg.inputs.size(), 0);
        std::vector<std::string> errors(cfg.inputs.size());
        std::atomic<size_t> cursor{0};
        auto worker = [&] {
            for (size_t i; (i = cursor.fetch_add(1)) < cfg.inputs.size();) {
                std::FILE* f = std::fopen(cfg.inputs[i].c_str(), "rb");
                if (!f) {
                    errors[i] = "cannot open '" + cfg.inputs[i] + "'";
                    continue;
                }
                hits[i] = scan_stream(m, f, cfg.quiet, outs[i]) ? 1 : 0;
                std::fclose(f);
            }
        };
        size_t n_threads = std::min<size_t>(cfg.jobs, cfg.inputs.size());
        std::vector<std::thread> pool;
        for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (!e.empty()) throw IoError(e);
        for (size_t i = 0; i < outs.size(); ++i) {
            std::fwrite(outs[i].data(), 1, outs[i].size(), stdout);
            matched |= hits[i] != 0;
        }
    }
    if (matched && cfg.fail_on_match) return 1;
    return 0;
}

struct VerifyCfg {
    std::string rules;
    std::string alphabet = "abcd";
    uint32_t max_len = 10;
    uint64_t random_count = 100000;
    uint64_t seed = 1;
    std::optional<uint32_t> cap;
};

int run_verify(const VerifyCfg& cfg) {
    Ruleset rs = parse_ruleset(read_file(cfg.rules), std::nullopt);
    uint32_t cap = resolve_cap(cfg.cap);
    CompileOptions paper_opts{WindowMode::Paper, cap};
    CompileOptions exact_opts{WindowMode::Exact, cap};
    CounterMachine paper = compile(rs, paper_opts);
    CounterMachine exact = compile(rs, exact_opts);

    std::vector<RuleOracle> oracles;
    std::vector<Dfa> classical;
    for (const auto& rule : rs.rules) {
        oracles.emplace_back(rule);
        classical.push_back(minimize(subset_construct(
            thompson_nfa(parse_pattern(recompose_pattern(rule))), cap)));
    }

    ScanState stp = new_scan_state(paper);
    ScanState ste = new_scan_state(exact);
    uint64_t machine_dis = 0, classical_dis = 0, paper_div = 0;

    auto check = [&](std::string_view w) {
        machine_run(exact, ste, w);
        machine_run(paper, stp, w);
        for (uint32_t r = 0; r < rs.n; ++r) {
            bool o = oracles[r].verdict(w).matched;
            bool e = ste.latched[r] != 0;
            bool p = stp.latched[r] != 0;
            bool c = dfa_accepts(classical[r], w);
            if (e != o) ++machine_dis;
            if (c != o) ++classical_dis;
            if (p && !o) ++machine_dis;       // an unsound fire is a failure
            else if (!p && o) ++paper_div;    // busy-window miss, reported
        }
    };

    uint64_t enumerated = 0;
    {
        WordEnumerator en(cfg.alphabet, cfg.max_len);
        std::string w;
        while (en.next(w)) {
            check(w);
            ++enumerated;
        }
    }
    std::mt19937_64 rng(cfg.seed);
    uint32_t max_random_len = std::max<uint32_t>(16, cfg.max_len * 4);
    std::string w;
    for (uint64_t i = 0; i < cfg.random_count; ++i) {
        size_t len = rng() % (max_random_len + 1);
        w.resize(len);
        for (auto& ch : w) ch = cfg.alphabet[rng() % cfg.alphabet.size()];
        check(w);
    }

    std::printf("enumerated %llu words over \"%s\" up to length %u\n",
                (unsigned long long)enumerated, cfg.alphabet.c_str(),
                cfg.max_len);
    std::printf("random %llu words, seed %llu, max length %u\n",
                (unsigned long long)cfg.random_count,
                (unsigned long long)cfg.seed, max_random_len);
    std::printf("machine vs oracle: %llu disagreements\n",
                (unsigned long long)machine_dis);
    std::printf("classical vs oracle: %llu disagreements\n",
                (unsigned long long)classical_dis);
    std::printf("paper-mode gap divergences: %llu (soundness preserved)\n",
                (unsigned long long)paper_div);
    return machine_dis == 0 && classical_dis == 0 ? 0 : 1;
}

struct BenchCfg {
    std::string machine;
    std::string input;
    std::optional<uint32_t> curve;
    std::optional<uint32_t> cap;
};

int run_bench(const BenchCfg& cfg) {
    CounterMachine m = load_machine(cfg.machine);
    if (cfg.input.empty() && !cfg.curve)
        throw Error("bench needs -i <input> or --curve N");
    if (!cfg.input.empty()) {
        std::string data = read_file(cfg.input);
        ScanState st = new_scan_state(m);
        auto t0 = std::chrono::steady_clock::now();
        machine_run(m, st, data);
        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        double rate = secs > 0 ? double(data.size()) / secs : 0.0;
        std::printf(
            "{\"bytes\":%llu,\"seconds\":%.6f,\"bytes_per_second\":%.0f,"
            "\"scan_state_bytes\":%llu}\n",
            (unsigned long long)data.size(), secs, rate,
            (unsigned long long)st.payload_bytes());
    }
    if (cfg.curve) {
        BlowupCurve curve = blowup_curve(*cfg.curve, resolve_cap(cfg.cap));
        std::fputs(curve.to_csv().c_str(), stdout);
    }
    return 0;
}

struct GraphCfg {
    std::string machine, out;
};

int run_graph(const GraphCfg& cfg) {
    CounterMachine m = load_machine(cfg.machine);
    write_file(cfg.out, export_dot(m));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "recounter: compile .*word.*word.* rulesets into a detector DFA with "
        "counters, scan streams, and measure the classical blow-up"};
    app.require_subcommand(1);

    CompileCfg ccfg;
    auto* c = app.add_subcommand(
        "compile", "Compile a ruleset file into a machine image");
    c->add_option("-r,--rules", ccfg.rules, "ruleset file, one pattern per line")
        ->required();
    c->add_option("-o,--out", ccfg.out, "output machine file")->required();
    c->add_option("--mode", ccfg.mode,
                  "ruleset mode (overrides the file's mode= line)")
        ->check(CLI::IsMember({"plain", "double_counting"}));
    c->add_option("--window", ccfg.window,
                  "window tracking: paper (one counter, may drop overlapping "
                  "windows) or exact (bit history)")
        ->check(CLI::IsMember({"paper", "exact"}));
    c->add_option("--state-cap", ccfg.cap,
                  "detector state cap (default RECOUNTER_STATE_CAP or 1e6)");

    ScanCfg scfg;
    auto* s = app.add_subcommand(
        "scan",
        "Scan input against a compiled machine; prints one JSON record per "
        "stage/rule event plus a summary line");
    s->add_option("-m,--machine", scfg.machine, "machine file")->required();
    s->add_option("-i,--input", scfg.inputs,
                  "input file(s); stdin when omitted");
    s->add_flag("--fail-on-match", scfg.fail_on_match,
                "exit 1 when any rule matched");
    s->add_flag("--quiet", scfg.quiet,
                "print nothing; use with --fail-on-match for scripting");
    s->add_option("--jobs", scfg.jobs,
                  "scan multiple input files concurrently");

    VerifyCfg vcfg;
    auto* v = app.add_subcommand(
        "verify",
        "Differential check: machine vs oracle vs single-rule DFAs over "
        "enumerated and random words; exit 1 on any disagreement");
    v->add_option("-r,--rules", vcfg.rules, "ruleset file")->required();
    v->add_option("--alphabet", vcfg.alphabet, "enumeration alphabet");
    v->add_option("--max-len", vcfg.max_len, "exhaustive length bound");
    v->add_option("--random", vcfg.random_count, "random word count");
    v->add_option("--seed", vcfg.seed, "random seed");
    v->add_option("--state-cap", vcfg.cap, "detector state cap");

    BenchCfg bcfg;
    auto* b = app.add_subcommand(
        "bench", "Throughput over an input file and/or the blow-up curve CSV");
    b->add_option("-m,--machine", bcfg.machine, "machine file")->required();
    b->add_option("-i,--input", bcfg.input, "input file");
    b->add_option("--curve", bcfg.curve,
                  "emit n,classical_states,block1_states,counter_bits CSV for "
                  "1..N paired-word rules");
    b->add_option("--state-cap", bcfg.cap, "classical determinization cap");

    GraphCfg gcfg;
    auto* g = app.add_subcommand("graph",
                                 "Export the machine as deterministic DOT");
    g->add_option("-m,--machine", gcfg.machine, "machine file")->required();
    g->add_option("-o,--out", gcfg.out, "output .dot path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c)) return run_compile(ccfg);
        if (app.got_subcommand(s)) return run_scan(scfg);
        if (app.got_subcommand(v)) return run_verify(vcfg);
        if (app.got_subcommand(b)) return run_bench(bcfg);
        if (app.got_subcommand(g)) return run_graph(gcfg);
    } catch (const ResourceLimitError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
