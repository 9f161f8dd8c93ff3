#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "recounter/machine.hpp"
#include "recounter/oracle.hpp"
#include "recounter/parse.hpp"
#include "support/generators.hpp"

using namespace recounter;

namespace {

CounterMachine make(const std::string& rules,
                    WindowMode wm = WindowMode::Paper,
                    RulesetMode mode = RulesetMode::Plain) {
    CompileOptions opts;
    opts.window_mode = wm;
    return compile(parse_ruleset(rules, mode), opts);
}

bool matches(const CounterMachine& m, std::string_view w) {
    ScanState st = new_scan_state(m);
    machine_run(m, st, w);
    return st.latched[0] != 0;
}

std::vector<std::string> all_words(std::string_view alphabet, size_t max_len) {
    std::vector<std::string> out;
    out.emplace_back();
    size_t begin = 0;
    for (size_t len = 1; len <= max_len; ++len) {
        size_t end = out.size();
        for (size_t i = begin; i < end; ++i)
            for (char c : alphabet) out.push_back(out[i] + c);
        begin = end;
    }
    return out;
}

}  // namespace

TEST_SUITE("machine") {

TEST_CASE("two-word rule fires on the trailing word") {
    CounterMachine m = make(".*ab.*cd.*\n");
    REQUIRE(m.units.size() == 1);
    CHECK(m.units[0].mode == UnitMode::PlainThreshold);
    CHECK(m.units[0].lower == 2);

    ScanState st = new_scan_state(m);
    step_byte(m, st, 'a');
    step_byte(m, st, 'b');
    CHECK(st.units[0].armed);
    CHECK(st.units[0].counter == 0);
    step_byte(m, st, 'c');
    CHECK(st.units[0].counter == 1);
    CHECK(st.latched[0] == 0);
    OutputVector v = step(m, st, 'd');
    CHECK(st.units[0].counter == 2);
    CHECK(st.latched[0] == 1);
    REQUIRE(v.bits.size() == 2);
    CHECK(v.bits[0] == 1);
    CHECK(v.bits[1] == 1);
    CHECK(v.any());
}

TEST_CASE("chain words must sit past the prefix") {
    CounterMachine m = make(".*ab.*b.*\n");
    CHECK(!matches(m, "ab"));   // the prefix consumed its 'b'
    CHECK(matches(m, "abb"));
    CHECK(!matches(m, "ba"));

    CounterMachine m2 = make(".*ab.*ba.*\n");
    CHECK(!matches(m2, "aba"));  // "ba" overlaps the prefix match
    CHECK(matches(m2, "abba"));
    CHECK(matches(m2, "abxba"));
}

TEST_CASE("chain stages cascade in order") {
    CounterMachine m = make(".*ab.*cd.*ef.*\n");
    CHECK(matches(m, "abcdef"));
    CHECK(matches(m, "zabzcdzefz"));
    CHECK(!matches(m, "abefcd"));    // out of order
    CHECK(!matches(m, "cdabef"));
    CHECK(!matches(m, "abcdf"));

    ScanResult r = scan(m, "abcdef");
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].rule == 0);
    CHECK(r.events[0].stage == 0);
    CHECK(r.events[0].offset == 4);
    CHECK(r.events[0].kind == EventKind::StageAdvance);
    CHECK(r.events[1].stage == 1);
    CHECK(r.events[1].offset == 6);
    CHECK(r.events[1].kind == EventKind::RuleMatch);
}

TEST_CASE("stages report once") {
    CounterMachine m = make(".*ab.*cd.*ef.*\n");
    ScanResult r = scan(m, "abcdcdxx");
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].stage == 0);
    CHECK(r.events[0].offset == 4);
    CHECK(!r.final_vector.any());
}

TEST_CASE("gap window accepts exactly k..m clean stretches") {
    CounterMachine m = make(".*ab[^z]{1,3}cd.*\n");
    REQUIRE(m.units.size() == 1);
    CHECK(m.units[0].mode == UnitMode::GapWindowPaper);
    CHECK(m.units[0].lower == 3);
    CHECK(m.units[0].upper == 5);
    CHECK(m.units[0].expiry == 6);

    CHECK(!matches(m, "abcd"));       // gap length 0
    CHECK(matches(m, "abxcd"));       // 1
    CHECK(matches(m, "abxxcd"));      // 2
    CHECK(matches(m, "abxxxcd"));     // 3
    CHECK(!matches(m, "abxxxxcd"));   // 4: past the bound
    CHECK(!matches(m, "abzcd"));      // forbidden byte in the gap
    CHECK(!matches(m, "abzxcd"));
    CHECK(!matches(m, "abxzcd"));
}

TEST_CASE("forbidden byte inside the word region is harmless") {
    CounterMachine m = make(".*ab[^c]{1,2}cd.*\n");
    CHECK(matches(m, "abxcd"));    // 'c' only inside "cd" itself
    CHECK(!matches(m, "abccd"));   // gap byte is 'c'
    CHECK(matches(m, "abxxcd"));
}

TEST_CASE("forbidden byte at the arm step is before the gap") {
    // the prefix's own last byte must not poison the window
    CounterMachine m = make(".*az[^z]{1,2}cd.*\n");
    CHECK(matches(m, "azxcd"));
    CHECK(!matches(m, "azzcd"));
}

TEST_CASE("paper windows re-arm after expiry") {
    CounterMachine m = make(".*ab[^z]{1,2}cd.*\n");
    // first activation expires untouched, the second lands
    CHECK(matches(m, "abxxxxxxabxcd"));
    ScanResult r = scan(m, "abxxxxxxabxcd");
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].offset == 13);
}

TEST_CASE("paper windows drop activations while busy") {
    CounterMachine paper = make(".*ab[^z]{1,2}cd.*\n", WindowMode::Paper);
    CounterMachine exact = make(".*ab[^z]{1,2}cd.*\n", WindowMode::Exact);
    // ab at 4 needs the window the ab at 2 still holds
    CHECK(!matches(paper, "ababxcd"));
    CHECK(matches(exact, "ababxcd"));
    RuleOracle oracle(parse_ruleset(".*ab[^z]{1,2}cd.*\n").rules[0]);
    CHECK(oracle.verdict("ababxcd").matched);
}

TEST_CASE("known divergence stream") {
    CounterMachine paper = make(".*a[^z]{1,1}bc.*\n", WindowMode::Paper);
    CounterMachine exact = make(".*a[^z]{1,1}bc.*\n", WindowMode::Exact);
    CHECK(!matches(paper, "azaxbc"));
    CHECK(matches(exact, "azaxbc"));
    ScanResult r = scan(exact, "azaxbc");
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].offset == 6);
    CHECK(r.events[0].kind == EventKind::RuleMatch);
}

TEST_CASE("exact windows agree with the oracle exhaustively") {
    Ruleset rs = parse_ruleset(".*a[^z]{0,3}bc.*\n");
    CounterMachine exact = make(".*a[^z]{0,3}bc.*\n", WindowMode::Exact);
    CounterMachine paper = make(".*a[^z]{0,3}bc.*\n", WindowMode::Paper);
    RuleOracle oracle(rs.rules[0]);
    for (const std::string& w : all_words("abz", 9)) {
        bool o = oracle.verdict(w).matched;
        CAPTURE(w);
        REQUIRE(matches(exact, w) == o);
        if (matches(paper, w)) REQUIRE(o);  // paper misses, never invents
    }
}

TEST_CASE("empty prefix arms before the first byte") {
    CounterMachine m = make(".*[^z]{0,2}ab.*\n");
    CHECK(matches(m, "ab"));     // gap of length 0 at the very start
    CHECK(matches(m, "xab"));
    CHECK(matches(m, "xxab"));

    // an always-armed paper counter holds position 0; later gap starts
    // need the exact tracker
    CounterMachine e = make(".*[^z]{0,2}ab.*\n", WindowMode::Exact);
    CHECK(matches(e, "zab"));
    CHECK(matches(e, "zxab"));
    CHECK(matches(e, "xxxab"));
    CHECK(!matches(e, "zzzb"));

    // a starred prefix matches the empty string as well
    CounterMachine m2 = make(".*a*.*bb.*\n");
    CHECK(matches(m2, "bb"));
}

TEST_CASE("counted prefix runs gate the chain") {
    CounterMachine exact = make(".*a{3}b.*cd.*\n", WindowMode::Exact,
                                RulesetMode::DoubleCounting);
    CHECK(matches(exact, "aaabxcd"));
    CHECK(matches(exact, "aaaabcd"));   // the run may start one byte in
    CHECK(matches(exact, "aaaabxcd"));
    CHECK(!matches(exact, "aabxcd"));   // only two a's
    CHECK(!matches(exact, "aaacd"));    // no b
    CHECK(!matches(exact, "aaaxbcd"));  // run broken before the b

    // paper counters hold the earliest activation; a run one byte longer
    // than the window expires it before the segment byte arrives
    CounterMachine paper = make(".*a{3}b.*cd.*\n", WindowMode::Paper,
                                RulesetMode::DoubleCounting);
    CHECK(matches(paper, "aaabxcd"));
    CHECK(!matches(paper, "aaaabxcd"));
}

TEST_CASE("counted runs with ranges agree with the oracle") {
    const char* pat = ".*a{2,3}b[^z]{1,2}cd.*\n";
    Ruleset rs = parse_ruleset(pat, RulesetMode::DoubleCounting);
    CounterMachine exact =
        make(pat, WindowMode::Exact, RulesetMode::DoubleCounting);
    RuleOracle oracle(rs.rules[0]);
    gen::Rng rng(23);
    for (int i = 0; i < 4000; ++i) {
        std::string w = gen::word(rng, "abcdz", 14);
        CAPTURE(w);
        REQUIRE(matches(exact, w) == oracle.verdict(w).matched);
    }
}

TEST_CASE("random rules against the oracle") {
    gen::Rng rng(29);
    for (int i = 0; i < 60; ++i) {
        std::string pat;
        RulesetMode mode = RulesetMode::Plain;
        switch (i % 3) {
            case 0: pat = gen::plain_rule(rng, "abc"); break;
            case 1: pat = gen::gap_rule(rng, "abc"); break;
            default:
                pat = gen::dc_rule(rng, "abc");
                mode = RulesetMode::DoubleCounting;
                break;
        }
        CAPTURE(pat);
        Ruleset rs = parse_ruleset(pat + "\n", mode);
        CounterMachine exact = make(pat + "\n", WindowMode::Exact, mode);
        CounterMachine paper = make(pat + "\n", WindowMode::Paper, mode);
        RuleOracle oracle(rs.rules[0]);
        ScanState se = new_scan_state(exact);
        ScanState sp = new_scan_state(paper);
        for (int j = 0; j < 400; ++j) {
            std::string w = gen::word(rng, "abcz", 18);
            CAPTURE(w);
            bool o = oracle.verdict(w).matched;
            machine_run(exact, se, w);
            REQUIRE(bool(se.latched[0]) == o);
            machine_run(paper, sp, w);
            if (sp.latched[0]) REQUIRE(o);
        }
    }
}

TEST_CASE("rules latch independently") {
    CounterMachine m = make(".*ab.*cd.*\n.*ef.*gh.*\n");
    ScanState st = new_scan_state(m);
    machine_run(m, st, "efgh");
    CHECK(st.latched[0] == 0);
    CHECK(st.latched[1] == 1);
    OutputVector v = output_vector(m, st);
    REQUIRE(v.bits.size() == 3);
    CHECK(v.bits[0] == 0);
    CHECK(v.bits[1] == 1);
    CHECK(v.bits[2] == 1);

    machine_run(m, st, "abefcdgh");
    CHECK(st.latched[0] == 1);
    CHECK(st.latched[1] == 1);
}

TEST_CASE("outputs are monotone within a scan") {
    gen::Rng rng(41);
    CounterMachine m = make(".*ab[^z]{1,3}cd.*\n.*a.*bb.*\n");
    for (int i = 0; i < 200; ++i) {
        std::string w = gen::word(rng, "abcdz", 40);
        ScanState st = new_scan_state(m);
        OutputVector prev = output_vector(m, st);
        for (char c : w) {
            OutputVector cur = step(m, st, uint8_t(c));
            for (size_t b = 0; b < cur.bits.size(); ++b)
                REQUIRE(cur.bits[b] >= prev.bits[b]);
            prev = cur;
        }
    }
}

TEST_CASE("chunk boundaries never change results") {
    gen::Rng rng(43);
    const char* rules = ".*ab[^z]{1,3}cd.*\n.*ef.*gh.*ab.*\n";
    for (WindowMode wm : {WindowMode::Paper, WindowMode::Exact}) {
        CounterMachine m = make(rules, wm);
        for (int i = 0; i < 100; ++i) {
            std::string w = gen::word(rng, "abcdefghz", 60);
            Scanner whole(m);
            whole.feed(w);

            Scanner pieces(m);
            size_t at = 0;
            while (at < w.size()) {
                size_t n = 1 + gen::pick(rng, w.size() - at);
                pieces.feed(std::string_view(w).substr(at, n));
                at += n;
            }
            pieces.feed("");

            CHECK(whole.vector() == pieces.vector());
            REQUIRE(whole.events().size() == pieces.events().size());
            for (size_t e = 0; e < whole.events().size(); ++e) {
                CHECK(whole.events()[e].rule == pieces.events()[e].rule);
                CHECK(whole.events()[e].stage == pieces.events()[e].stage);
                CHECK(whole.events()[e].offset == pieces.events()[e].offset);
                CHECK(whole.events()[e].kind == pieces.events()[e].kind);
            }
        }
    }
}

TEST_CASE("scan state footprint is fixed") {
    CounterMachine m = make(".*ab[^z]{1,3}cd.*\n", WindowMode::Exact);
    ScanState st = new_scan_state(m);
    size_t before = st.payload_bytes();
    gen::Rng rng(47);
    for (int i = 0; i < 5000; ++i) step_byte(m, st, uint8_t(rng() & 0xff));
    CHECK(st.payload_bytes() == before);
}

TEST_CASE("reset clears everything") {
    CounterMachine m = make(".*ab.*cd.*\n");
    ScanState st = new_scan_state(m);
    machine_run(m, st, "abcd");
    CHECK(st.latched[0] == 1);
    reset(m, st);
    CHECK(st.latched[0] == 0);
    CHECK(st.position == 0);
    CHECK(!st.units[0].armed);
    CHECK(!output_vector(m, st).any());
    machine_run(m, st, "abcd");
    CHECK(st.latched[0] == 1);
}

TEST_CASE("one machine serves many threads") {
    CounterMachine m = make(".*ab[^z]{1,3}cd.*\n.*ef.*gh.*\n",
                            WindowMode::Exact);
    std::vector<std::string> words;
    std::vector<uint8_t> expected;
    gen::Rng rng(53);
    for (int i = 0; i < 400; ++i) {
        words.push_back(gen::word(rng, "abcdefghz", 30));
        ScanState st = new_scan_state(m);
        machine_run(m, st, words.back());
        expected.push_back(output_vector(m, st).any() ? 1 : 0);
    }
    std::vector<uint8_t> got(words.size(), 0xff);
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&, t] {
            ScanState st = new_scan_state(m);
            for (size_t i = size_t(t); i < words.size(); i += 8) {
                machine_run(m, st, words[i]);
                got[i] = output_vector(m, st).any() ? 1 : 0;
            }
        });
    }
    for (auto& th : pool) th.join();
    CHECK(got == expected);
}

}  // TEST_SUITE
