#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "recounter/decompose.hpp"
#include "recounter/detector.hpp"
#include "recounter/oracle.hpp"
#include "recounter/parse.hpp"
#include "support/generators.hpp"

using namespace recounter;

namespace {

uint32_t find_channel(const AnnotatedDfa& d, uint32_t rule, DetectorKind kind,
                      uint32_t index = 0) {
    for (uint32_t c = 0; c < d.channel_count; ++c) {
        const ChannelInfo& ci = d.directory[c];
        if (ci.rule == rule && ci.kind == kind && ci.index == index) return c;
    }
    FAIL("channel not found");
    return 0;
}

// Channel bit after consuming p bytes of `word` (p == 0 reads the start row).
bool bit_at(const AnnotatedDfa& d, const AnnotatedRunResult& r, size_t p,
            uint32_t ch) {
    if (p == 0) return d.output_bit(d.dfa.start, ch);
    const auto& row = r.rows[p - 1];
    return (row[ch >> 6] >> (ch & 63)) & 1u;
}

Ruleset ruleset_of(const std::string& text,
                   RulesetMode mode = RulesetMode::Plain) {
    return parse_ruleset(text, mode);
}

bool same_annotated(const AnnotatedDfa& a, const AnnotatedDfa& b) {
    if (a.dfa.state_count != b.dfa.state_count || a.dfa.start != b.dfa.start ||
        a.dfa.table != b.dfa.table || a.dfa.accept != b.dfa.accept)
        return false;
    if (a.channel_count != b.channel_count ||
        a.output_stride != b.output_stride || a.outputs != b.outputs)
        return false;
    if (a.directory.size() != b.directory.size()) return false;
    for (size_t i = 0; i < a.directory.size(); ++i)
        if (a.directory[i].rule != b.directory[i].rule ||
            a.directory[i].kind != b.directory[i].kind ||
            a.directory[i].index != b.directory[i].index)
            return false;
    return true;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("keyword automaton matches with suffix sharing") {
    AnnotatedDfa ac = aho_corasick({"he", "she", "his", "hers"});
    // trie: root h he her hers s sh she hi his
    CHECK(ac.dfa.state_count == 10);
    CHECK(ac.channel_count == 4);

    AnnotatedRunResult r = run_dfa(ac, "ushers");
    // "she" and its suffix "he" both end at position 4, "hers" at 6
    CHECK(bit_at(ac, r, 4, 1));
    CHECK(bit_at(ac, r, 4, 0));
    CHECK(bit_at(ac, r, 6, 3));
    for (size_t p = 0; p <= 6; ++p) {
        CHECK(!bit_at(ac, r, p, 2));            // no "his"
        if (p != 4) CHECK(!bit_at(ac, r, p, 1));
        if (p != 4) CHECK(!bit_at(ac, r, p, 0));
        if (p != 6) CHECK(!bit_at(ac, r, p, 3));
    }
}

TEST_CASE("keyword automaton stays within the trie bound") {
    AnnotatedDfa ac = aho_corasick({"cd", "gh"});
    CHECK(ac.dfa.state_count == 5);

    gen::Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::string> words;
        size_t total = 0;
        for (size_t k = 0, n = 1 + gen::pick(rng, 4); k < n; ++k) {
            words.push_back(gen::word(rng, "abc", 5));
            if (words.back().empty()) words.back() = "a";
            total += words.back().size();
        }
        AnnotatedDfa a = aho_corasick(words);
        CHECK(a.dfa.state_count <= total + 1);
    }
}

TEST_CASE("duplicate keywords share a state and both fire") {
    AnnotatedDfa ac = aho_corasick({"ab", "ab", "b"});
    AnnotatedRunResult r = run_dfa(ac, "zab");
    CHECK(bit_at(ac, r, 3, 0));
    CHECK(bit_at(ac, r, 3, 1));
    CHECK(bit_at(ac, r, 3, 2));  // suffix "b"
    CHECK(!bit_at(ac, r, 2, 0));
}

TEST_CASE("keyword automaton agrees with a direct scan") {
    gen::Rng rng(13);
    for (int i = 0; i < 150; ++i) {
        std::vector<std::string> words;
        for (size_t k = 0, n = 1 + gen::pick(rng, 3); k < n; ++k) {
            std::string w = gen::word(rng, "ab", 4);
            words.push_back(w.empty() ? "b" : w);
        }
        AnnotatedDfa ac = aho_corasick(words);
        std::string text = gen::word(rng, "ab", 20);
        AnnotatedRunResult r = run_dfa(ac, text);
        for (size_t p = 0; p <= text.size(); ++p) {
            for (size_t wi = 0; wi < words.size(); ++wi) {
                const std::string& w = words[wi];
                bool expect = p >= w.size() &&
                              text.compare(p - w.size(), w.size(), w) == 0;
                CAPTURE(text);
                CAPTURE(w);
                CAPTURE(p);
                REQUIRE(bit_at(ac, r, p, uint32_t(wi)) == expect);
            }
        }
    }
}

TEST_CASE("empty keywords are rejected") {
    CHECK_THROWS_AS(aho_corasick({"ab", ""}), Error);
}

TEST_CASE("tagged determinization unions accept tags") {
    Nfa n;
    uint32_t s0 = n.add_state();
    uint32_t s1 = n.add_state();
    uint32_t s2 = n.add_state();
    n.start = s0;
    ByteSet ba, bb;
    ba.set('a');
    bb.set('b');
    n.add_edge(s0, s1, ba);
    n.add_edge(s0, s2, bb);
    n.add_epsilon(s1, s2);
    std::vector<TaggedAccept> tags = {{s1, 0}, {s2, 1}};
    AnnotatedDfa d = determinize_tagged(
        n, tags, 2, {{0, DetectorKind::PrefixEnd, 0},
                     {1, DetectorKind::PrefixEnd, 0}});
    // 'a' reaches s1 and via epsilon s2: both channels; 'b' only s2
    AnnotatedRunResult ra = run_dfa(d, "a");
    CHECK(bit_at(d, ra, 1, 0));
    CHECK(bit_at(d, ra, 1, 1));
    CHECK(ra.accept);
    AnnotatedRunResult rb = run_dfa(d, "b");
    CHECK(!bit_at(d, rb, 1, 0));
    CHECK(bit_at(d, rb, 1, 1));
    AnnotatedRunResult rc = run_dfa(d, "c");
    CHECK(!rc.accept);
}

TEST_CASE("two-word rule wiring") {
    Ruleset rs = ruleset_of(".*ab.*cd.*\n");
    AnnotatedDfa d = build_detector(rs);
    CHECK(d.dfa.state_count == 5);
    CHECK(d.channel_count == 2);
    uint32_t pe = find_channel(d, 0, DetectorKind::PrefixEnd);
    uint32_t we = find_channel(d, 0, DetectorKind::ChainWordEnd, 0);

    std::string w = "cdabzcdab";
    AnnotatedRunResult r = run_dfa(d, w);
    for (size_t p = 0; p <= w.size(); ++p) {
        bool ab = p >= 2 && w.compare(p - 2, 2, "ab") == 0;
        bool cd = p >= 2 && w.compare(p - 2, 2, "cd") == 0;
        CHECK(bit_at(d, r, p, pe) == ab);
        CHECK(bit_at(d, r, p, we) == cd);
    }
}

TEST_CASE("prefix channel follows the prefix language") {
    Ruleset rs = ruleset_of(".*a(b|c)d*e.*xy.*\n");
    AnnotatedDfa d = build_detector(rs);
    uint32_t pe = find_channel(d, 0, DetectorKind::PrefixEnd);

    RuleOracle oracle(rs.rules[0]);
    gen::Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        std::string w = gen::word(rng, "abcdexy", 14);
        AnnotatedRunResult r = run_dfa(d, w);
        std::vector<uint64_t> ends = oracle.prefix_end_positions(w);
        for (size_t p = 0; p <= w.size(); ++p) {
            bool expect = std::find(ends.begin(), ends.end(), uint64_t(p)) !=
                          ends.end();
            CAPTURE(w);
            CAPTURE(p);
            REQUIRE(bit_at(d, r, p, pe) == expect);
        }
    }
}

TEST_CASE("empty prefix tags every position") {
    Ruleset rs = ruleset_of(".*[^z]{1,2}ab.*\n");
    AnnotatedDfa d = build_detector(rs);
    uint32_t pe = find_channel(d, 0, DetectorKind::PrefixEnd);
    uint32_t gf = find_channel(d, 0, DetectorKind::GapForbidden);

    std::string w = "azbzz";
    AnnotatedRunResult r = run_dfa(d, w);
    for (size_t p = 0; p <= w.size(); ++p)
        CHECK(bit_at(d, r, p, pe));
    for (size_t p = 1; p <= w.size(); ++p)
        CHECK(bit_at(d, r, p, gf) == (w[p - 1] == 'z'));
    CHECK(!bit_at(d, r, 0, gf));
}

TEST_CASE("gap rule carries a forbidden-byte channel") {
    Ruleset rs = ruleset_of(".*ab[^z]{1,3}cd.*\n");
    AnnotatedDfa d = build_detector(rs);
    CHECK(d.channel_count == 3);
    uint32_t gf = find_channel(d, 0, DetectorKind::GapForbidden);
    uint32_t we = find_channel(d, 0, DetectorKind::ChainWordEnd, 0);

    std::string w = "zcdz";
    AnnotatedRunResult r = run_dfa(d, w);
    CHECK(bit_at(d, r, 1, gf));
    CHECK(!bit_at(d, r, 2, gf));
    CHECK(bit_at(d, r, 3, we));
    CHECK(bit_at(d, r, 4, gf));
}

TEST_CASE("counted-run rule emits segment channels") {
    Ruleset rs = ruleset_of(".*a{2,3}b.*cd.*\n", RulesetMode::DoubleCounting);
    AnnotatedDfa d = build_detector(rs);
    // segment 0 is empty (before the window), segment 1 is "b"
    uint32_t s0 = find_channel(d, 0, DetectorKind::SegmentEnd, 0);
    uint32_t s1 = find_channel(d, 0, DetectorKind::SegmentEnd, 1);
    uint32_t sf = find_channel(d, 0, DetectorKind::SegmentForbidden, 1);
    uint32_t we = find_channel(d, 0, DetectorKind::ChainWordEnd, 0);

    std::string w = "aabxcd";
    AnnotatedRunResult r = run_dfa(d, w);
    for (size_t p = 0; p <= w.size(); ++p) {
        CHECK(bit_at(d, r, p, s0));  // empty segment: everywhere
        bool b_end = p >= 1 && w[p - 1] == 'b';
        CHECK(bit_at(d, r, p, s1) == b_end);
        if (p >= 1)
            CHECK(bit_at(d, r, p, sf) == (w[p - 1] != 'a'));
        bool cd = p >= 2 && w.compare(p - 2, 2, "cd") == 0;
        CHECK(bit_at(d, r, p, we) == cd);
    }
}

TEST_CASE("dot windows skip the forbidden channel") {
    Ruleset rs = ruleset_of(".*a.{2}b.*cd.*\n", RulesetMode::DoubleCounting);
    AnnotatedDfa d = build_detector(rs);
    for (const ChannelInfo& ci : d.directory)
        CHECK(ci.kind != DetectorKind::SegmentForbidden);
}

TEST_CASE("rules keep separate channels") {
    Ruleset rs = ruleset_of(".*ab.*cd.*\n.*ef.*gh.*\n");
    AnnotatedDfa d = build_detector(rs);
    CHECK(d.channel_count == 4);
    uint32_t pe1 = find_channel(d, 1, DetectorKind::PrefixEnd);
    uint32_t we0 = find_channel(d, 0, DetectorKind::ChainWordEnd, 0);

    AnnotatedRunResult r = run_dfa(d, "efcd");
    CHECK(bit_at(d, r, 2, pe1));
    CHECK(!bit_at(d, r, 2, we0));
    CHECK(bit_at(d, r, 4, we0));
}

TEST_CASE("accept bit tracks any-channel") {
    Ruleset rs = ruleset_of(".*ab.*cd.*\n");
    AnnotatedDfa d = build_detector(rs);
    for (uint32_t s = 0; s < d.dfa.state_count; ++s) {
        bool any = false;
        for (uint32_t c = 0; c < d.channel_count; ++c)
            any = any || d.output_bit(s, c);
        CHECK(d.dfa.is_accept(s) == any);
    }
}

TEST_CASE("output-respecting minimization is idempotent") {
    AnnotatedDfa ac = aho_corasick({"he", "she", "his", "hers"});
    AnnotatedDfa m1 = minimize(ac);
    AnnotatedDfa m2 = minimize(m1);
    CHECK(same_annotated(m1, m2));

    Ruleset rs = ruleset_of(".*ab[^z]{1,3}cd.*\n.*xy.*ab.*\n");
    AnnotatedDfa d = build_detector(rs);
    CHECK(same_annotated(d, minimize(d)));
}

TEST_CASE("minimization keeps distinct outputs apart") {
    // both words reach equivalent DFA futures but different channels
    AnnotatedDfa ac = minimize(aho_corasick({"aa", "bb"}));
    AnnotatedRunResult r1 = run_dfa(ac, "aa");
    AnnotatedRunResult r2 = run_dfa(ac, "bb");
    CHECK(bit_at(ac, r1, 2, 0));
    CHECK(!bit_at(ac, r1, 2, 1));
    CHECK(bit_at(ac, r2, 2, 1));
    CHECK(!bit_at(ac, r2, 2, 0));
}

TEST_CASE("detector grows additively across rules") {
    Ruleset one = ruleset_of(".*ab.*cd.*\n");
    Ruleset two = ruleset_of(".*ab.*cd.*\n.*ef.*gh.*\n");
    Ruleset three = ruleset_of(".*ab.*cd.*\n.*ef.*gh.*\n.*ij.*kl.*\n");
    uint32_t n1 = build_detector(one).dfa.state_count;
    uint32_t n2 = build_detector(two).dfa.state_count;
    uint32_t n3 = build_detector(three).dfa.state_count;
    CHECK(n2 - n1 == 4);
    CHECK(n3 - n2 == 4);
}

TEST_CASE("state cap applies to the detector build") {
    Ruleset rs = ruleset_of(".*ab.*cd.*\n");
    CHECK_THROWS_AS(build_detector(rs, 2), ResourceLimitError);
}

}  // TEST_SUITE
