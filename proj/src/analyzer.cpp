#include "recounter/analyzer.hpp"

#include <bit>
#include <map>

#include "recounter/errors.hpp"
#include "recounter/nfa.hpp"
#include "recounter/parse.hpp"

namespace recounter {

namespace {

uint64_t ceil_log2(uint64_t x) {
    return x <= 1 ? 0 : uint64_t(std::bit_width(x - 1));
}

std::string dot_escape_byte(uint8_t b) {
    if (b == '"' || b == '\\') return std::string("\\") + char(b);
    if (b >= 0x20 && b <= 0x7e) return std::string(1, char(b));
    static const char* digits = "0123456789abcdef";
    std::string s = "\\\\x";
    s += digits[b >> 4];
    s += digits[b & 0xf];
    return s;
}

std::string label_bytes(const ByteSet& bytes) {
    if (bytes.all()) return "any";
    std::string out;
    int b = 0;
    while (b < 256) {
        if (!bytes.test(size_t(b))) {
            ++b;
            continue;
        }
        int lo = b;
        while (b + 1 < 256 && bytes.test(size_t(b + 1))) ++b;
        int hi = b;
        ++b;
        if (!out.empty()) out += ',';
        if (hi == lo) {
            out += dot_escape_byte(uint8_t(lo));
        } else if (hi == lo + 1) {
            out += dot_escape_byte(uint8_t(lo));
            out += ',';
            out += dot_escape_byte(uint8_t(hi));
        } else {
            out += dot_escape_byte(uint8_t(lo));
            out += '-';
            out += dot_escape_byte(uint8_t(hi));
        }
    }
    return out;
}

void dot_edges(std::string& out, const Dfa& dfa, uint32_t s) {
    std::map<uint32_t, ByteSet> by_target;
    for (int b = 0; b < 256; ++b)
        by_target[dfa.next(s, uint8_t(b))].set(size_t(b));
    for (const auto& [t, bytes] : by_target) {
        out += "  s" + std::to_string(s) + " -> s" + std::to_string(t) +
               " [label=\"" + label_bytes(bytes) + "\"];\n";
    }
}

std::string kind_label(const ChannelInfo& info) {
    std::string r = "r" + std::to_string(info.rule) + " ";
    switch (info.kind) {
        case DetectorKind::PrefixEnd: return r + "prefix";
        case DetectorKind::ChainWordEnd:
            return r + "word " + std::to_string(info.index);
        case DetectorKind::GapForbidden: return r + "gap byte";
        case DetectorKind::SegmentEnd:
            return r + "segment " + std::to_string(info.index);
        case DetectorKind::SegmentForbidden:
            return r + "outside " + std::to_string(info.index);
    }
    return r + "?";
}

}  // namespace

SizeReport size_report(const CounterMachine& m) {
    SizeReport rep;
    rep.detector_states = m.detector.dfa.state_count;
    rep.transition_bits =
        rep.detector_states * 256 * ceil_log2(rep.detector_states);
    rep.output_bits = rep.detector_states * m.detector.channel_count;
    for (const auto& u : m.units)
        rep.counter_bits += ceil_log2(uint64_t(u.largest_preset()) + 1);
    rep.trigger_count = m.units.size() + m.n_rules;
    rep.gate_count = m.n_rules + 1;
    return rep;
}

Ruleset pair_family(uint32_t n) {
    std::vector<DecomposedRule> rules;
    for (uint32_t i = 0; i < n; ++i) {
        char c0 = char('a' + 4 * i);
        std::string pat = ".*";
        pat += c0;
        pat += char(c0 + 1);
        pat += ".*";
        pat += char(c0 + 2);
        pat += char(c0 + 3);
        pat += ".*";
        AstNode ast = parse_pattern(pat);
        DecomposedRule r = decompose_rule(ast, RulesetMode::Plain);
        r.pattern_text = pat;
        rules.push_back(std::move(r));
    }
    return make_ruleset(std::move(rules), RulesetMode::Plain);
}

Ruleset run_family(uint32_t n, uint32_t m) {
    std::vector<DecomposedRule> rules;
    for (uint32_t i = 0; i < n; ++i) {
        std::string pat = ".*";
        pat += std::string(m, char('a' + 2 * i));
        pat += ".*";
        pat += std::string(m, char('a' + 2 * i + 1));
        pat += ".*";
        AstNode ast = parse_pattern(pat);
        DecomposedRule r = decompose_rule(ast, RulesetMode::Plain);
        r.pattern_text = pat;
        rules.push_back(std::move(r));
    }
    return make_ruleset(std::move(rules), RulesetMode::Plain);
}

BlowupCurve blowup_curve(uint32_t max_n, uint32_t state_cap) {
    BlowupCurve curve;
    for (uint32_t n = 1; n <= max_n; ++n) {
        Ruleset rs = pair_family(n);
        CurveRow row;
        row.n = n;
        AstNode all;
        all.kind = AstKind::Union;
        for (const auto& rule : rs.rules)
            all.children.push_back(parse_pattern(recompose_pattern(rule)));
        try {
            Dfa classical =
                minimize(subset_construct(thompson_nfa(all), state_cap));
            row.classical_states = classical.state_count;
        } catch (const ResourceLimitError&) {
            row.classical_states = std::nullopt;
        }
        CompileOptions opts;
        opts.state_cap = state_cap;
        CounterMachine m = compile(rs, opts);
        SizeReport rep = size_report(m);
        row.detector_states = rep.detector_states;
        row.counter_bits = rep.counter_bits;
        curve.rows.push_back(row);
    }
    return curve;
}

std::string BlowupCurve::to_csv() const {
    std::string out = "n,classical_states,block1_states,counter_bits\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + ",";
        out += r.classical_states ? std::to_string(*r.classical_states)
                                  : std::string("cap_exceeded");
        out += "," + std::to_string(r.detector_states) + "," +
               std::to_string(r.counter_bits) + "\n";
    }
    return out;
}

std::string export_dot(const Dfa& dfa) {
    std::string out = "digraph detector {\n  rankdir=LR;\n";
    out += "  start [shape=point];\n";
    for (uint32_t s = 0; s < dfa.state_count; ++s)
        out += "  s" + std::to_string(s) +
               (dfa.is_accept(s) ? " [shape=doublecircle];\n"
                                 : " [shape=circle];\n");
    out += "  start -> s" + std::to_string(dfa.start) + ";\n";
    for (uint32_t s = 0; s < dfa.state_count; ++s) dot_edges(out, dfa, s);
    out += "}\n";
    return out;
}

std::string export_dot(const AnnotatedDfa& adfa) {
    std::string out = "digraph detector {\n  rankdir=LR;\n";
    out += "  start [shape=point];\n";
    for (uint32_t s = 0; s < adfa.dfa.state_count; ++s) {
        std::string label = "s" + std::to_string(s);
        std::string chans;
        for (uint32_t c = 0; c < adfa.channel_count; ++c) {
            if (!adfa.output_bit(s, c)) continue;
            if (!chans.empty()) chans += ",";
            chans += std::to_string(c);
        }
        if (!chans.empty()) label += "\\nch " + chans;
        out += "  s" + std::to_string(s) + " [shape=" +
               (adfa.dfa.is_accept(s) ? "doublecircle" : "circle") +
               ",label=\"" + label + "\"];\n";
    }
    out += "  start -> s" + std::to_string(adfa.dfa.start) + ";\n";
    for (uint32_t s = 0; s < adfa.dfa.state_count; ++s)
        dot_edges(out, adfa.dfa, s);
    out += "}\n";
    return out;
}

std::string export_dot(const CounterMachine& m) {
    std::string out = "digraph machine {\n  rankdir=LR;\n";
    out += "  detector [shape=box3d,label=\"detector: " +
           std::to_string(m.detector.dfa.state_count) + " states, " +
           std::to_string(m.detector.channel_count) + " channels\"];\n";

    std::vector<uint8_t> used(m.detector.channel_count, 0);
    auto mark = [&](int32_t ch) {
        if (ch >= 0) used[uint32_t(ch)] = 1;
    };
    for (const auto& u : m.units) {
        mark(int32_t(u.detector_channel));
        mark(u.forbidden_channel);
        mark(u.arm_channel);
    }
    for (uint32_t c = 0; c < m.detector.channel_count; ++c) {
        if (!used[c]) continue;
        out += "  ch" + std::to_string(c) + " [shape=note,label=\"" +
               kind_label(m.detector.directory[c]) + "\"];\n";
        out += "  detector -> ch" + std::to_string(c) + " [style=dotted];\n";
    }

    for (size_t i = 0; i < m.units.size(); ++i) {
        const CounterUnit& u = m.units[i];
        std::string name = "c" + std::to_string(i);
        std::string label = name + ": ";
        if (u.mode == UnitMode::PlainThreshold) {
            label += "≥" + std::to_string(u.lower);
        } else {
            label += std::to_string(u.lower) + ".." + std::to_string(u.upper) +
                     " exp " + std::to_string(u.expiry);
        }
        out += "  " + name + " [shape=box,label=\"" + label + "\"];\n";
        out += "  ch" + std::to_string(u.detector_channel) + " -> " + name +
               " [style=dashed,label=\"end\"];\n";
        if (u.forbidden_channel >= 0)
            out += "  ch" + std::to_string(u.forbidden_channel) + " -> " +
                   name + " [style=dashed,label=\"dirty\"];\n";
        if (u.arm_channel >= 0)
            out += "  ch" + std::to_string(u.arm_channel) + " -> " + name +
                   " [label=\"arm\"];\n";
        else
            out += "  c" + std::to_string(i - 1) + " -> " + name +
                   " [label=\"fire\"];\n";
        bool last = i + 1 == m.units.size() || m.units[i + 1].rule != u.rule;
        if (last) {
            out += "  " + name + " -> latch" + std::to_string(u.rule) +
                   " [label=\"fire\"];\n";
        }
    }
    for (uint32_t r = 0; r < m.n_rules; ++r) {
        out += "  latch" + std::to_string(r) +
               " [shape=doublecircle,label=\"rule " + std::to_string(r) +
               "\"];\n";
        out += "  latch" + std::to_string(r) + " -> any;\n";
    }
    out += "  any [shape=octagon,label=\"any rule\"];\n";
    out += "}\n";
    return out;
}

}  // namespace recounter
