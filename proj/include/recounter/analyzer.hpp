#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recounter/machine.hpp"

namespace recounter {

// Storage accounting for a compiled machine.
struct SizeReport {
    uint64_t detector_states = 0;
    uint64_t transition_bits = 0;  // states * 256 * ceil(log2(states))
    uint64_t output_bits = 0;      // states * channel count
    uint64_t counter_bits = 0;     // sum of ceil(log2(largest preset + 1))
    uint64_t trigger_count = 0;    // one per unit + one latch per rule
    uint64_t gate_count = 0;       // n conjunctions + 1 disjunction
};

SizeReport size_report(const CounterMachine& m);

struct CurveRow {
    uint32_t n = 0;
    std::optional<uint64_t> classical_states;  // nullopt: cap exceeded
    uint64_t detector_states = 0;
    uint64_t counter_bits = 0;
};

struct BlowupCurve {
    std::vector<CurveRow> rows;
    std::string to_csv() const;  // header: n,classical_states,block1_states,counter_bits
};

// n rules of two fresh 2-byte words each over disjoint letters:
// .*w(2i)w(2i+1).*w(2i+2)w(2i+3).* — the family whose single-automaton
// determinization doubles per added rule.
Ruleset pair_family(uint32_t n);

// n rules .*a^m.*b^m.* over 2n disjoint letters; exercises counter widths.
Ruleset run_family(uint32_t n, uint32_t m);

// For n = 1..max_n: determinize the union pattern of pair_family(n) through
// the classical pipeline (minimized, capped) and compile the counter machine;
// report both sizes.
BlowupCurve blowup_curve(uint32_t max_n, uint32_t state_cap = kDefaultStateCap);

// Deterministic DOT renderings (byte-identical across runs).
std::string export_dot(const Dfa& dfa);
std::string export_dot(const AnnotatedDfa& adfa);
std::string export_dot(const CounterMachine& m);

}  // namespace recounter
