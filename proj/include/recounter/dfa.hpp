#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "recounter/errors.hpp"
#include "recounter/nfa.hpp"

namespace recounter {

inline constexpr uint32_t kDefaultStateCap = 1'000'000;

// Complete deterministic automaton over the byte alphabet; dense table.
struct Dfa {
    uint32_t state_count = 0;
    uint32_t start = 0;
    std::vector<uint32_t> table;   // state * 256 + byte
    std::vector<uint8_t> accept;   // per state

    uint32_t next(uint32_t s, uint8_t b) const { return table[s * 256u + b]; }
    bool is_accept(uint32_t s) const { return accept[s] != 0; }
};

// Subset construction. The dead state appears as the empty subset when
// reachable. Throws ResourceLimitError past state_cap.
Dfa subset_construct(const Nfa& nfa, uint32_t state_cap = kDefaultStateCap);

// Partition refinement from the accept split; result is reachable, minimal,
// and canonically numbered by breadth-first order (idempotent byte-for-byte).
Dfa minimize(const Dfa& dfa);

struct RunResult {
    bool accept = false;
    std::vector<uint8_t> trace;  // accept bit after each consumed byte
};

RunResult run_dfa(const Dfa& dfa, std::string_view word);

bool dfa_accepts(const Dfa& dfa, std::string_view word);

// True when the two automata accept the same language (product reachability
// over the symmetric difference).
bool dfa_equivalent(const Dfa& a, const Dfa& b);

}  // namespace recounter
