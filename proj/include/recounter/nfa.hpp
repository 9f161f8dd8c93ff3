#pragma once

#include <cstdint>
#include <vector>

#include "recounter/ast.hpp"

namespace recounter {

struct NfaEdge {
    uint32_t from = 0;
    uint32_t to = 0;
    bool epsilon = false;
    ByteSet bytes;  // ignored when epsilon
};

struct Nfa {
    uint32_t state_count = 0;
    uint32_t start = 0;
    std::vector<NfaEdge> edges;
    std::vector<uint32_t> accepts;

    uint32_t add_state() { return state_count++; }
    void add_epsilon(uint32_t from, uint32_t to) {
        edges.push_back({from, to, true, {}});
    }
    void add_edge(uint32_t from, uint32_t to, const ByteSet& bytes) {
        edges.push_back({from, to, false, bytes});
    }
};

// Thompson construction. Repeat/RepeatRange expand by duplicating the body,
// so state count is linear in the expanded pattern size.
Nfa thompson_nfa(const AstNode& ast);

}  // namespace recounter
