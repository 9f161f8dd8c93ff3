#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "recounter/dfa.hpp"

namespace recounter::detail {

// Splits the classes in `cls` until byte transitions respect them.
// Returns the stable class count.  Initial classes must already separate
// states with different observable output (accept flag, output row).
uint32_t refine_classes(const Dfa& dfa, std::vector<uint32_t>& cls,
                        uint32_t n_classes);

// Canonical numbering of the refined classes: BFS from the start state's
// class, byte edges in ascending order.  Unreachable classes get no number.
// Returns (class -> new id or UINT32_MAX, reachable class count).
std::pair<std::vector<uint32_t>, uint32_t> bfs_order(
    const Dfa& dfa, const std::vector<uint32_t>& cls, uint32_t n_classes);

}  // namespace recounter::detail
