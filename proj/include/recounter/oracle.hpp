#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recounter/decompose.hpp"
#include "recounter/dfa.hpp"

namespace recounter {

struct OracleVerdict {
    bool matched = false;
    // 1-based length of the shortest matching prefix, when matched.
    std::optional<uint64_t> earliest;
};

// Reference decision procedure for one rule: prefix membership by an
// independently built single-rule DFA, then exhaustive position propagation
// over gap offsets and chain words. Deliberately simple; never reuses the
// counter machine or the merged detector.
class RuleOracle {
public:
    explicit RuleOracle(const DecomposedRule& rule);
    OracleVerdict verdict(std::string_view word) const;
    // 1-based positions p where word[0..p) ends a .*prefix match (p=0 included
    // when the prefix matches the empty word).
    std::vector<uint64_t> prefix_end_positions(std::string_view word) const;

private:
    DecomposedRule rule_;
    Dfa prefix_dfa_;  // .*prefix
};

OracleVerdict oracle_match(const DecomposedRule& rule, std::string_view word);
OracleVerdict oracle_match_gap(const DecomposedRule& rule, std::string_view word);

inline constexpr uint64_t kDefaultWordBudget = 100'000'000;

// Words over `alphabet` in length-lexicographic order, empty word first,
// lengths 0..max_len. Throws BudgetError when the total count exceeds budget.
class WordEnumerator {
public:
    WordEnumerator(std::string alphabet, uint32_t max_len,
                   uint64_t budget = kDefaultWordBudget);
    // False when exhausted; otherwise fills `word` with the next word.
    bool next(std::string& word);
    uint64_t total() const { return total_; }

private:
    std::string alphabet_;
    uint32_t max_len_;
    uint64_t total_ = 0;
    uint32_t len_ = 0;
    std::vector<uint32_t> odometer_;
    bool first_ = true;
    bool done_ = false;
};

// Total word count for the enumeration, checked against the budget.
uint64_t enumeration_size(size_t alphabet_size, uint32_t max_len,
                          uint64_t budget = kDefaultWordBudget);

}  // namespace recounter
