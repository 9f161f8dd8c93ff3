#include "recounter/oracle.hpp"

#include <algorithm>

#include "recounter/errors.hpp"
#include "recounter/nfa.hpp"

namespace recounter {

namespace {

AstNode dot_star_then(const AstNode& prefix) {
    AstNode dot;
    dot.kind = AstKind::Dot;
    AstNode star;
    star.kind = AstKind::Star;
    star.children.push_back(dot);
    if (prefix.kind == AstKind::Empty) return star;
    AstNode cat;
    cat.kind = AstKind::Concat;
    cat.children.push_back(std::move(star));
    cat.children.push_back(prefix);
    return cat;
}

// Earliest end of an occurrence of `w` starting at or after `from`.
std::optional<uint64_t> earliest_end(std::string_view hay, std::string_view w,
                                     uint64_t from) {
    if (from > hay.size()) return std::nullopt;
    size_t s = hay.find(w, size_t(from));
    if (s == std::string_view::npos) return std::nullopt;
    return uint64_t(s) + w.size();
}

}  // namespace

RuleOracle::RuleOracle(const DecomposedRule& rule) : rule_(rule) {
    prefix_dfa_ = minimize(subset_construct(
        thompson_nfa(dot_star_then(rule.prefix)), kDefaultStateCap));
}

std::vector<uint64_t> RuleOracle::prefix_end_positions(
    std::string_view word) const {
    std::vector<uint64_t> out;
    RunResult r = run_dfa(prefix_dfa_, word);
    for (size_t p = 0; p < r.trace.size(); ++p)
        if (r.trace[p]) out.push_back(p);
    return out;
}

OracleVerdict RuleOracle::verdict(std::string_view word) const {
    std::vector<uint64_t> ends = prefix_end_positions(word);
    if (ends.empty()) return {};

    uint64_t cur;  // minimum position the next chain word may start at
    size_t first_plain = 0;
    if (rule_.gap) {
        const GapSpec& g = *rule_.gap;
        const std::string& beta = rule_.chain.front();
        std::optional<uint64_t> best;
        for (uint64_t p : ends) {
            for (uint32_t glen = g.k; glen <= g.m; ++glen) {
                uint64_t beta_start = p + glen;
                if (beta_start + beta.size() > word.size()) break;
                bool clean = true;
                for (uint64_t i = p; i < beta_start; ++i)
                    if (uint8_t(word[size_t(i)]) == g.forbidden) {
                        clean = false;
                        break;
                    }
                if (!clean) continue;
                if (word.compare(size_t(beta_start), beta.size(), beta) == 0) {
                    uint64_t end = beta_start + beta.size();
                    if (!best || end < *best) best = end;
                }
            }
        }
        if (!best) return {};
        cur = *best;
        first_plain = 1;
    } else {
        cur = ends.front();
    }

    // Greedy earliest end per stage; exact because later stages only
    // constrain the start position downward.
    for (size_t j = first_plain; j < rule_.chain.size(); ++j) {
        auto e = earliest_end(word, rule_.chain[j], cur);
        if (!e) return {};
        cur = *e;
    }
    return {true, cur};
}

OracleVerdict oracle_match(const DecomposedRule& rule, std::string_view word) {
    return RuleOracle(rule).verdict(word);
}

OracleVerdict oracle_match_gap(const DecomposedRule& rule,
                               std::string_view word) {
    return RuleOracle(rule).verdict(word);
}

uint64_t enumeration_size(size_t alphabet_size, uint32_t max_len,
                          uint64_t budget) {
    uint64_t total = 0, term = 1;
    for (uint32_t l = 0; l <= max_len; ++l) {
        total += term;
        if (total > budget)
            throw BudgetError("enumeration of " + std::to_string(alphabet_size) +
                              "^0.." + std::to_string(max_len) +
                              " words exceeds budget " + std::to_string(budget));
        if (l < max_len) {
            if (alphabet_size == 0) break;
            if (term > budget / alphabet_size + 1)
                throw BudgetError("enumeration of " +
                                  std::to_string(alphabet_size) + "^0.." +
                                  std::to_string(max_len) +
                                  " words exceeds budget " +
                                  std::to_string(budget));
            term *= alphabet_size;
        }
    }
    return total;
}

WordEnumerator::WordEnumerator(std::string alphabet, uint32_t max_len,
                               uint64_t budget)
    : alphabet_(std::move(alphabet)), max_len_(max_len) {
    enumeration_size(alphabet_.size(), max_len, budget);
}

bool WordEnumerator::next(std::string& word) {
    if (done_) return false;
    if (first_) {
        first_ = false;
        odometer_.clear();
    } else {
        size_t i = odometer_.size();
        while (i > 0) {
            if (++odometer_[i - 1] < alphabet_.size()) break;
            odometer_[i - 1] = 0;
            --i;
        }
        if (i == 0) {
            if (odometer_.size() >= max_len_ || alphabet_.empty()) {
                done_ = true;
                return false;
            }
            odometer_.assign(odometer_.size() + 1, 0);
        }
    }
    word.resize(odometer_.size());
    for (size_t j = 0; j < odometer_.size(); ++j)
        word[j] = alphabet_[odometer_[j]];
    ++total_;
    return true;
}

}  // namespace recounter
