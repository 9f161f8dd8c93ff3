#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recounter/ast.hpp"
#include "recounter/errors.hpp"

namespace recounter {

// Constructs whose naive determinization is exponential: a following context
// must be tracked for an unbounded or counted stretch of arbitrary bytes.
enum class BlowupKind : uint8_t {
    DotStar,              // .*
    DotPlus,              // .+
    DotRepeat,            // .{n}
    DotRepeatRange,       // .{n,m}
    NegClassRepeat,       // [^a]{n}
    NegClassRepeatRange,  // [^a]{n,m}
};

struct BlowupSign {
    BlowupKind kind;
    SourceSpan span;
};

// All blow-up signs in source order.
std::vector<BlowupSign> detect_blowup_signs(const AstNode& ast);

enum class RulesetMode : uint8_t { Plain = 0, DoubleCounting = 1 };

// [^c]{k,m} between the prefix and the first chain word: a bounded stretch
// of k..m bytes, none equal to `forbidden`.
struct GapSpec {
    uint8_t forbidden = 0;
    uint32_t k = 0;
    uint32_t m = 0;
    uint32_t m_prime = 0;  // m + |first chain word| + 1: counter expiry
};

// One rule split into prefix regex, optional gap, and the ordered chain of
// literal words that must follow disjointly.
struct DecomposedRule {
    uint32_t rule_id = 0;
    AstNode prefix;                  // may be Empty; blow-up-free in plain mode
    std::optional<GapSpec> gap;      // applies before chain[0] only
    std::vector<std::string> chain;  // non-empty words, at least one
    std::string pattern_text;        // original line
};

// Splits a parsed pattern of shape  .*R.*w1.*w2...*wk.*  or
// .*R[^c]{k,m}w1.*w2...*wk.*  into a DecomposedRule. Throws ShapeError when
// the pattern does not fit, naming the violating construct.
DecomposedRule decompose_rule(const AstNode& ast, RulesetMode mode);

struct Ruleset {
    std::vector<DecomposedRule> rules;
    RulesetMode mode = RulesetMode::Plain;
    uint32_t n = 0;  // rule count
    uint32_t m = 0;  // max over rules of max(|prefix text|, chain word length)
};

// One pattern per line; '#' lines are comments; an optional first content
// line "mode=plain|double_counting" selects the mode unless overridden.
// Aggregates per-line errors into a single RulesetError.
Ruleset parse_ruleset(std::string_view text,
                      std::optional<RulesetMode> mode_override = std::nullopt);

Ruleset make_ruleset(std::vector<DecomposedRule> rules, RulesetMode mode);

// Pattern text denoting the same language as the rule.
std::string recompose_pattern(const DecomposedRule& rule);

// A counted single-char repeat inside the prefix (double-counting mode):
// k..m bytes, all members of `allowed`.
struct CountedWindow {
    uint32_t k = 0;
    uint32_t m = 0;
    ByteSet allowed;
    SourceSpan span;
};

// The prefix split at counted char repeats. segments.size() == windows.size()+1;
// window i sits between segment i and segment i+1. Every segment after a
// window has fixed width. Plain mode always yields one segment, no windows.
struct PrefixSegments {
    std::vector<AstNode> segments;
    std::vector<CountedWindow> windows;
};

// Validates the prefix for the mode and splits it. Throws ShapeError on
// blow-up signs outside counted-window positions, counted wildcards nested
// under groups, or variable-width segments after a window.
PrefixSegments segment_prefix(const AstNode& prefix, RulesetMode mode);

}  // namespace recounter
