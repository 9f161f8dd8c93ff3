#include "recounter/decompose.hpp"

#include <algorithm>

#include "recounter/parse.hpp"

namespace recounter {

namespace {

void collect_signs(const AstNode& n, std::vector<BlowupSign>& out) {
    const AstNode* child = n.children.empty() ? nullptr : &n.children.front();
    switch (n.kind) {
        case AstKind::Star:
            if (child->kind == AstKind::Dot)
                out.push_back({BlowupKind::DotStar, n.span});
            break;
        case AstKind::Plus:
            if (child->kind == AstKind::Dot)
                out.push_back({BlowupKind::DotPlus, n.span});
            break;
        case AstKind::Repeat:
            if (child->kind == AstKind::Dot)
                out.push_back({BlowupKind::DotRepeat, n.span});
            else if (child->kind == AstKind::Class && child->negated)
                out.push_back({BlowupKind::NegClassRepeat, n.span});
            break;
        case AstKind::RepeatRange:
            if (child->kind == AstKind::Dot)
                out.push_back({BlowupKind::DotRepeatRange, n.span});
            else if (child->kind == AstKind::Class && child->negated)
                out.push_back({BlowupKind::NegClassRepeatRange, n.span});
            break;
        default:
            break;
    }
    for (const auto& c : n.children) collect_signs(c, out);
}

bool is_dot_star(const AstNode& n) {
    return n.kind == AstKind::Star && n.children.front().kind == AstKind::Dot;
}

bool is_counted_char(const AstNode& n) {
    return (n.kind == AstKind::Repeat || n.kind == AstKind::RepeatRange) &&
           n.children.front().is_char_node();
}

bool is_counted_negated_class(const AstNode& n) {
    return (n.kind == AstKind::Repeat || n.kind == AstKind::RepeatRange) &&
           n.children.front().kind == AstKind::Class &&
           n.children.front().negated;
}

AstNode group_items(std::vector<AstNode> items) {
    if (items.empty()) {
        AstNode n;
        n.kind = AstKind::Empty;
        return n;
    }
    if (items.size() == 1) return std::move(items.front());
    AstNode n;
    n.kind = AstKind::Concat;
    n.span = {items.front().span.begin, items.back().span.end};
    n.children = std::move(items);
    return n;
}

}  // namespace

std::vector<BlowupSign> detect_blowup_signs(const AstNode& ast) {
    std::vector<BlowupSign> out;
    collect_signs(ast, out);
    std::stable_sort(out.begin(), out.end(),
                     [](const BlowupSign& a, const BlowupSign& b) {
                         return a.span.begin < b.span.begin;
                     });
    return out;
}

PrefixSegments segment_prefix(const AstNode& prefix, RulesetMode mode) {
    std::vector<AstNode> items;
    if (prefix.kind == AstKind::Concat)
        items = prefix.children;
    else if (prefix.kind != AstKind::Empty)
        items.push_back(prefix);

    PrefixSegments out;
    std::vector<AstNode> current;
    for (auto& item : items) {
        if (mode == RulesetMode::DoubleCounting && is_counted_char(item)) {
            out.segments.push_back(group_items(std::move(current)));
            current.clear();
            CountedWindow w;
            w.k = item.min;
            w.m = item.kind == AstKind::Repeat ? item.min : item.max;
            w.allowed = item.children.front().byte_membership();
            w.span = item.span;
            out.windows.push_back(w);
        } else {
            current.push_back(std::move(item));
        }
    }
    out.segments.push_back(group_items(std::move(current)));

    for (size_t s = 0; s < out.segments.size(); ++s) {
        auto signs = detect_blowup_signs(out.segments[s]);
        if (!signs.empty()) {
            throw ShapeError(signs.front().span.begin,
                             mode == RulesetMode::Plain
                                 ? "prefix contains a blow-up sign"
                                 : "counted wildcard must appear at the top "
                                   "level of the prefix");
        }
        if (s > 0 && fixed_width(out.segments[s]) < 0)
            throw ShapeError(out.windows[s - 1].span.begin,
                             "variable-width prefix part after a counted "
                             "repeat");
    }
    return out;
}

DecomposedRule decompose_rule(const AstNode& ast, RulesetMode mode) {
    std::vector<AstNode> items;
    if (ast.kind == AstKind::Concat)
        items = ast.children;
    else
        items.push_back(ast);

    if (ast.kind == AstKind::Union)
        throw ShapeError(ast.span.begin,
                         "alternation at the top level; one rule per line");
    if (!is_dot_star(items.front()))
        throw ShapeError(items.front().span.begin,
                         "pattern must start with '.*'");
    if (!is_dot_star(items.back()))
        throw ShapeError(items.back().span.begin,
                         "pattern must end with '.*'");

    // Split the interior at '.*' separators; consecutive separators collapse.
    std::vector<std::vector<AstNode>> groups;
    std::vector<AstNode> current;
    for (size_t i = 1; i + 1 < items.size(); ++i) {
        if (is_dot_star(items[i])) {
            if (!current.empty()) groups.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(std::move(items[i]));
        }
    }
    if (!current.empty()) groups.push_back(std::move(current));

    if (groups.empty())
        throw ShapeError(ast.span.end, "missing chain word after the prefix");

    // The pre-separator group may end in [^c]{k,m}<literal word>: a gap.
    auto& g0 = groups.front();
    std::optional<GapSpec> gap;
    std::string gap_word;
    std::vector<AstNode> prefix_items;
    bool gap_extracted = false;

    int gi = -1;
    for (int i = int(g0.size()) - 1; i >= 0; --i) {
        if (is_counted_negated_class(g0[size_t(i)])) {
            gi = i;
            break;
        }
    }
    if (gi >= 0) {
        bool tail_literal = size_t(gi) + 1 < g0.size();
        for (size_t i = size_t(gi) + 1; i < g0.size(); ++i)
            if (g0[i].kind != AstKind::Literal) tail_literal = false;
        const AstNode& rep = g0[size_t(gi)];
        const AstNode& cls = rep.children.front();
        bool single_byte = cls.klass.count() == 1;
        if (tail_literal && single_byte) {
            for (size_t i = size_t(gi) + 1; i < g0.size(); ++i)
                gap_word.push_back(char(g0[i].literal));
            GapSpec g;
            for (int b = 0; b < 256; ++b)
                if (cls.klass.test(size_t(b))) g.forbidden = uint8_t(b);
            g.k = rep.min;
            g.m = rep.kind == AstKind::Repeat ? rep.min : rep.max;
            g.m_prime = g.m + uint32_t(gap_word.size()) + 1;
            gap = g;
            prefix_items.assign(g0.begin(), g0.begin() + gi);
            gap_extracted = true;
        } else if (mode == RulesetMode::Plain) {
            if (tail_literal && !single_byte)
                throw ShapeError(cls.span.begin,
                                 "gap class must forbid exactly one byte");
            throw ShapeError(rep.span.begin,
                             "counted wildcard in the prefix needs a literal "
                             "word right after it");
        }
        // Double-counting without a gap reading: stays inside the prefix.
    }
    if (!gap_extracted) prefix_items = std::move(g0);

    DecomposedRule rule;
    rule.prefix = group_items(std::move(prefix_items));
    rule.gap = gap;
    if (gap) rule.chain.push_back(gap_word);
    for (size_t gidx = 1; gidx < groups.size(); ++gidx) {
        std::string w;
        for (const auto& item : groups[gidx]) {
            if (item.kind != AstKind::Literal)
                throw ShapeError(item.span.begin,
                                 "chain word must be a literal word");
            w.push_back(char(item.literal));
        }
        rule.chain.push_back(std::move(w));
    }
    if (rule.chain.empty())
        throw ShapeError(ast.span.end, "missing chain word after the prefix");

    segment_prefix(rule.prefix, mode);  // validates prefix for the mode
    return rule;
}

Ruleset make_ruleset(std::vector<DecomposedRule> rules, RulesetMode mode) {
    Ruleset rs;
    rs.mode = mode;
    rs.rules = std::move(rules);
    rs.n = uint32_t(rs.rules.size());
    for (size_t i = 0; i < rs.rules.size(); ++i) {
        auto& r = rs.rules[i];
        r.rule_id = uint32_t(i);
        uint32_t len = uint32_t(unparse(r.prefix).size());
        if (r.prefix.kind == AstKind::Empty) len = 0;
        rs.m = std::max(rs.m, len);
        for (const auto& w : r.chain) rs.m = std::max(rs.m, uint32_t(w.size()));
    }
    return rs;
}

Ruleset parse_ruleset(std::string_view text,
                      std::optional<RulesetMode> mode_override) {
    RulesetMode mode = mode_override.value_or(RulesetMode::Plain);
    std::vector<DecomposedRule> rules;
    std::vector<RulesetError::Item> errors;
    int line_no = 0;
    bool saw_content = false;

    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line = nl == std::string_view::npos
                                    ? text.substr(start)
                                    : text.substr(start, nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!saw_content && line.rfind("mode=", 0) == 0) {
            saw_content = true;
            std::string_view value = line.substr(5);
            RulesetMode file_mode = mode;
            if (value == "plain")
                file_mode = RulesetMode::Plain;
            else if (value == "double_counting")
                file_mode = RulesetMode::DoubleCounting;
            else
                errors.push_back({line_no, 5, "unknown mode '" +
                                                  std::string(value) + "'"});
            if (!mode_override) mode = file_mode;
            continue;
        }
        saw_content = true;
        try {
            AstNode ast = parse_pattern(line);
            DecomposedRule r = decompose_rule(ast, mode);
            r.pattern_text = std::string(line);
            rules.push_back(std::move(r));
        } catch (const ParseError& e) {
            errors.push_back({line_no, e.offset(), e.reason()});
        } catch (const ShapeError& e) {
            errors.push_back({line_no, e.offset(), e.reason()});
        }
    }
    if (!errors.empty()) throw RulesetError(std::move(errors));
    if (rules.empty()) throw RulesetError({{0, 0, "empty ruleset"}});
    return make_ruleset(std::move(rules), mode);
}

std::string recompose_pattern(const DecomposedRule& rule) {
    std::string out = ".*";
    if (rule.prefix.kind == AstKind::Union)
        out += "(" + unparse(rule.prefix) + ")";
    else if (rule.prefix.kind != AstKind::Empty)
        out += unparse(rule.prefix);
    auto append_word = [&](const std::string& w) {
        for (unsigned char b : w) out += escape_pattern_byte(b);
    };
    size_t first_plain = 0;
    if (rule.gap) {
        const GapSpec& g = *rule.gap;
        out += "[^" + ((g.forbidden == '^' || g.forbidden == ']' ||
                        g.forbidden == '\\' || g.forbidden == '-')
                           ? std::string("\\") + char(g.forbidden)
                           : (g.forbidden >= 0x20 && g.forbidden <= 0x7e
                                  ? std::string(1, char(g.forbidden))
                                  : [&] {
                                        static const char* d = "0123456789abcdef";
                                        std::string s = "\\x";
                                        s += d[g.forbidden >> 4];
                                        s += d[g.forbidden & 0xf];
                                        return s;
                                    }()));
        out += "]{" + std::to_string(g.k) + "," + std::to_string(g.m) + "}";
        append_word(rule.chain.front());
        out += ".*";
        first_plain = 1;
    } else {
        out += ".*";
    }
    for (size_t i = first_plain; i < rule.chain.size(); ++i) {
        append_word(rule.chain[i]);
        out += ".*";
    }
    return out;
}

}  // namespace recounter
