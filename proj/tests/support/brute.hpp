#pragma once

// Position-set regex matcher, the test-side reference. Works directly on the
// AST with no automata involved, so it shares no code with the engine under
// test.

#include <string_view>
#include <vector>

#include "recounter/ast.hpp"

namespace brute {

using PosSet = std::vector<uint8_t>;  // index p set: position p reachable

inline PosSet apply(const recounter::AstNode& n, const PosSet& in,
                    std::string_view w);

inline PosSet apply_char(const recounter::ByteSet& bytes, const PosSet& in,
                         std::string_view w) {
    PosSet out(in.size(), 0);
    for (size_t p = 0; p + 1 < in.size(); ++p)
        if (in[p] && bytes.test(uint8_t(w[p]))) out[p + 1] = 1;
    return out;
}

inline void join(PosSet& a, const PosSet& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] |= b[i];
}

inline bool none(const PosSet& s) {
    for (uint8_t v : s)
        if (v) return false;
    return true;
}

inline PosSet star(const recounter::AstNode& body, PosSet cur,
                   std::string_view w) {
    for (;;) {
        PosSet next = apply(body, cur, w);
        bool grew = false;
        for (size_t i = 0; i < cur.size(); ++i) {
            if (next[i] && !cur[i]) {
                cur[i] = 1;
                grew = true;
            }
        }
        if (!grew) return cur;
    }
}

inline PosSet apply(const recounter::AstNode& n, const PosSet& in,
                    std::string_view w) {
    using recounter::AstKind;
    switch (n.kind) {
        case AstKind::Empty:
            return in;
        case AstKind::Literal:
        case AstKind::Dot:
        case AstKind::Class:
            return apply_char(n.byte_membership(), in, w);
        case AstKind::Concat: {
            PosSet cur = in;
            for (const auto& c : n.children) {
                cur = apply(c, cur, w);
                if (none(cur)) return cur;
            }
            return cur;
        }
        case AstKind::Union: {
            PosSet out(in.size(), 0);
            for (const auto& c : n.children) join(out, apply(c, in, w));
            return out;
        }
        case AstKind::Star:
            return star(n.children.front(), in, w);
        case AstKind::Plus: {
            PosSet once = apply(n.children.front(), in, w);
            return star(n.children.front(), once, w);
        }
        case AstKind::Repeat: {
            PosSet cur = in;
            for (uint32_t i = 0; i < n.min; ++i) {
                cur = apply(n.children.front(), cur, w);
                if (none(cur)) return cur;
            }
            return cur;
        }
        case AstKind::RepeatRange: {
            PosSet cur = in;
            for (uint32_t i = 0; i < n.min; ++i) {
                cur = apply(n.children.front(), cur, w);
                if (none(cur)) return cur;
            }
            PosSet out = cur;
            for (uint32_t i = n.min; i < n.max; ++i) {
                cur = apply(n.children.front(), cur, w);
                if (none(cur)) break;
                join(out, cur);
            }
            return out;
        }
    }
    return PosSet(in.size(), 0);
}

// Whole-word match.
inline bool match(const recounter::AstNode& ast, std::string_view w) {
    PosSet in(w.size() + 1, 0);
    in[0] = 1;
    PosSet out = apply(ast, in, w);
    return out[w.size()] != 0;
}

// 1-based length of the shortest matching prefix, or -1.
inline int64_t earliest_prefix(const recounter::AstNode& ast,
                               std::string_view w) {
    for (size_t p = 0; p <= w.size(); ++p)
        if (match(ast, w.substr(0, p))) return int64_t(p);
    return -1;
}

}  // namespace brute
