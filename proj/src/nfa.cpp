#include "recounter/nfa.hpp"

namespace recounter {

namespace {

struct Frag {
    uint32_t start;
    uint32_t end;
};

struct Builder {
    Nfa& nfa;

    Frag build(const AstNode& n) {
        switch (n.kind) {
            case AstKind::Empty: {
                uint32_t s = nfa.add_state();
                return {s, s};
            }
            case AstKind::Literal:
            case AstKind::Dot:
            case AstKind::Class: {
                uint32_t s = nfa.add_state();
                uint32_t e = nfa.add_state();
                nfa.add_edge(s, e, n.byte_membership());
                return {s, e};
            }
            case AstKind::Concat: {
                Frag f = build(n.children.front());
                for (size_t i = 1; i < n.children.size(); ++i) {
                    Frag g = build(n.children[i]);
                    nfa.add_epsilon(f.end, g.start);
                    f.end = g.end;
                }
                return f;
            }
            case AstKind::Union: {
                uint32_t s = nfa.add_state();
                uint32_t e = nfa.add_state();
                for (const auto& c : n.children) {
                    Frag f = build(c);
                    nfa.add_epsilon(s, f.start);
                    nfa.add_epsilon(f.end, e);
                }
                return {s, e};
            }
            case AstKind::Star: {
                uint32_t s = nfa.add_state();
                uint32_t e = nfa.add_state();
                Frag f = build(n.children.front());
                nfa.add_epsilon(s, f.start);
                nfa.add_epsilon(s, e);
                nfa.add_epsilon(f.end, f.start);
                nfa.add_epsilon(f.end, e);
                return {s, e};
            }
            case AstKind::Plus: {
                Frag f = build(n.children.front());
                uint32_t e = nfa.add_state();
                nfa.add_epsilon(f.end, f.start);
                nfa.add_epsilon(f.end, e);
                return {f.start, e};
            }
            case AstKind::Repeat:
            case AstKind::RepeatRange: {
                // Copies in sequence; for {k,m} the optional tail states get
                // an epsilon exit to the shared end.
                uint32_t min = n.min;
                uint32_t max = n.kind == AstKind::Repeat ? n.min : n.max;
                uint32_t s = nfa.add_state();
                uint32_t e = nfa.add_state();
                if (max == 0) {
                    nfa.add_epsilon(s, e);
                    return {s, e};
                }
                uint32_t cur = s;
                for (uint32_t i = 0; i < max; ++i) {
                    if (i >= min) nfa.add_epsilon(cur, e);
                    Frag f = build(n.children.front());
                    nfa.add_epsilon(cur, f.start);
                    cur = f.end;
                }
                nfa.add_epsilon(cur, e);
                return {s, e};
            }
        }
        uint32_t s = nfa.add_state();
        return {s, s};
    }
};

}  // namespace

Nfa thompson_nfa(const AstNode& ast) {
    Nfa nfa;
    Builder b{nfa};
    Frag f = b.build(ast);
    nfa.start = f.start;
    nfa.accepts.push_back(f.end);
    return nfa;
}

}  // namespace recounter
