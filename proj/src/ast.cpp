#include "recounter/ast.hpp"

namespace recounter {

ByteSet AstNode::byte_membership() const {
    switch (kind) {
        case AstKind::Literal: {
            ByteSet s;
            s.set(literal);
            return s;
        }
        case AstKind::Dot: {
            ByteSet s;
            s.set();
            return s;
        }
        case AstKind::Class:
            return negated ? ~klass : klass;
        default:
            return {};
    }
}

bool ast_equal(const AstNode& a, const AstNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AstKind::Literal:
            if (a.literal != b.literal) return false;
            break;
        case AstKind::Class:
            if (a.negated != b.negated || a.klass != b.klass) return false;
            break;
        case AstKind::Repeat:
            if (a.min != b.min) return false;
            break;
        case AstKind::RepeatRange:
            if (a.min != b.min || a.max != b.max) return false;
            break;
        default:
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (!ast_equal(a.children[i], b.children[i])) return false;
    return true;
}

size_t ast_expanded_size(const AstNode& n) {
    size_t inner = 1;
    for (const auto& c : n.children) inner += ast_expanded_size(c);
    switch (n.kind) {
        case AstKind::Repeat:
            return 1 + (inner - 1) * n.min;
        case AstKind::RepeatRange:
            return 1 + (inner - 1) * n.max;
        default:
            return inner;
    }
}

int64_t fixed_width(const AstNode& n) {
    switch (n.kind) {
        case AstKind::Empty:
            return 0;
        case AstKind::Literal:
        case AstKind::Dot:
        case AstKind::Class:
            return 1;
        case AstKind::Concat: {
            int64_t sum = 0;
            for (const auto& c : n.children) {
                int64_t w = fixed_width(c);
                if (w < 0) return -1;
                sum += w;
            }
            return sum;
        }
        case AstKind::Union: {
            int64_t w0 = fixed_width(n.children.front());
            if (w0 < 0) return -1;
            for (const auto& c : n.children)
                if (fixed_width(c) != w0) return -1;
            return w0;
        }
        case AstKind::Star:
        case AstKind::Plus: {
            // Only degenerate zero-width bodies keep these fixed.
            return fixed_width(n.children.front()) == 0 ? 0 : -1;
        }
        case AstKind::Repeat: {
            int64_t w = fixed_width(n.children.front());
            return w < 0 ? -1 : w * n.min;
        }
        case AstKind::RepeatRange: {
            int64_t w = fixed_width(n.children.front());
            if (w < 0) return -1;
            if (n.min != n.max && w != 0) return -1;
            return w * n.min;
        }
    }
    return -1;
}

}  // namespace recounter
