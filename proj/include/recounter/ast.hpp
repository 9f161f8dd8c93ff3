#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace recounter {

using ByteSet = std::bitset<256>;

// Half-open byte range into the pattern text a node was parsed from.
struct SourceSpan {
    uint32_t begin = 0;
    uint32_t end = 0;
};

enum class AstKind : uint8_t {
    Empty,        // matches the empty word
    Literal,      // one byte
    Dot,          // any byte
    Class,        // [...] or [^...]
    Concat,
    Union,
    Star,
    Plus,
    Repeat,       // {n}
    RepeatRange,  // {n,m}, n <= m
};

struct AstNode {
    AstKind kind = AstKind::Empty;
    uint8_t literal = 0;   // Literal
    ByteSet klass;         // Class: bytes as written, before negation
    bool negated = false;  // Class
    uint32_t min = 0;      // Repeat / RepeatRange
    uint32_t max = 0;      // RepeatRange
    std::vector<AstNode> children;
    SourceSpan span;

    bool is_char_node() const {
        return kind == AstKind::Literal || kind == AstKind::Dot ||
               kind == AstKind::Class;
    }
    // Byte membership for char nodes, with class negation resolved.
    ByteSet byte_membership() const;
};

// Structural equality; spans are ignored.
bool ast_equal(const AstNode& a, const AstNode& b);

// Node count with Repeat/RepeatRange bodies counted b times (expanded size).
size_t ast_expanded_size(const AstNode& n);

// Length in bytes when every matched word has the same length, else -1.
int64_t fixed_width(const AstNode& n);

}  // namespace recounter
