#pragma once

#include <string>
#include <string_view>

#include "recounter/ast.hpp"
#include "recounter/errors.hpp"

namespace recounter {

// Parses the supported pattern subset: literals, '.', [classes], '|', '*',
// '+', '{n}', '{n,m}', grouping, and escapes. Anything else (anchors, lazy
// quantifiers, backreferences, lookaround, named classes) is a hard error.
// Throws ParseError with a byte offset.
AstNode parse_pattern(std::string_view text);

// Renders an AST back to pattern text. unparse(parse(t)) reparses to a
// structurally identical AST.
std::string unparse(const AstNode& n);

// Escapes one byte for use as a literal in pattern text.
std::string escape_pattern_byte(uint8_t b);

}  // namespace recounter
