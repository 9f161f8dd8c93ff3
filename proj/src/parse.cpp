#include "recounter/parse.hpp"

#include <cctype>

namespace recounter {

namespace {

constexpr uint32_t kMaxRepeatBound = 9999;

bool is_meta(uint8_t c) {
    switch (c) {
        case '\\': case '.': case '*': case '+': case '?':
        case '{': case '}': case '[': case ']': case '(': case ')':
        case '|': case '^': case '$':
            return true;
        default:
            return false;
    }
}

bool is_printable(uint8_t c) { return c >= 0x20 && c <= 0x7e; }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    AstNode parse() {
        AstNode node = alternation();
        if (!eof()) {
            if (peek() == ')') fail("unbalanced ')'");
            fail("trailing input");
        }
        return node;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
    [[noreturn]] void fail_at(size_t off, const std::string& msg) const {
        throw ParseError(off, msg);
    }
    bool eof() const { return pos_ >= text_.size(); }
    uint8_t peek() const { return static_cast<uint8_t>(text_[pos_]); }
    uint8_t take() { return static_cast<uint8_t>(text_[pos_++]); }
    bool consume(uint8_t c) {
        if (eof() || peek() != c) return false;
        ++pos_;
        return true;
    }

    AstNode alternation() {
        size_t begin = pos_;
        std::vector<AstNode> branches;
        branches.push_back(concatenation());
        while (!eof() && peek() == '|') {
            ++pos_;
            branches.push_back(concatenation());
        }
        if (branches.size() == 1) return std::move(branches.front());
        AstNode n;
        n.kind = AstKind::Union;
        n.children = std::move(branches);
        n.span = {uint32_t(begin), uint32_t(pos_)};
        return n;
    }

    AstNode concatenation() {
        size_t begin = pos_;
        std::vector<AstNode> parts;
        while (!eof() && peek() != '|' && peek() != ')')
            parts.push_back(quantified());
        if (parts.empty()) {
            AstNode n;
            n.kind = AstKind::Empty;
            n.span = {uint32_t(begin), uint32_t(pos_)};
            return n;
        }
        if (parts.size() == 1) return std::move(parts.front());
        AstNode n;
        n.kind = AstKind::Concat;
        n.children = std::move(parts);
        n.span = {uint32_t(begin), uint32_t(pos_)};
        return n;
    }

    AstNode quantified() {
        size_t begin = pos_;
        AstNode base = atom();
        bool quantified = false;
        while (!eof()) {
            uint8_t c = peek();
            if (c == '*' || c == '+' || c == '{') {
                if (quantified)
                    fail("quantifier applied to a quantified expression");
                base = apply_quantifier(std::move(base), begin);
                quantified = true;
            } else if (c == '?') {
                fail(quantified ? "lazy/possessive quantifiers are not supported"
                                : "unsupported quantifier '?'");
            } else {
                break;
            }
        }
        return base;
    }

    AstNode apply_quantifier(AstNode child, size_t begin) {
        uint8_t c = take();
        AstNode n;
        n.children.push_back(std::move(child));
        if (c == '*') {
            n.kind = AstKind::Star;
        } else if (c == '+') {
            n.kind = AstKind::Plus;
        } else {  // '{'
            size_t brace = pos_ - 1;
            uint32_t lo = read_number(brace);
            if (consume(',')) {
                if (!eof() && peek() == '}')
                    fail_at(brace, "unbounded repeat '{n,}' is not supported");
                uint32_t hi = read_number(brace);
                if (!consume('}')) fail_at(brace, "unterminated repeat bound");
                if (lo > hi) fail_at(brace, "bad repeat bounds");
                n.kind = AstKind::RepeatRange;
                n.min = lo;
                n.max = hi;
            } else {
                if (!consume('}')) fail_at(brace, "unterminated repeat bound");
                n.kind = AstKind::Repeat;
                n.min = lo;
                n.max = lo;
            }
        }
        n.span = {uint32_t(begin), uint32_t(pos_)};
        return n;
    }

    uint32_t read_number(size_t brace) {
        if (eof() || !std::isdigit(peek())) fail_at(brace, "bad repeat bound");
        uint64_t v = 0;
        while (!eof() && std::isdigit(peek())) {
            v = v * 10 + (take() - '0');
            if (v > kMaxRepeatBound)
                fail_at(brace, "repeat bound exceeds supported maximum " +
                                   std::to_string(kMaxRepeatBound));
        }
        return static_cast<uint32_t>(v);
    }

    AstNode atom() {
        size_t begin = pos_;
        uint8_t c = peek();
        switch (c) {
            case '(': {
                ++pos_;
                AstNode inner = alternation();
                if (!consume(')')) fail_at(begin, "unbalanced '('");
                inner.span = {uint32_t(begin), uint32_t(pos_)};
                return inner;
            }
            case '[':
                return char_class();
            case '.': {
                ++pos_;
                AstNode n;
                n.kind = AstKind::Dot;
                n.span = {uint32_t(begin), uint32_t(pos_)};
                return n;
            }
            case '*':
            case '+':
            case '{':
                fail("quantifier without operand");
            case '?':
                fail("unsupported quantifier '?'");
            case '^':
                fail("anchors are not supported ('^')");
            case '$':
                fail("anchors are not supported ('$')");
            case '\\': {
                uint8_t b = escape();
                return literal_node(b, begin);
            }
            default:
                ++pos_;
                return literal_node(c, begin);
        }
    }

    AstNode literal_node(uint8_t b, size_t begin) {
        AstNode n;
        n.kind = AstKind::Literal;
        n.literal = b;
        n.span = {uint32_t(begin), uint32_t(pos_)};
        return n;
    }

    uint8_t escape() {
        size_t begin = pos_;
        ++pos_;  // backslash
        if (eof()) fail_at(begin, "dangling escape");
        uint8_t c = take();
        switch (c) {
            case 'n': return '\n';
            case 't': return '\t';
            case 'r': return '\r';
            case 'f': return '\f';
            case 'v': return '\v';
            case 'a': return '\a';
            case 'e': return 0x1b;
            case '0': return 0;
            case 'x': {
                int hi = hex_digit();
                int lo = hex_digit();
                return static_cast<uint8_t>(hi * 16 + lo);
            }
            default:
                if (c >= '1' && c <= '9')
                    fail_at(begin, "backreferences are not supported");
                if (std::isalnum(c))
                    fail_at(begin, std::string("unsupported escape '\\") +
                                       char(c) + "'");
                return c;  // escaped punctuation is the literal byte
        }
    }

    int hex_digit() {
        if (eof()) fail("bad \\x escape");
        uint8_t c = take();
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        fail_at(pos_ - 1, "bad \\x escape");
    }

    AstNode char_class() {
        size_t begin = pos_;
        ++pos_;  // '['
        AstNode n;
        n.kind = AstKind::Class;
        n.negated = consume('^');
        bool first = true;
        while (true) {
            if (eof()) fail_at(begin, "unterminated character class");
            if (peek() == ']' && !first) break;
            first = false;
            uint8_t lo = class_atom(begin);
            if (!eof() && peek() == '-' && pos_ + 1 < text_.size() &&
                text_[pos_ + 1] != ']') {
                size_t dash = pos_;
                ++pos_;
                uint8_t hi = class_atom(begin);
                if (lo > hi) fail_at(dash, "bad class range");
                for (int b = lo; b <= hi; ++b) n.klass.set(b);
            } else {
                n.klass.set(lo);
            }
        }
        ++pos_;  // ']'
        if (n.klass.none()) fail_at(begin, "empty character class");
        if (n.negated && n.klass.count() == 256)
            fail_at(begin, "class matches no byte after negation");
        n.span = {uint32_t(begin), uint32_t(pos_)};
        return n;
    }

    uint8_t class_atom(size_t class_begin) {
        if (eof()) fail_at(class_begin, "unterminated character class");
        if (peek() == '\\') return escape();
        return take();
    }
};

// --- unparse ---------------------------------------------------------------

enum Level { kAtom, kQuant, kConcat, kUnion };

Level level_of(const AstNode& n) {
    switch (n.kind) {
        case AstKind::Union: return kUnion;
        case AstKind::Concat: return kConcat;
        case AstKind::Star:
        case AstKind::Plus:
        case AstKind::Repeat:
        case AstKind::RepeatRange: return kQuant;
        default: return kAtom;
    }
}

std::string hex_byte(uint8_t b) {
    static const char* digits = "0123456789abcdef";
    std::string s = "\\x";
    s += digits[b >> 4];
    s += digits[b & 0xf];
    return s;
}

std::string escape_class_byte(uint8_t b) {
    if (b == ']' || b == '\\' || b == '^' || b == '-')
        return std::string("\\") + char(b);
    if (!is_printable(b)) return hex_byte(b);
    return std::string(1, char(b));
}

std::string render_class(const AstNode& n) {
    std::string out = "[";
    if (n.negated) out += '^';
    int run_start = -1;
    int prev = -2;
    auto flush = [&](int upto) {
        if (run_start < 0) return;
        int len = upto - run_start + 1;
        out += escape_class_byte(uint8_t(run_start));
        if (len == 2) {
            out += escape_class_byte(uint8_t(upto));
        } else if (len > 2) {
            out += '-';
            out += escape_class_byte(uint8_t(upto));
        }
    };
    for (int b = 0; b < 256; ++b) {
        if (!n.klass.test(b)) continue;
        if (b != prev + 1) {
            flush(prev);
            run_start = b;
        }
        prev = b;
    }
    flush(prev);
    out += ']';
    return out;
}

void render(const AstNode& n, Level parent, std::string& out) {
    bool wrap = level_of(n) > parent;
    if (wrap) out += '(';
    switch (n.kind) {
        case AstKind::Empty:
            out += "()";
            break;
        case AstKind::Literal:
            out += escape_pattern_byte(n.literal);
            break;
        case AstKind::Dot:
            out += '.';
            break;
        case AstKind::Class:
            out += render_class(n);
            break;
        case AstKind::Concat:
            // kQuant context so a nested group concat keeps its parens and the
            // printed form parses back to the same tree.
            for (const auto& c : n.children) render(c, kQuant, out);
            break;
        case AstKind::Union:
            for (size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += '|';
                render(n.children[i], kConcat, out);
            }
            break;
        case AstKind::Star:
            render(n.children[0], kAtom, out);
            out += '*';
            break;
        case AstKind::Plus:
            render(n.children[0], kAtom, out);
            out += '+';
            break;
        case AstKind::Repeat:
            render(n.children[0], kAtom, out);
            out += '{' + std::to_string(n.min) + '}';
            break;
        case AstKind::RepeatRange:
            render(n.children[0], kAtom, out);
            out += '{' + std::to_string(n.min) + ',' + std::to_string(n.max) + '}';
            break;
    }
    if (wrap) out += ')';
}

}  // namespace

AstNode parse_pattern(std::string_view text) { return Parser(text).parse(); }

std::string escape_pattern_byte(uint8_t b) {
    if (is_meta(b)) return std::string("\\") + char(b);
    if (!is_printable(b)) return hex_byte(b);
    return std::string(1, char(b));
}

std::string unparse(const AstNode& n) {
    std::string out;
    render(n, kUnion, out);
    return out;
}

}  // namespace recounter
