#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace recounter {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error in a pattern; offset is a byte index into the pattern text.
class ParseError : public Error {
public:
    ParseError(size_t offset, std::string reason)
        : Error(reason + " at offset " + std::to_string(offset)),
          offset_(offset), reason_(std::move(reason)) {}
    size_t offset() const { return offset_; }
    const std::string& reason() const { return reason_; }

private:
    size_t offset_;
    std::string reason_;
};

// Pattern parses but does not fit a supported rule shape.
class ShapeError : public Error {
public:
    ShapeError(size_t offset, std::string reason)
        : Error(reason + " at offset " + std::to_string(offset)),
          offset_(offset), reason_(std::move(reason)) {}
    size_t offset() const { return offset_; }
    const std::string& reason() const { return reason_; }

private:
    size_t offset_;
    std::string reason_;
};

// Aggregated per-line failures from a ruleset file.
class RulesetError : public Error {
public:
    struct Item {
        int line;       // 1-based, 0 when not line-specific
        size_t offset;  // byte offset within the line
        std::string message;
    };

    explicit RulesetError(std::vector<Item> items)
        : Error(format(items)), items_(std::move(items)) {}
    const std::vector<Item>& items() const { return items_; }

private:
    static std::string format(const std::vector<Item>& items) {
        std::string out;
        for (const auto& it : items) {
            if (!out.empty()) out += '\n';
            if (it.line > 0)
                out += "line " + std::to_string(it.line) + ", offset " +
                       std::to_string(it.offset) + ": " + it.message;
            else
                out += it.message;
        }
        return out;
    }
    std::vector<Item> items_;
};

// A construction pass exceeded its configured cap.
class ResourceLimitError : public Error {
public:
    ResourceLimitError(std::string what_exceeded, size_t limit)
        : Error(what_exceeded + " exceeds cap " + std::to_string(limit)),
          limit_(limit) {}
    size_t limit() const { return limit_; }

private:
    size_t limit_;
};

// Compiled-machine file is corrupt or has an unknown version.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Enumeration request larger than the configured word budget.
class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace recounter
