#ifndef IMPGEN_SEXPR_HPP
#define IMPGEN_SEXPR_HPP

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "impgen/error.hpp"

namespace impgen {

/// An SMT-LIB s-expression: either an atom (symbol, numeral, string,
/// keyword; kept verbatim) or a list.
class SExpr {
public:
    SExpr() = default;

    static SExpr atom(std::string text) {
        SExpr e;
        e.text_ = std::move(text);
        return e;
    }
    static SExpr list(std::vector<SExpr> items = {}) {
        SExpr e;
        e.is_list_ = true;
        e.items_ = std::move(items);
        return e;
    }

    bool is_atom() const noexcept { return !is_list_; }
    bool is_list() const noexcept { return is_list_; }

    const std::string& text() const noexcept { return text_; }
    const std::vector<SExpr>& items() const noexcept { return items_; }
    std::vector<SExpr>& items() noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    const SExpr& operator[](std::size_t i) const { return items_.at(i); }

    /// True for a list whose first item is the atom `head`.
    bool is_app(std::string_view head) const {
        return is_list_ && !items_.empty() && items_.front().is_atom() &&
               items_.front().text_ == head;
    }
    /// Head symbol of an application, empty otherwise.
    std::string_view head() const {
        if (is_list_ && !items_.empty() && items_.front().is_atom())
            return items_.front().text_;
        return {};
    }

    std::string str() const {
        std::string out;
        print(out);
        return out;
    }

    void print(std::string& out) const {
        if (!is_list_) {
            out += text_;
            return;
        }
        out += '(';
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (i) out += ' ';
            items_[i].print(out);
        }
        out += ')';
    }

    friend bool operator==(const SExpr& a, const SExpr& b) {
        return a.is_list_ == b.is_list_ && a.text_ == b.text_ && a.items_ == b.items_;
    }

private:
    bool is_list_ = false;
    std::string text_;
    std::vector<SExpr> items_;
};

/// Reads s-expressions from a buffer, tracking line numbers for errors.
class SExprReader {
public:
    explicit SExprReader(std::string_view text, std::size_t first_line = 1)
        : text_(text), line_(first_line) {}

    /// Next expression, or nullopt at end of input.
    std::optional<SExpr> next() {
        skip_space();
        if (pos_ >= text_.size()) return std::nullopt;
        return read();
    }

    std::size_t line() const noexcept { return line_; }

    std::vector<SExpr> read_all() {
        std::vector<SExpr> out;
        while (auto e = next()) out.push_back(std::move(*e));
        return out;
    }

private:
    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    SExpr read() {
        char c = text_[pos_];
        if (c == ')') throw ParseError("unexpected ')'", line_);
        if (c == '(') {
            std::size_t open_line = line_;
            ++pos_;
            std::vector<SExpr> items;
            for (;;) {
                skip_space();
                if (pos_ >= text_.size()) throw ParseError("unterminated list", open_line);
                if (text_[pos_] == ')') {
                    ++pos_;
                    return SExpr::list(std::move(items));
                }
                items.push_back(read());
            }
        }
        if (c == '"') return SExpr::atom(read_delimited('"'));
        if (c == '|') return SExpr::atom(read_delimited('|'));
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char d = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' ||
                d == '"' || d == '|')
                break;
            ++pos_;
        }
        return SExpr::atom(std::string(text_.substr(start, pos_ - start)));
    }

    // Strings use "" as the escaped quote; quoted symbols cannot contain '|'.
    std::string read_delimited(char delim) {
        std::size_t open_line = line_;
        std::string out(1, delim);
        ++pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_++];
            if (c == '\n') ++line_;
            out += c;
            if (c == delim) {
                if (delim == '"' && pos_ < text_.size() && text_[pos_] == '"') {
                    out += text_[pos_++];
                    continue;
                }
                return out;
            }
        }
        throw ParseError(delim == '"' ? "unterminated string" : "unterminated quoted symbol",
                         open_line);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

/// Parses exactly one expression from `text`.
inline SExpr parse_sexpr(std::string_view text, std::size_t line = 1) {
    SExprReader reader(text, line);
    auto e = reader.next();
    if (!e) throw ParseError("empty input", line);
    if (reader.next()) throw ParseError("trailing input after expression", reader.line());
    return std::move(*e);
}

inline std::vector<SExpr> parse_sexprs(std::string_view text) {
    return SExprReader(text).read_all();
}

} // namespace impgen

#endif // IMPGEN_SEXPR_HPP
