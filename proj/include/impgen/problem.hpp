#ifndef IMPGEN_PROBLEM_HPP
#define IMPGEN_PROBLEM_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "impgen/core.hpp"
#include "impgen/error.hpp"
#include "impgen/sexpr.hpp"

namespace impgen {

struct FunctionSymbol {
    std::string name;
    std::vector<std::string> arg_sorts;
    std::string result_sort;
    bool defined = false; // introduced by define-fun (a macro, not a free symbol)

    std::size_t arity() const noexcept { return arg_sorts.size(); }
};

/// Sorted signature of a problem: declared sorts, symbols and the logic tag.
class Signature {
public:
    std::string logic;

    static bool builtin_sort(std::string_view s) {
        return s == "Bool" || s == "Int" || s == "Real";
    }

    void add_sort(std::string name) {
        if (has_sort(name)) throw ParseError("sort declared twice: " + name);
        sorts_.push_back(std::move(name));
    }

    void add_symbol(FunctionSymbol f) {
        if (find(f.name)) throw ParseError("symbol declared twice: " + f.name);
        for (const auto& s : f.arg_sorts) check_sort(s);
        check_sort(f.result_sort);
        symbols_.push_back(std::move(f));
    }

    bool has_sort(std::string_view s) const {
        return builtin_sort(s) || std::find(sorts_.begin(), sorts_.end(), s) != sorts_.end();
    }

    const FunctionSymbol* find(std::string_view name) const {
        for (const auto& f : symbols_)
            if (f.name == name) return &f;
        return nullptr;
    }

    const std::vector<std::string>& sorts() const noexcept { return sorts_; }
    const std::vector<FunctionSymbol>& symbols() const noexcept { return symbols_; }

    /// Free constants (arity 0, not macros) in declaration order.
    std::vector<const FunctionSymbol*> constants() const {
        std::vector<const FunctionSymbol*> out;
        for (const auto& f : symbols_)
            if (f.arity() == 0 && !f.defined) out.push_back(&f);
        return out;
    }

    /// Best-effort sort of a ground term; nullopt when it cannot be told.
    std::optional<std::string> sort_of(const SExpr& t) const {
        if (t.is_atom()) {
            const std::string& s = t.text();
            if (s == "true" || s == "false") return "Bool";
            if (!s.empty() && std::isdigit(static_cast<unsigned char>(s[0])))
                return s.find('.') == std::string::npos ? "Int" : "Real";
            if (auto* f = find(s)) return f->result_sort;
            return std::nullopt;
        }
        auto h = t.head();
        if (h.empty() || t.size() < 2) return std::nullopt;
        static constexpr std::string_view boolean_ops[] = {
            "not", "and", "or", "=>", "xor", "=", "distinct", "<", "<=", ">", ">="};
        for (auto op : boolean_ops)
            if (h == op) return "Bool";
        if (h == "+" || h == "-" || h == "*" || h == "abs") return sort_of(t[1]);
        if (h == "div" || h == "mod") return "Int";
        if (h == "/" || h == "to_real") return "Real";
        if (h == "to_int") return "Int";
        if (h == "ite" && t.size() == 4) return sort_of(t[2]);
        if (auto* f = find(h)) return f->result_sort;
        return std::nullopt;
    }

private:
    void check_sort(const std::string& s) const {
        // Compound sorts like (Array Int Int) are accepted without inspection.
        if (!s.empty() && s.front() == '(') return;
        if (!has_sort(s)) throw ParseError("undeclared sort: " + s);
    }

    std::vector<std::string> sorts_;
    std::vector<FunctionSymbol> symbols_;
};

/// A quantifier-free problem read from an SMT-LIB script. Declarations are
/// kept verbatim so they can be replayed to an external solver.
struct Problem {
    Signature signature;
    std::vector<SExpr> declarations;
    std::vector<SExpr> assertions;
};

namespace detail {

inline std::string sort_text(const SExpr& e) { return e.str(); }

inline const std::string& symbol_arg(const SExpr& cmd, std::size_t i, std::size_t line) {
    if (cmd.size() <= i || !cmd[i].is_atom())
        throw ParseError("malformed command: " + cmd.str(), line);
    return cmd[i].text();
}

} // namespace detail

/// Parses an SMT-LIB script. Informational commands are ignored; anything
/// that would change solver state beyond declarations and assertions is
/// rejected.
inline Problem parse_problem(std::string_view text) {
    Problem p;
    SExprReader reader(text);
    for (;;) {
        std::size_t line = reader.line();
        auto cmd = reader.next();
        if (!cmd) break;
        line = std::max(line, reader.line());
        if (!cmd->is_list() || cmd->size() == 0 || !(*cmd)[0].is_atom())
            throw ParseError("expected a command, got " + cmd->str(), line);
        auto head = cmd->head();
        if (head == "set-logic") {
            p.signature.logic = detail::symbol_arg(*cmd, 1, line);
        } else if (head == "declare-sort") {
            p.signature.add_sort(detail::symbol_arg(*cmd, 1, line));
            p.declarations.push_back(*cmd);
        } else if (head == "declare-const") {
            if (cmd->size() != 3) throw ParseError("malformed declare-const", line);
            FunctionSymbol f{detail::symbol_arg(*cmd, 1, line), {}, detail::sort_text((*cmd)[2])};
            try {
                p.signature.add_symbol(std::move(f));
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line);
            }
            p.declarations.push_back(*cmd);
        } else if (head == "declare-fun" || head == "define-fun") {
            bool define = head == "define-fun";
            if (cmd->size() != (define ? 5u : 4u) || !(*cmd)[2].is_list())
                throw ParseError("malformed " + std::string(head), line);
            FunctionSymbol f{detail::symbol_arg(*cmd, 1, line), {}, detail::sort_text((*cmd)[3]),
                             define};
            for (const auto& a : (*cmd)[2].items()) {
                if (define) {
                    if (!a.is_list() || a.size() != 2)
                        throw ParseError("malformed define-fun parameter", line);
                    f.arg_sorts.push_back(detail::sort_text(a[1]));
                } else {
                    f.arg_sorts.push_back(detail::sort_text(a));
                }
            }
            try {
                p.signature.add_symbol(std::move(f));
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line);
            }
            p.declarations.push_back(*cmd);
        } else if (head == "define-sort") {
            p.signature.add_sort(detail::symbol_arg(*cmd, 1, line));
            p.declarations.push_back(*cmd);
        } else if (head == "assert") {
            if (cmd->size() != 2) throw ParseError("malformed assert", line);
            p.assertions.push_back((*cmd)[1]);
        } else if (head == "set-info" || head == "set-option" || head == "check-sat" ||
                   head == "get-model" || head == "get-info" || head == "exit" ||
                   head == "get-value" || head == "echo") {
            continue;
        } else {
            throw ParseError("unsupported command: " + std::string(head), line);
        }
    }
    return p;
}

/// Clauses of the problem that are disjunctions of literals (the remaining
/// assertions are ignored). Used for syntactic unit propagation.
inline std::vector<Clause> clausal_view(const Problem& p, LiteralTable& table) {
    std::vector<Clause> out;
    auto literal_clause = [&](const SExpr& e) -> std::optional<Clause> {
        std::vector<Lit> lits;
        auto add = [&](const SExpr& x) {
            const SExpr* core = &x;
            while (core->is_app("not") && core->size() == 2) core = &(*core)[1];
            static constexpr std::string_view connectives[] = {"and", "or", "=>", "xor", "ite"};
            for (auto c : connectives)
                if (core->is_app(c)) return false;
            lits.push_back(table.intern(x));
            return true;
        };
        if (e.is_app("or")) {
            for (std::size_t i = 1; i < e.size(); ++i)
                if (!add(e[i])) return std::nullopt;
        } else if (!add(e)) {
            return std::nullopt;
        }
        return Clause(std::move(lits));
    };
    std::vector<const SExpr*> todo;
    for (const auto& a : p.assertions) todo.push_back(&a);
    while (!todo.empty()) {
        const SExpr* e = todo.back();
        todo.pop_back();
        if (e->is_app("and")) {
            for (std::size_t i = 1; i < e->size(); ++i) todo.push_back(&(*e)[i]);
            continue;
        }
        if (auto c = literal_clause(*e)) out.push_back(std::move(*c));
    }
    return out;
}

} // namespace impgen

#endif // IMPGEN_PROBLEM_HPP
