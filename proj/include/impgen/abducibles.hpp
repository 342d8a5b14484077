#ifndef IMPGEN_ABDUCIBLES_HPP
#define IMPGEN_ABDUCIBLES_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "impgen/core.hpp"
#include "impgen/error.hpp"
#include "impgen/oracle.hpp"
#include "impgen/problem.hpp"
#include "impgen/sexpr.hpp"

namespace impgen {

/// The ordered set of candidate hypothesis literals. The member order is the
/// total order used to avoid enumerating a hypothesis set twice.
class AbducibleSet {
public:
    enum class Origin { generated, user_supplied };

    AbducibleSet() = default;
    AbducibleSet(std::vector<Lit> members, Origin origin) : origin_(origin) {
        for (Lit l : members) add(l);
    }

    /// Appends `l`; returns false if it was already a member.
    bool add(Lit l) {
        if (rank_.size() <= l.id()) rank_.resize(l.id() + 1, npos);
        if (rank_[l.id()] != npos) return false;
        rank_[l.id()] = members_.size();
        members_.push_back(l);
        return true;
    }

    const std::vector<Lit>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    Origin origin() const noexcept { return origin_; }
    void set_origin(Origin o) noexcept { origin_ = o; }

    bool contains(Lit l) const noexcept { return l.id() < rank_.size() && rank_[l.id()] != npos; }
    /// Position in the order; only meaningful for members.
    std::size_t rank(Lit l) const { return rank_.at(l.id()); }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<Lit> members_;
    std::vector<std::size_t> rank_;
    Origin origin_ = Origin::generated;
};

struct GenerationOptions {
    /// Maximal term height; constants have height 0.
    unsigned depth = 1;
    /// Height-0 terms, as term text. Empty means every declared free constant.
    std::vector<std::string> seeds;
    /// Extra height-0 terms appended after the seeds (e.g. numerals).
    std::vector<std::string> extra_terms;
    /// Also emit (<= s t) and (>= s t) atoms for Int and Real terms.
    bool inequalities = false;
};

namespace detail {

struct TypedTerm {
    SExpr expr;
    std::string text;
    std::string sort;
    unsigned height;
};

} // namespace detail

/// Ground terms of height ≤ `depth`, ordered by height, then by function
/// symbol declaration order, then by argument tuple.
inline std::vector<detail::TypedTerm> enumerate_terms(const Signature& sig,
                                                      const GenerationOptions& opt) {
    std::vector<detail::TypedTerm> terms;
    std::unordered_set<std::string> seen;
    auto push = [&](SExpr e, unsigned height) {
        auto sort = sig.sort_of(e);
        if (!sort) return; // sort-incompatible or unknown: skipped
        std::string text = e.str();
        if (!seen.insert(text).second) return;
        terms.push_back({std::move(e), std::move(text), std::move(*sort), height});
    };
    if (opt.seeds.empty()) {
        for (const auto* c : sig.constants()) push(SExpr::atom(c->name), 0);
    } else {
        for (const auto& s : opt.seeds) push(parse_sexpr(s), 0);
    }
    for (const auto& s : opt.extra_terms) push(parse_sexpr(s), 0);

    std::size_t level_begin = 0;
    for (unsigned h = 1; h <= opt.depth; ++h) {
        std::size_t level_end = terms.size();
        for (const auto& f : sig.symbols()) {
            if (f.arity() == 0 || f.defined) continue;
            // Candidate arguments per position: every term of the right sort
            // built so far (height < h).
            std::vector<std::vector<std::size_t>> choices(f.arity());
            bool feasible = true;
            for (std::size_t i = 0; i < f.arity(); ++i) {
                for (std::size_t t = 0; t < level_end; ++t)
                    if (terms[t].sort == f.arg_sorts[i]) choices[i].push_back(t);
                if (choices[i].empty()) feasible = false;
            }
            if (!feasible) continue;
            std::vector<std::size_t> idx(f.arity(), 0);
            auto advance = [&] {
                for (std::size_t pos = f.arity(); pos-- > 0;) {
                    if (++idx[pos] < choices[pos].size()) return true;
                    idx[pos] = 0;
                }
                return false;
            };
            do {
                // Require one argument of height exactly h-1 so that each term
                // is produced at its own height.
                bool fresh = false;
                for (std::size_t i = 0; i < f.arity(); ++i)
                    if (choices[i][idx[i]] >= level_begin) fresh = true;
                if (!fresh) continue;
                std::vector<SExpr> items{SExpr::atom(f.name)};
                for (std::size_t i = 0; i < f.arity(); ++i)
                    items.push_back(terms[choices[i][idx[i]]].expr);
                push(SExpr::list(std::move(items)), h);
            } while (advance());
        }
        level_begin = level_end;
        if (terms.size() == level_end) break;
    }
    return terms;
}

/// All (dis)equalities between distinct well-sorted ground terms of height ≤
/// depth, for non-Bool sorts. Pairs are unordered: the lexicographically
/// smaller term is written first. Output order: for each term t_j in
/// enumeration order, pairs (t_i, t_j) for i < j, positive literal first.
inline AbducibleSet generate_abducibles(const Signature& sig, LiteralTable& table,
                                        const GenerationOptions& opt) {
    auto terms = enumerate_terms(sig, opt);
    AbducibleSet out;
    out.set_origin(AbducibleSet::Origin::generated);
    auto emit = [&](std::string_view rel, const detail::TypedTerm& a, const detail::TypedTerm& b) {
        const auto& [lo, hi] = a.text <= b.text ? std::tie(a, b) : std::tie(b, a);
        auto atom = table.intern_atom(SExpr::list({SExpr::atom(std::string(rel)), lo.expr, hi.expr}));
        out.add(Lit::make(atom, false));
        out.add(Lit::make(atom, true));
    };
    for (std::size_t j = 0; j < terms.size(); ++j) {
        if (terms[j].sort == "Bool") continue;
        for (std::size_t i = 0; i < j; ++i) {
            if (terms[i].sort != terms[j].sort) continue;
            emit("=", terms[i], terms[j]);
            if (opt.inequalities && (terms[j].sort == "Int" || terms[j].sort == "Real")) {
                emit("<=", terms[i], terms[j]);
                emit(">=", terms[i], terms[j]);
            }
        }
    }
    return out;
}

/// Raised when a supplied abducible is unsatisfiable on its own.
class UnsatisfiableAbducible : public Error {
public:
    UnsatisfiableAbducible(std::size_t line, const std::string& lit)
        : Error("line " + std::to_string(line) + ": abducible " + lit +
                " is unsatisfiable in the background theory"),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parses an abducible file: one literal per line in term syntax, `(not ...)`
/// for negatives, `#` comment lines and blank lines ignored. Line order
/// defines the order. Duplicates keep their first position.
/// When `bare` is given, each literal is checked satisfiable on its own.
inline AbducibleSet load_abducibles(std::string_view text, LiteralTable& table,
                                    Session* bare = nullptr) {
    AbducibleSet out;
    out.set_origin(AbducibleSet::Origin::user_supplied);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') continue;
        SExpr term = parse_sexpr(line, line_no);
        Lit l = table.intern(term);
        if (out.contains(l)) continue;
        if (bare) {
            Lit lits[] = {l};
            ScopedFrame frame(*bare, std::span<const Lit>(lits));
            if (bare->check_sat().unsat()) throw UnsatisfiableAbducible(line_no, table.format(l));
        }
        out.add(l);
    }
    return out;
}

/// One literal per line, in order; loads back to the same set.
inline std::string print_abducibles(const AbducibleSet& a, const LiteralTable& table) {
    std::string out;
    for (Lit l : a.members()) out += table.format(l) + "\n";
    return out;
}

/// Drops members that are unsatisfiable on their own (unknown keeps them).
inline AbducibleSet filter_satisfiable(const AbducibleSet& a, Session& bare) {
    AbducibleSet out;
    out.set_origin(a.origin());
    for (Lit l : a.members()) {
        Lit lits[] = {l};
        ScopedFrame frame(bare, std::span<const Lit>(lits));
        if (!bare.check_sat().unsat()) out.add(l);
    }
    return out;
}

} // namespace impgen

#endif // IMPGEN_ABDUCIBLES_HPP
