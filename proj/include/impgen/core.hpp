#ifndef IMPGEN_CORE_HPP
#define IMPGEN_CORE_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "impgen/error.hpp"
#include "impgen/sexpr.hpp"

namespace impgen {

/// A literal handle: atom index in the low-order-bit-free part, polarity in
/// bit 0 (1 = negative). Complementation is a bit flip.
class Lit {
public:
    constexpr Lit() = default;
    constexpr explicit Lit(std::uint32_t id) : id_(id) {}
    static constexpr Lit make(std::uint32_t atom, bool negative) {
        return Lit((atom << 1) | (negative ? 1u : 0u));
    }

    constexpr std::uint32_t id() const noexcept { return id_; }
    constexpr std::uint32_t atom() const noexcept { return id_ >> 1; }
    constexpr bool negative() const noexcept { return id_ & 1u; }
    constexpr Lit complement() const noexcept { return Lit(id_ ^ 1u); }
    constexpr Lit operator~() const noexcept { return complement(); }

    friend constexpr auto operator<=>(Lit, Lit) = default;

private:
    std::uint32_t id_ = 0;
};

inline Lit complement(Lit l) noexcept { return l.complement(); }

/// Registry of atoms. Append-only; literal ids are dense (2 per atom).
class LiteralTable {
public:
    /// Registers `term` (stripping leading `not`s into the polarity).
    Lit intern(const SExpr& term) {
        const SExpr* t = &term;
        bool negative = false;
        while (t->is_app("not")) {
            if (t->size() != 2) throw ParseError("'not' expects one argument: " + term.str());
            negative = !negative;
            t = &(*t)[1];
        }
        return Lit::make(intern_atom(*t), negative);
    }

    Lit intern(std::string_view text) { return intern(parse_sexpr(text)); }

    std::uint32_t intern_atom(const SExpr& atom) {
        std::string key = atom.str();
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(atoms_.size());
        atoms_.push_back(atom);
        texts_.push_back(key);
        index_.emplace(std::move(key), id);
        return id;
    }

    std::optional<Lit> find(const SExpr& term) const {
        const SExpr* t = &term;
        bool negative = false;
        while (t->is_app("not") && t->size() == 2) {
            negative = !negative;
            t = &(*t)[1];
        }
        auto it = index_.find(t->str());
        if (it == index_.end()) return std::nullopt;
        return Lit::make(it->second, negative);
    }

    std::size_t atom_count() const noexcept { return atoms_.size(); }
    /// Upper bound on literal ids, usable to size per-literal arrays.
    std::size_t literal_bound() const noexcept { return 2 * atoms_.size(); }
    bool contains(Lit l) const noexcept { return l.atom() < atoms_.size(); }

    const SExpr& atom_expr(std::uint32_t atom) const { return atoms_.at(atom); }
    const std::string& atom_text(std::uint32_t atom) const { return texts_.at(atom); }

    /// Term syntax: the atom, or `(not atom)`.
    std::string format(Lit l) const {
        const std::string& a = atom_text(l.atom());
        return l.negative() ? "(not " + a + ")" : a;
    }
    SExpr expr(Lit l) const {
        const SExpr& a = atom_expr(l.atom());
        return l.negative() ? SExpr::list({SExpr::atom("not"), a}) : a;
    }

private:
    std::vector<SExpr> atoms_;
    std::vector<std::string> texts_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// A duplicate-free disjunction of literals, kept sorted by id.
/// The empty clause denotes falsity.
class Clause {
public:
    Clause() = default;
    Clause(std::initializer_list<Lit> lits) : lits_(lits) { normalize(); }
    explicit Clause(std::vector<Lit> lits) : lits_(std::move(lits)) { normalize(); }
    template <class It>
    Clause(It first, It last) : lits_(first, last) {
        normalize();
    }

    std::span<const Lit> literals() const noexcept { return lits_; }
    auto begin() const noexcept { return lits_.begin(); }
    auto end() const noexcept { return lits_.end(); }
    std::size_t size() const noexcept { return lits_.size(); }
    bool empty() const noexcept { return lits_.empty(); }

    bool contains(Lit l) const { return std::binary_search(lits_.begin(), lits_.end(), l); }

    bool subset_of(const Clause& other) const {
        return std::includes(other.lits_.begin(), other.lits_.end(), lits_.begin(), lits_.end());
    }

    /// True when the clause holds some literal together with its complement.
    bool has_complementary_pair() const {
        for (std::size_t i = 0; i + 1 < lits_.size(); ++i)
            if (lits_[i].atom() == lits_[i + 1].atom()) return true;
        return false;
    }

    Clause with(Lit l) const {
        Clause c = *this;
        auto it = std::lower_bound(c.lits_.begin(), c.lits_.end(), l);
        if (it == c.lits_.end() || *it != l) c.lits_.insert(it, l);
        return c;
    }

    friend bool operator==(const Clause&, const Clause&) = default;

private:
    void normalize() {
        std::sort(lits_.begin(), lits_.end());
        lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
    }

    std::vector<Lit> lits_;
};

/// The clause ordering: by cardinality, ties broken lexicographically on the
/// sorted literal ids. Agrees with strict inclusion.
inline std::strong_ordering compare(const Clause& c, const Clause& d) {
    if (auto cmp = c.size() <=> d.size(); cmp != 0) return cmp;
    return std::lexicographical_compare_three_way(c.begin(), c.end(), d.begin(), d.end());
}

struct ClauseLess {
    bool operator()(const Clause& c, const Clause& d) const { return compare(c, d) < 0; }
};

struct ClauseHash {
    std::size_t operator()(const Clause& c) const noexcept {
        std::size_t h = 0xcbf29ce484222325ull;
        for (Lit l : c) h = (h ^ l.id()) * 0x100000001b3ull;
        return h;
    }
};

/// The clause made of the complements of `hypotheses`.
inline Clause clause_of_hypotheses(std::span<const Lit> hypotheses) {
    std::vector<Lit> lits;
    lits.reserve(hypotheses.size());
    for (Lit l : hypotheses) lits.push_back(~l);
    return Clause(std::move(lits));
}

/// The set (sorted) of complements of the literals of `c`.
inline std::vector<Lit> hypotheses_of_clause(const Clause& c) {
    std::vector<Lit> out;
    out.reserve(c.size());
    for (Lit l : c) out.push_back(~l);
    std::sort(out.begin(), out.end());
    return out;
}

/// `false` for the empty clause, `(or l1 ... ln)` otherwise.
inline std::string format_clause(const LiteralTable& table, const Clause& c) {
    if (c.empty()) return "false";
    std::string out = "(or";
    for (Lit l : c) {
        out += ' ';
        out += table.format(l);
    }
    out += ')';
    return out;
}

/// A conjunction of literals in term syntax (`true` when empty).
inline std::string format_conjunction(const LiteralTable& table, std::span<const Lit> lits) {
    if (lits.empty()) return "true";
    if (lits.size() == 1) return table.format(lits.front());
    std::string out = "(and";
    for (Lit l : lits) {
        out += ' ';
        out += table.format(l);
    }
    out += ')';
    return out;
}

/// Sorts clauses by the clause ordering and removes exact duplicates.
inline void canonicalize(std::vector<Clause>& clauses) {
    std::sort(clauses.begin(), clauses.end(), ClauseLess{});
    clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
}

} // namespace impgen

#endif // IMPGEN_CORE_HPP
