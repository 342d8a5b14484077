#ifndef IMPGEN_STORE_HPP
#define IMPGEN_STORE_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impgen/abducibles.hpp"
#include "impgen/core.hpp"
#include "impgen/error.hpp"
#include "impgen/oracle.hpp"

namespace impgen {

/// Total order on the literals that may label tree edges.
class LiteralOrder {
public:
    LiteralOrder() = default;
    explicit LiteralOrder(std::span<const Lit> sequence) {
        for (Lit l : sequence) append(l);
    }

    /// Order for clauses built from hypotheses drawn from `abducibles`: the
    /// complement of each member in member order, then any member not yet
    /// ranked.
    static LiteralOrder for_implicates(const AbducibleSet& abducibles) {
        LiteralOrder o;
        for (Lit l : abducibles.members()) o.append(~l);
        for (Lit l : abducibles.members()) o.append(l);
        return o;
    }

    void append(Lit l) {
        if (rank_.size() <= l.id()) rank_.resize(l.id() + 1, npos);
        if (rank_[l.id()] == npos) rank_[l.id()] = next_++;
    }

    bool contains(Lit l) const noexcept { return l.id() < rank_.size() && rank_[l.id()] != npos; }

    std::size_t rank(Lit l) const {
        if (!contains(l)) throw Error("literal outside the registered table");
        return rank_[l.id()];
    }

    bool less(Lit a, Lit b) const { return rank(a) < rank(b); }

    /// The literals of `c` sorted by this order.
    std::vector<Lit> sorted(const Clause& c) const {
        std::vector<std::pair<std::size_t, Lit>> ranked;
        for (Lit l : c) ranked.emplace_back(rank(l), l);
        std::sort(ranked.begin(), ranked.end());
        std::vector<Lit> out;
        for (const auto& [r, l] : ranked) out.push_back(l);
        return out;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> rank_;
    std::size_t next_ = 0;
};

/// Trie over literals. A node is either ⊥, or a (possibly empty) set of
/// edges each labeled by a literal and leading to a subtree whose literals
/// all come later in the order. Root-to-⊥ paths are the stored clauses.
class ATree {
public:
    ATree() = default;
    static ATree bottom() {
        ATree t;
        t.bottom_ = true;
        return t;
    }

    bool is_bottom() const noexcept { return bottom_; }
    /// An empty edge set (denotes no clauses).
    bool is_empty() const noexcept { return !bottom_ && labels_.empty(); }

    std::size_t degree() const noexcept { return labels_.size(); }
    Lit label(std::size_t i) const { return labels_[i]; }
    const ATree& child(std::size_t i) const { return children_[i]; }
    ATree& child(std::size_t i) { return children_[i]; }

    /// Adds an edge; `sub` must only use literals after `l`. Siblings are
    /// kept sorted by literal id.
    ATree& add_edge(Lit l) { return add_edge(l, ATree{}); }
    ATree& add_edge(Lit l, ATree sub) {
        if (bottom_) throw Error("cannot add an edge below a bottom node");
        auto pos = std::lower_bound(labels_.begin(), labels_.end(), l);
        if (pos != labels_.end() && *pos == l) throw Error("duplicate sibling edge");
        auto i = pos - labels_.begin();
        labels_.insert(pos, l);
        return *children_.insert(children_.begin() + i, std::move(sub));
    }

    void remove_edge(std::size_t i) {
        labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(i));
        children_.erase(children_.begin() + static_cast<std::ptrdiff_t>(i));
    }

    std::optional<std::size_t> find(Lit l) const {
        auto pos = std::lower_bound(labels_.begin(), labels_.end(), l);
        if (pos == labels_.end() || *pos != l) return std::nullopt;
        return static_cast<std::size_t>(pos - labels_.begin());
    }

    void make_bottom() {
        bottom_ = true;
        labels_.clear();
        children_.clear();
    }

    std::size_t node_count() const {
        std::size_t n = 1;
        for (const auto& c : children_) n += c.node_count();
        return n;
    }

    friend bool operator==(const ATree&, const ATree&) = default;

private:
    bool bottom_ = false;
    std::vector<Lit> labels_;
    std::vector<ATree> children_;
};

namespace detail {

inline void collect_clauses(const ATree& t, std::vector<Lit>& path, std::vector<Clause>& out) {
    if (t.is_bottom()) {
        out.emplace_back(path);
        return;
    }
    for (std::size_t i = 0; i < t.degree(); ++i) {
        path.push_back(t.label(i));
        collect_clauses(t.child(i), path, out);
        path.pop_back();
    }
}

inline std::size_t simp_below(ATree& t) {
    std::size_t steps = 0;
    for (std::size_t i = t.degree(); i-- > 0;) {
        steps += simp_below(t.child(i));
        if (t.child(i).is_empty()) {
            t.remove_edge(i);
            ++steps;
        }
    }
    return steps;
}

} // namespace detail

/// The stored clauses, sorted by the clause ordering.
inline std::vector<Clause> clause_set(const ATree& t) {
    std::vector<Clause> out;
    std::vector<Lit> path;
    detail::collect_clauses(t, path, out);
    canonicalize(out);
    return out;
}

struct SimpResult {
    ATree tree;
    std::size_t steps = 0;
};

/// Removes edges into empty subtrees, at every depth, until none remain.
/// Each removed edge is one rewrite step. The root itself is kept.
inline SimpResult simp(ATree t) {
    SimpResult r;
    r.steps = detail::simp_below(t);
    r.tree = std::move(t);
    return r;
}

/// Adds `c` along its order-sorted path, sharing existing prefixes. A stored
/// prefix of `c` already subsumes it, so that case leaves the tree unchanged;
/// a stored extension of `c` is replaced by `c`.
inline void insert(ATree& t, const Clause& c, const LiteralOrder& order) {
    ATree* node = &t;
    for (Lit l : order.sorted(c)) {
        if (node->is_bottom()) return;
        auto i = node->find(l);
        node = i ? &node->child(*i) : &node->add_edge(l);
    }
    node->make_bottom();
}

struct SubsumptionStats {
    std::size_t queries = 0;
    bool uncertain = false; ///< some oracle answer was unknown
};

namespace detail {

inline bool forward_rec(const ATree& t, const Clause& c, Session& bare,
                        std::vector<signed char>& memo, SubsumptionStats& stats) {
    if (t.is_bottom()) return true;
    for (std::size_t i = 0; i < t.degree(); ++i) {
        Lit l = t.label(i);
        if (memo.size() <= l.id()) memo.resize(l.id() + 1, -1);
        if (memo[l.id()] < 0) {
            if (c.contains(l)) {
                memo[l.id()] = 1;
            } else {
                Lit lits[] = {l};
                ScopedFrame f(bare, std::span<const Lit>(lits));
                ++stats.queries;
                auto s = bare.check_sat().status;
                if (s == SatStatus::unknown) stats.uncertain = true;
                memo[l.id()] = s == SatStatus::unsat ? 1 : 0;
            }
        }
        if (memo[l.id()] == 1 && forward_rec(t.child(i), c, bare, memo, stats)) return true;
    }
    return false;
}

inline ATree remove_rec(const ATree& t, Session& bare, std::vector<Lit>& path,
                        std::vector<Clause>* removed, SubsumptionStats& stats) {
    ++stats.queries;
    auto s = bare.check_sat().status;
    if (s == SatStatus::unknown) stats.uncertain = true;
    if (s == SatStatus::unsat) {
        if (removed) collect_clauses(t, path, *removed);
        return ATree{};
    }
    if (t.is_bottom()) return ATree::bottom();
    ATree out;
    for (std::size_t i = 0; i < t.degree(); ++i) {
        Lit l = t.label(i);
        Lit neg[] = {~l};
        ScopedFrame f(bare, std::span<const Lit>(neg));
        path.push_back(l);
        out.add_edge(l, remove_rec(t.child(i), bare, path, removed, stats));
        path.pop_back();
    }
    return out;
}

} // namespace detail

/// True iff some stored clause entails `c` modulo the theory of `bare`.
/// Unknown answers count as non-entailment.
inline bool forward_subsumed(const ATree& t, const Clause& c, Session& bare,
                             SubsumptionStats* stats = nullptr) {
    if (t.is_empty()) return false;
    SubsumptionStats local;
    std::vector<Lit> negated;
    for (Lit l : c) negated.push_back(~l);
    ScopedFrame top(bare, std::span<const Lit>(negated));
    std::vector<signed char> memo;
    return detail::forward_rec(t, c, bare, memo, stats ? *stats : local);
}

/// Drops every stored clause entailed by `premise` (a clause set), then
/// normalizes. Unknown answers keep the subtree. Dropped clauses are
/// appended to `removed` when given.
inline ATree remove_subsumed(const ATree& t, std::span<const Clause> premise, Session& bare,
                             std::vector<Clause>* removed = nullptr,
                             SubsumptionStats* stats = nullptr) {
    SubsumptionStats local;
    ScopedFrame top(bare, premise);
    std::vector<Lit> path;
    ATree out = detail::remove_rec(t, bare, path, removed, stats ? *stats : local);
    return simp(std::move(out)).tree;
}

/// Same, with a conjunction of literals as premise.
inline ATree remove_subsumed(const ATree& t, std::span<const Lit> premise, Session& bare,
                             std::vector<Clause>* removed = nullptr,
                             SubsumptionStats* stats = nullptr) {
    std::vector<Clause> units;
    for (Lit l : premise) units.push_back(Clause{l});
    return remove_subsumed(t, std::span<const Clause>(units), bare, removed, stats);
}

struct AddResult {
    bool accepted = false;
    std::vector<Clause> removed;
};

/// Inserts `c` unless it is a tautology or already entailed by a stored
/// clause; stored clauses that `c` entails are removed first.
inline AddResult add_minimal(ATree& t, const Clause& c, const LiteralOrder& order, Session& bare,
                             SubsumptionStats* stats = nullptr) {
    AddResult r;
    auto taut = is_tautology(bare, c);
    if (taut == Entailment::unknown && stats) stats->uncertain = true;
    if (taut == Entailment::yes) return r;
    if (forward_subsumed(t, c, bare, stats)) return r;
    Clause premise[] = {c};
    t = remove_subsumed(t, std::span<const Clause>(premise), bare, &r.removed, stats);
    insert(t, c, order);
    r.accepted = true;
    return r;
}

/// Indented edge listing, one literal per line, `⊥` marking stored clauses.
inline std::string debug_dump(const ATree& t, const LiteralTable& table, std::size_t indent = 0) {
    std::string out;
    if (t.is_bottom()) return std::string(indent, ' ') + "_|_\n";
    for (std::size_t i = 0; i < t.degree(); ++i) {
        out += std::string(indent, ' ') + table.format(t.label(i)) + "\n";
        out += debug_dump(t.child(i), table, indent + 2);
    }
    return out;
}

/// An A-tree with its order and an oracle session for theory-aware
/// subsumption. Keeps the stored set minimal as clauses stream in.
class ImplicateStore {
public:
    ImplicateStore(LiteralOrder order, Session& bare) : order_(std::move(order)), bare_(&bare) {}

    AddResult add(const Clause& c) { return add_minimal(tree_, c, order_, *bare_, &stats_); }

    std::vector<Clause> clauses() const { return clause_set(tree_); }
    std::size_t size() const { return clauses().size(); }

    /// One clause per line, sorted by the clause ordering.
    std::string dump(const LiteralTable& table) const {
        std::string out;
        for (const auto& c : clauses()) out += format_clause(table, c) + "\n";
        return out;
    }

    const ATree& tree() const noexcept { return tree_; }
    const LiteralOrder& order() const noexcept { return order_; }
    const SubsumptionStats& stats() const noexcept { return stats_; }

private:
    LiteralOrder order_;
    Session* bare_;
    ATree tree_;
    SubsumptionStats stats_;
};

} // namespace impgen

#endif // IMPGEN_STORE_HPP
