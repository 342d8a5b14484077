#ifndef IMPGEN_ENGINE_HPP
#define IMPGEN_ENGINE_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "impgen/abducibles.hpp"
#include "impgen/core.hpp"
#include "impgen/oracle.hpp"

namespace impgen {

// ---------------------------------------------------------------------------
// Result predicates

/// A filter on hypothesis sets that is closed under subsets, so a branch can
/// be abandoned as soon as the predicate fails on the current hypotheses.
class ResultPredicate {
public:
    struct Always {};
    struct SizeLimit {
        std::size_t k;
    };
    /// Holds on M when `formula` (a clause set) entails every literal of M.
    struct Implicant {
        std::vector<Clause> formula;
    };
    struct All {
        std::vector<ResultPredicate> parts;
    };
    struct Any {
        std::vector<ResultPredicate> parts;
    };
    using Kind = std::variant<Always, SizeLimit, Implicant, All, Any>;

    ResultPredicate() = default;
    ResultPredicate(Kind k) : kind_(std::move(k)) {}

    static ResultPredicate always() { return {Always{}}; }
    static ResultPredicate size_limit(std::size_t k) { return {SizeLimit{k}}; }
    static ResultPredicate implicant(std::vector<Clause> formula) {
        return {Implicant{std::move(formula)}};
    }
    static ResultPredicate all_of(std::vector<ResultPredicate> ps) { return {All{std::move(ps)}}; }
    static ResultPredicate any_of(std::vector<ResultPredicate> ps) { return {Any{std::move(ps)}}; }

    const Kind& kind() const noexcept { return kind_; }

    bool is_always() const noexcept { return std::holds_alternative<Always>(kind_); }

    /// Evaluates the predicate on `hypotheses`. Implicant checks need `bare`;
    /// an unknown answer (or a missing session) counts as holding, which
    /// keeps the branch.
    bool holds(std::span<const Lit> hypotheses, Session* bare = nullptr) const {
        return std::visit(
            [&](const auto& k) -> bool {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Always>) {
                    return true;
                } else if constexpr (std::is_same_v<T, SizeLimit>) {
                    return hypotheses.size() <= k.k;
                } else if constexpr (std::is_same_v<T, Implicant>) {
                    if (!bare) return true;
                    for (Lit l : hypotheses) {
                        std::vector<Clause> frame = k.formula;
                        frame.push_back(Clause{~l});
                        ScopedFrame scope(*bare, std::span<const Clause>(frame));
                        if (bare->check_sat().sat()) return false;
                    }
                    return true;
                } else if constexpr (std::is_same_v<T, All>) {
                    return std::all_of(k.parts.begin(), k.parts.end(),
                                       [&](const auto& p) { return p.holds(hypotheses, bare); });
                } else {
                    return std::any_of(k.parts.begin(), k.parts.end(),
                                       [&](const auto& p) { return p.holds(hypotheses, bare); });
                }
            },
            kind_);
    }

private:
    Kind kind_ = Always{};
};

inline bool predicate_holds(const ResultPredicate& p, std::span<const Lit> hypotheses,
                            Session* bare = nullptr) {
    return p.holds(hypotheses, bare);
}

// ---------------------------------------------------------------------------
// Candidate handling

/// Literal set used to select which candidates may be tried as the next
/// hypothesis: l is tried only if its complement is in the set.
class CompatibleSet {
public:
    enum class Source { model, full };

    CompatibleSet() = default;

    /// complements(A): every candidate remains allowed.
    static CompatibleSet full(std::span<const Lit> candidates) {
        CompatibleSet s;
        s.source_ = Source::full;
        for (Lit l : candidates) s.insert(~l);
        return s;
    }

    void insert(Lit l) {
        if (member_.size() <= l.id()) member_.resize(l.id() + 1, false);
        member_[l.id()] = true;
    }
    bool contains(Lit l) const noexcept { return l.id() < member_.size() && member_[l.id()]; }

    Source source() const noexcept { return source_; }
    void set_source(Source s) noexcept { source_ = s; }

    std::vector<Lit> literals() const {
        std::vector<Lit> out;
        for (std::size_t i = 0; i < member_.size(); ++i)
            if (member_[i]) out.push_back(Lit(static_cast<std::uint32_t>(i)));
        return out;
    }

private:
    std::vector<bool> member_;
    Source source_ = Source::model;
};

/// Literals true in the reported model, plus the complement of every
/// candidate whose atom the model leaves undetermined. Without a model,
/// falls back to complements(candidates).
inline CompatibleSet compatible_from_model(const SatResult& res, std::span<const Lit> candidates) {
    if (!res.model_literals) return CompatibleSet::full(candidates);
    CompatibleSet s;
    std::vector<bool> determined;
    for (Lit l : *res.model_literals) {
        s.insert(l);
        if (determined.size() <= l.atom()) determined.resize(l.atom() + 1, false);
        determined[l.atom()] = true;
    }
    for (Lit l : candidates)
        if (l.atom() >= determined.size() || !determined[l.atom()]) s.insert(~l);
    return s;
}

/// The candidates after position `index` in `candidates` (which is sorted by
/// the abducible order), together with the earlier ones whose complement is
/// not in `compatible`.
inline std::vector<Lit> candidates_after(std::span<const Lit> candidates, std::size_t index,
                                         const CompatibleSet& compatible) {
    std::vector<Lit> out;
    for (std::size_t j = 0; j < index; ++j)
        if (!compatible.contains(~candidates[j])) out.push_back(candidates[j]);
    for (std::size_t j = index + 1; j < candidates.size(); ++j) out.push_back(candidates[j]);
    return out;
}

/// Same, locating `l` in `candidates` first. `l` must be a member.
inline std::vector<Lit> candidates_after(std::span<const Lit> candidates, Lit l,
                                         const CompatibleSet& compatible) {
    auto it = std::find(candidates.begin(), candidates.end(), l);
    if (it == candidates.end()) throw Error("candidates_after: literal is not a candidate");
    return candidates_after(candidates, static_cast<std::size_t>(it - candidates.begin()),
                            compatible);
}

enum class FixMode {
    complement, ///< drop members of M and complements of members of M
    entailment  ///< additionally drop l with S ∪ M ⊨ l or M ⊨ ¬l (oracle)
};

/// Removes candidates that cannot contribute a new hypothesis. Never returns
/// a member of `hypotheses`. The entailment mode needs both sessions, with
/// `problem` already holding M in its open frames.
inline std::vector<Lit> fix(std::span<const Lit> candidates, std::span<const Lit> hypotheses,
                            FixMode mode = FixMode::complement, Session* problem = nullptr,
                            Session* bare = nullptr) {
    std::vector<Lit> out;
    for (Lit l : candidates) {
        bool drop = false;
        for (Lit m : hypotheses)
            if (m == l || m == ~l) drop = true;
        if (!drop) out.push_back(l);
    }
    if (mode == FixMode::complement) return out;
    std::vector<Lit> kept;
    for (Lit l : out) {
        if (problem) {
            Lit neg[] = {~l};
            ScopedFrame f(*problem, std::span<const Lit>(neg));
            if (problem->check_sat().unsat()) continue; // S ∪ M ⊨ l
        }
        if (bare) {
            std::vector<Lit> lits(hypotheses.begin(), hypotheses.end());
            lits.push_back(l);
            ScopedFrame f(*bare, std::span<const Lit>(lits));
            if (bare->check_sat().unsat()) continue; // M ⊨ ¬l
        }
        kept.push_back(l);
    }
    return kept;
}

/// {complements(M) ∨ ¬l | l ∈ candidates, ¬l ∈ units}.
inline std::vector<Clause> uprop(std::span<const Lit> units, std::span<const Lit> candidates,
                                 std::span<const Lit> hypotheses) {
    std::vector<Clause> out;
    Clause base = clause_of_hypotheses(hypotheses);
    for (Lit l : candidates)
        if (std::find(units.begin(), units.end(), ~l) != units.end()) out.push_back(base.with(~l));
    return out;
}

/// Literals derived from `clauses` ∪ `hypotheses` by unit propagation,
/// `hypotheses` included. On a syntactic conflict the literals derived so far
/// are returned.
inline std::vector<Lit> unit_consequences(std::span<const Clause> clauses,
                                          std::span<const Lit> hypotheses) {
    std::vector<std::int8_t> value; // per atom: 0 unknown, 1 true, -1 false
    auto val = [&](Lit l) -> int {
        if (l.atom() >= value.size()) return 0;
        int v = value[l.atom()];
        return l.negative() ? -v : v;
    };
    std::vector<Lit> out;
    auto set = [&](Lit l) {
        if (value.size() <= l.atom()) value.resize(l.atom() + 1, 0);
        value[l.atom()] = l.negative() ? -1 : 1;
        out.push_back(l);
    };
    for (Lit m : hypotheses)
        if (val(m) == 0) set(m);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& c : clauses) {
            std::optional<Lit> open;
            std::size_t open_count = 0;
            bool satisfied = false;
            for (Lit l : c) {
                int v = val(l);
                if (v > 0) {
                    satisfied = true;
                    break;
                }
                if (v == 0) {
                    ++open_count;
                    open = l;
                }
            }
            if (satisfied) continue;
            if (open_count == 0) return out;
            if (open_count == 1) {
                set(*open);
                changed = true;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Minimization

/// Deletes theory tautologies and every D for which some other C has C ⊨ D
/// and (D ⊭ C or C ≺ D). Exact duplicates are merged first. Entailments the
/// oracle cannot decide keep the clause and set `*uncertain`.
inline std::vector<Clause> submin(std::vector<Clause> clauses, Session& bare,
                                  bool* uncertain = nullptr) {
    canonicalize(clauses); // sorted by ≺
    const std::size_t n = clauses.size();
    std::vector<bool> tautology(n, false), removed(n, false);
    auto note_unknown = [&] {
        if (uncertain) *uncertain = true;
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto t = is_tautology(bare, clauses[i]);
        if (t == Entailment::unknown) note_unknown();
        tautology[i] = removed[i] = t == Entailment::yes;
    }
    for (std::size_t d = 0; d < n; ++d) {
        if (removed[d]) continue;
        for (std::size_t c = 0; c < n && !removed[d]; ++c) {
            if (c == d || tautology[c]) continue;
            auto forward = clause_entails(bare, clauses[c], clauses[d]);
            if (forward == Entailment::unknown) note_unknown();
            if (forward != Entailment::yes) continue;
            if (c < d) { // C ≺ D
                removed[d] = true;
                continue;
            }
            auto back = clause_entails(bare, clauses[d], clauses[c]);
            if (back == Entailment::unknown) note_unknown();
            if (back == Entailment::no) removed[d] = true;
        }
    }
    std::vector<Clause> out;
    for (std::size_t i = 0; i < n; ++i)
        if (!removed[i]) out.push_back(std::move(clauses[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Search

enum class Algorithm { bp, imp };
enum class UnitMode {
    hypotheses, ///< U = M
    propagate   ///< U = M plus syntactic unit consequences of the clausal part of S
};
enum class Minimization {
    lazy, ///< implicates are streamed as found; no in-engine SubMin
    eager ///< every recursion level returns SubMin of its results
};

enum class Incompleteness { none, unknown, budget };

inline const char* to_string(Incompleteness i) {
    switch (i) {
    case Incompleteness::none: return "no";
    case Incompleteness::unknown: return "unknown";
    case Incompleteness::budget: return "budget";
    }
    return "?";
}

struct EngineConfig {
    Algorithm algorithm = Algorithm::imp;
    ResultPredicate predicate = ResultPredicate::always();
    bool model_pruning = true;
    FixMode fix = FixMode::complement;
    UnitMode units = UnitMode::hypotheses;
    Minimization minimization = Minimization::lazy;
    std::optional<std::chrono::duration<double>> time_limit;
    std::optional<std::size_t> max_implicates;
};

struct SearchStats {
    std::size_t nodes = 0;
    std::size_t oracle_calls = 0;
    std::size_t max_depth = 0;
    std::optional<double> time_to_first; ///< seconds
    double total_time = 0;               ///< seconds
};

struct SearchResult {
    std::vector<Clause> implicates;
    Incompleteness incomplete = Incompleteness::none;
    SearchStats stats;

    bool complete() const noexcept { return incomplete == Incompleteness::none; }
};

/// Depth-first implicate search over hypothesis sets drawn from an abducible
/// set. The problem session holds S; each level of the search owns one frame
/// on it holding the hypothesis added at that level. The bare session (no S)
/// answers hypothesis-consistency, tautology and entailment queries.
class ImplicateSearch {
public:
    using Sink = std::function<void(const Clause&)>;

    ImplicateSearch(const AbducibleSet& abducibles, Session& problem, Session& bare,
                    EngineConfig config = {})
        : abducibles_(&abducibles), problem_(&problem), bare_(&bare),
          config_(std::move(config)) {}

    /// Clauses of S used by UnitMode::propagate.
    void set_clausal_view(std::vector<Clause> clauses) { clausal_ = std::move(clauses); }

    /// Called with the hypothesis set of every visited node.
    std::function<void(std::span<const Lit>)> on_node;
    /// Called with each hypothesis set found inconsistent on its own.
    std::function<void(std::span<const Lit>)> on_inconsistent;

    /// Searches from no hypotheses over the whole abducible set.
    SearchResult run(Sink sink = {}) { return run({}, abducibles_->members(), std::move(sink)); }

    /// Searches below `hypotheses` with `candidates` (members of the abducible
    /// set, in its order).
    SearchResult run(std::span<const Lit> hypotheses, std::span<const Lit> candidates,
                     Sink sink = {}) {
        sink_ = std::move(sink);
        result_ = SearchResult{};
        emitted_.clear();
        found_ = 0;
        start_ = std::chrono::steady_clock::now();
        const std::size_t calls_before = problem_->check_count() + bare_->check_count();
        path_.assign(hypotheses.begin(), hypotheses.end());
        const std::size_t base_depth = problem_->depth();
        if (!path_.empty()) problem_->assert_scoped(path_);

        std::vector<Lit> sorted(candidates.begin(), candidates.end());
        std::sort(sorted.begin(), sorted.end(), [&](Lit a, Lit b) {
            return abducibles_->rank(a) < abducibles_->rank(b);
        });

        std::vector<Clause> root_result;
        std::vector<Level> stack;
        bool aborted = false;
        if (auto level = expand(sorted, root_result)) stack.push_back(std::move(*level));

        while (!stack.empty()) {
            if (!aborted && budget_exhausted()) {
                aborted = true;
                result_.incomplete = Incompleteness::budget;
            }
            Level& top = stack.back();
            std::optional<std::size_t> next;
            if (!aborted) {
                for (std::size_t i = top.next; i < top.candidates.size(); ++i) {
                    if (config_.algorithm == Algorithm::imp &&
                        !top.compatible.contains(~top.candidates[i]))
                        continue;
                    next = i;
                    break;
                }
            }
            if (!next) {
                finish(stack, root_result);
                continue;
            }
            top.next = *next + 1;
            Lit l = top.candidates[*next];
            std::vector<Lit> child = config_.algorithm == Algorithm::imp
                                         ? candidates_after(top.candidates, *next, top.compatible)
                                         : top.candidates;
            Lit pushed[] = {l};
            problem_->assert_scoped(pushed);
            path_.push_back(l);
            std::vector<Clause> terminal;
            auto level = expand(child, terminal);
            if (level) {
                stack.push_back(std::move(*level));
            } else {
                collect(stack.back(), std::move(terminal));
                problem_->retract_scope();
                path_.pop_back();
            }
        }

        while (problem_->depth() > base_depth) problem_->retract_scope();

        if (config_.minimization == Minimization::eager) {
            result_.implicates = std::move(root_result);
        }
        result_.stats.oracle_calls = problem_->check_count() + bare_->check_count() - calls_before;
        result_.stats.total_time = elapsed();
        return std::move(result_);
    }

private:
    struct Level {
        std::vector<Lit> candidates;
        CompatibleSet compatible;
        std::size_t next = 0;
        std::vector<Clause> collected; // eager mode only
    };

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    bool budget_exhausted() const {
        if (config_.max_implicates && found_ >= *config_.max_implicates) return true;
        if (config_.time_limit && elapsed() >= config_.time_limit->count()) return true;
        return false;
    }

    // Records a newly derived implicate: streamed in lazy mode, returned to
    // the caller for collection in eager mode.
    void derive(const Clause& c, std::vector<Clause>& into) {
        bool fresh = emitted_.insert(c).second;
        if (fresh) {
            ++found_;
            if (!result_.stats.time_to_first) result_.stats.time_to_first = elapsed();
        }
        if (config_.minimization == Minimization::eager) {
            into.push_back(c);
        } else if (fresh) {
            result_.implicates.push_back(c);
            if (sink_) sink_(c);
        }
    }

    void collect(Level& level, std::vector<Clause> clauses) {
        if (config_.minimization != Minimization::eager) return;
        level.collected.insert(level.collected.end(), std::make_move_iterator(clauses.begin()),
                               std::make_move_iterator(clauses.end()));
    }

    // Pops a finished level and hands its (minimized) results to the parent.
    void finish(std::vector<Level>& stack, std::vector<Clause>& root_result) {
        std::vector<Clause> results = std::move(stack.back().collected);
        stack.pop_back();
        if (config_.minimization == Minimization::eager) {
            bool uncertain = false;
            results = submin(std::move(results), *bare_, &uncertain);
            if (uncertain) mark_unknown();
        }
        if (stack.empty()) {
            root_result = std::move(results);
            return;
        }
        problem_->retract_scope();
        path_.pop_back();
        collect(stack.back(), std::move(results));
    }

    void mark_unknown() {
        if (result_.incomplete == Incompleteness::none) result_.incomplete = Incompleteness::unknown;
    }

    // Handles the node for the current path. Returns a level to explore, or
    // nullopt with the node's (possibly empty) result in `terminal`.
    std::optional<Level> expand(std::span<const Lit> candidates, std::vector<Clause>& terminal) {
        ++result_.stats.nodes;
        result_.stats.max_depth = std::max(result_.stats.max_depth, path_.size());
        if (on_node) on_node(path_);
        const bool imp = config_.algorithm == Algorithm::imp;
        if (imp && !config_.predicate.is_always() && !config_.predicate.holds(path_, bare_))
            return std::nullopt;

        std::vector<Lit> query;
        if (imp && config_.model_pruning && problem_->supports_models()) {
            std::vector<bool> seen;
            for (Lit l : candidates) {
                if (seen.size() <= l.atom()) seen.resize(l.atom() + 1, false);
                if (!seen[l.atom()]) {
                    seen[l.atom()] = true;
                    query.push_back(Lit::make(l.atom(), false));
                }
            }
        }
        SatResult res = problem_->check_sat(query);
        if (res.status == SatStatus::unknown) mark_unknown();
        if (res.unsat()) {
            // S ∪ M is unsatisfiable; M itself decides between ∅ and {¬M}.
            if (!path_.empty()) {
                ScopedFrame f(*bare_, std::span<const Lit>(path_));
                if (bare_->check_sat().unsat()) {
                    if (on_inconsistent) on_inconsistent(path_);
                    return std::nullopt;
                }
            }
            derive(clause_of_hypotheses(path_), terminal);
            return std::nullopt;
        }

        Level level;
        level.candidates = fix(candidates, path_, config_.fix, problem_, bare_);
        if (imp) {
            level.compatible = config_.model_pruning
                                   ? compatible_from_model(res, level.candidates)
                                   : CompatibleSet::full(level.candidates);
        }
        std::vector<Lit> units = config_.units == UnitMode::propagate
                                     ? unit_consequences(clausal_, path_)
                                     : path_;
        for (auto& c : uprop(units, level.candidates, path_)) derive(c, level.collected);
        return level;
    }

    const AbducibleSet* abducibles_;
    Session* problem_;
    Session* bare_;
    EngineConfig config_;
    std::vector<Clause> clausal_;

    Sink sink_;
    SearchResult result_;
    std::unordered_set<Clause, ClauseHash> emitted_;
    std::size_t found_ = 0;
    std::vector<Lit> path_;
    std::chrono::steady_clock::time_point start_;
};

/// Basic decomposition: every ordering of hypotheses is explored.
inline SearchResult bp(const AbducibleSet& abducibles, Session& problem, Session& bare,
                       EngineConfig config = {}) {
    config.algorithm = Algorithm::bp;
    return ImplicateSearch(abducibles, problem, bare, std::move(config)).run();
}

/// Ordered, model-guided decomposition filtered by a subset-closed predicate.
inline SearchResult imp(const AbducibleSet& abducibles, Session& problem, Session& bare,
                        EngineConfig config = {}) {
    config.algorithm = Algorithm::imp;
    return ImplicateSearch(abducibles, problem, bare, std::move(config)).run();
}

} // namespace impgen

#endif // IMPGEN_ENGINE_HPP
