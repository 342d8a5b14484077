#ifndef IMPGEN_ORACLE_HPP
#define IMPGEN_ORACLE_HPP

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "impgen/core.hpp"
#include "impgen/problem.hpp"

namespace impgen {

enum class SatStatus { sat, unsat, unknown };

inline const char* to_string(SatStatus s) {
    switch (s) {
    case SatStatus::sat: return "sat";
    case SatStatus::unsat: return "unsat";
    case SatStatus::unknown: return "unknown";
    }
    return "?";
}

struct SatResult {
    SatStatus status = SatStatus::unknown;
    /// Literals over the queried atoms that hold in one model. An atom the
    /// model leaves undetermined contributes neither polarity.
    std::optional<std::vector<Lit>> model_literals;

    bool sat() const noexcept { return status == SatStatus::sat; }
    bool unsat() const noexcept { return status == SatStatus::unsat; }
};

/// An incremental satisfiability context over a base formula set and the
/// background theory. Frames are pushed with `assert_scoped` and retracted
/// with `retract_scope`. A session is single-client.
class Session {
public:
    virtual ~Session() = default;

    /// Pushes one frame holding `clauses`.
    virtual void assert_clauses_scoped(std::span<const Clause> clauses) = 0;
    /// Pops the most recent frame.
    virtual void retract_scope() = 0;
    /// Decides the base set together with every open frame. When the result
    /// is sat and models are supported, the truth of each atom of
    /// `model_query` is reported.
    virtual SatResult check_sat(std::span<const Lit> model_query = {}) = 0;

    virtual bool supports_models() const noexcept = 0;
    virtual std::size_t depth() const noexcept = 0;

    /// Pushes one frame holding the unit clauses of `lits`.
    void assert_scoped(std::span<const Lit> lits) {
        std::vector<Clause> units;
        units.reserve(lits.size());
        for (Lit l : lits) units.push_back(Clause{l});
        assert_clauses_scoped(units);
    }

    std::size_t check_count() const noexcept { return checks_; }

protected:
    std::size_t checks_ = 0;
};

/// Pops a frame on scope exit.
class ScopedFrame {
public:
    ScopedFrame(Session& s, std::span<const Lit> lits) : session_(&s) { s.assert_scoped(lits); }
    ScopedFrame(Session& s, std::span<const Clause> clauses) : session_(&s) {
        s.assert_clauses_scoped(clauses);
    }
    ScopedFrame(const ScopedFrame&) = delete;
    ScopedFrame& operator=(const ScopedFrame&) = delete;
    ~ScopedFrame() {
        if (session_) session_->retract_scope();
    }

private:
    Session* session_;
};

/// Opens sessions over a problem. A bare session carries the declarations
/// but none of the assertions (theory only).
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::unique_ptr<Session> open(const Problem& problem, const LiteralTable& table,
                                          bool with_assertions = true) = 0;

    std::unique_ptr<Session> open_bare(const Problem& problem, const LiteralTable& table) {
        return open(problem, table, false);
    }
};

enum class Entailment { yes, no, unknown };

/// Decides whether premise ⊨ C modulo the session's base set, by checking
/// premise ∪ complements(C) for unsatisfiability in a scratch frame. On a
/// bare session this is entailment modulo the theory alone.
inline Entailment entails(Session& session, std::span<const Lit> premise, const Clause& c) {
    std::vector<Lit> lits(premise.begin(), premise.end());
    for (Lit l : c) lits.push_back(~l);
    ScopedFrame frame(session, std::span<const Lit>(lits));
    switch (session.check_sat().status) {
    case SatStatus::unsat: return Entailment::yes;
    case SatStatus::sat: return Entailment::no;
    default: return Entailment::unknown;
    }
}

/// Clause-to-clause entailment C ⊨ D, decided as unsatisfiability of
/// C ∧ complements(D). Syntactic inclusion is accepted without a query.
inline Entailment clause_entails(Session& bare, const Clause& c, const Clause& d) {
    if (c.subset_of(d)) return Entailment::yes;
    std::vector<Clause> frame{c};
    for (Lit l : d) frame.push_back(Clause{~l});
    ScopedFrame scope(bare, std::span<const Clause>(frame));
    switch (bare.check_sat().status) {
    case SatStatus::unsat: return Entailment::yes;
    case SatStatus::sat: return Entailment::no;
    default: return Entailment::unknown;
    }
}

/// True iff `c` is a theory tautology (its complement set is unsatisfiable).
inline Entailment is_tautology(Session& bare, const Clause& c) {
    if (c.has_complementary_pair()) return Entailment::yes;
    return entails(bare, {}, c);
}

} // namespace impgen

#endif // IMPGEN_ORACLE_HPP
