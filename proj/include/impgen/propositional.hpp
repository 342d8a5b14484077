#ifndef IMPGEN_PROPOSITIONAL_HPP
#define IMPGEN_PROPOSITIONAL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "impgen/error.hpp"
#include "impgen/oracle.hpp"
#include "impgen/problem.hpp"

namespace impgen {

namespace prop {

/// Literal over solver variables: 2*var + sign (1 = negative).
using SolverLit = std::uint32_t;
inline SolverLit make_lit(std::uint32_t var, bool negative) { return (var << 1) | (negative ? 1 : 0); }
inline std::uint32_t var_of(SolverLit l) { return l >> 1; }
inline bool sign_of(SolverLit l) { return l & 1; }
inline SolverLit negate(SolverLit l) { return l ^ 1; }

using Cnf = std::vector<std::vector<SolverLit>>;

/// Small DPLL solver with unit propagation, over an explicit CNF.
/// Intended for desk-scale propositional instances.
class Dpll {
public:
    /// value: 0 = unassigned, 1 = true, 2 = false.
    std::optional<std::vector<std::uint8_t>> solve(const Cnf& cnf, std::size_t num_vars) {
        cnf_ = &cnf;
        assign_.assign(num_vars, 0);
        trail_.clear();
        for (const auto& clause : cnf)
            if (clause.empty()) return std::nullopt;
        if (!search()) return std::nullopt;
        return assign_;
    }

private:
    bool value_true(SolverLit l) const {
        auto v = assign_[var_of(l)];
        return v != 0 && (v == 1) != sign_of(l);
    }
    bool value_false(SolverLit l) const {
        auto v = assign_[var_of(l)];
        return v != 0 && (v == 1) == sign_of(l);
    }

    void set(SolverLit l) {
        assign_[var_of(l)] = sign_of(l) ? 2 : 1;
        trail_.push_back(var_of(l));
    }

    // Full scan propagation; fine for the instance sizes this solver serves.
    bool propagate() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& clause : *cnf_) {
                std::size_t unassigned = 0;
                SolverLit last = 0;
                bool satisfied = false;
                for (SolverLit l : clause) {
                    if (value_true(l)) {
                        satisfied = true;
                        break;
                    }
                    if (!value_false(l)) {
                        ++unassigned;
                        last = l;
                    }
                }
                if (satisfied) continue;
                if (unassigned == 0) return false;
                if (unassigned == 1) {
                    set(last);
                    changed = true;
                }
            }
        }
        return true;
    }

    void undo_to(std::size_t mark) {
        while (trail_.size() > mark) {
            assign_[trail_.back()] = 0;
            trail_.pop_back();
        }
    }

    bool search() {
        if (!propagate()) return false;
        std::optional<std::uint32_t> branch;
        for (const auto& clause : *cnf_) {
            bool satisfied = false;
            std::optional<std::uint32_t> free_var;
            for (SolverLit l : clause) {
                if (value_true(l)) {
                    satisfied = true;
                    break;
                }
                if (!free_var && !value_false(l)) free_var = var_of(l);
            }
            if (!satisfied && free_var) {
                branch = free_var;
                break;
            }
        }
        if (!branch) return true;
        for (bool negative : {false, true}) {
            std::size_t mark = trail_.size();
            set(make_lit(*branch, negative));
            if (search()) return true;
            undo_to(mark);
        }
        return false;
    }

    const Cnf* cnf_ = nullptr;
    std::vector<std::uint8_t> assign_;
    std::vector<std::uint32_t> trail_;
};

/// Tseitin encoder from SMT-LIB boolean terms to CNF. Anything that is not a
/// boolean connective becomes an opaque propositional variable keyed by the
/// atom's text. Definitional clauses are full equivalences over fresh
/// variables, so they are kept permanently in `definitions()`.
class Encoder {
public:
    explicit Encoder(const Signature& signature) : signature_(&signature) {}

    std::size_t num_vars() const noexcept { return num_vars_; }
    const Cnf& definitions() const noexcept { return defs_; }

    std::optional<std::uint32_t> atom_var(const std::string& text) const {
        auto it = atom_vars_.find(text);
        if (it == atom_vars_.end()) return std::nullopt;
        return it->second;
    }

    /// Encodes `term` asserted true, appending top-level clauses to `out`.
    void assert_term(const SExpr& term, Cnf& out) {
        if (term.is_app("and")) {
            for (std::size_t i = 1; i < term.size(); ++i) assert_term(term[i], out);
            return;
        }
        if (term.is_app("or")) {
            std::vector<SolverLit> clause;
            for (std::size_t i = 1; i < term.size(); ++i) clause.push_back(encode(term[i]));
            out.push_back(std::move(clause));
            return;
        }
        out.push_back({encode(term)});
    }

    /// Output literal of `term`.
    SolverLit encode(const SExpr& term) {
        std::string key = term.str();
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        SolverLit result = encode_uncached(term);
        cache_.emplace(std::move(key), result);
        return result;
    }

private:
    std::uint32_t fresh() { return static_cast<std::uint32_t>(num_vars_++); }

    bool is_boolean(const SExpr& t) const {
        auto s = signature_->sort_of(t);
        return s && *s == "Bool";
    }

    SolverLit constant(bool value) {
        if (!true_var_) {
            true_var_ = fresh();
            defs_.push_back({make_lit(*true_var_, false)});
        }
        return make_lit(*true_var_, !value);
    }

    SolverLit define_and(const std::vector<SolverLit>& args) {
        SolverLit g = make_lit(fresh(), false);
        std::vector<SolverLit> big{g};
        for (SolverLit a : args) {
            defs_.push_back({negate(g), a});
            big.push_back(negate(a));
        }
        defs_.push_back(std::move(big));
        return g;
    }

    SolverLit define_or(const std::vector<SolverLit>& args) {
        std::vector<SolverLit> negs;
        for (SolverLit a : args) negs.push_back(negate(a));
        return negate(define_and(negs));
    }

    SolverLit define_iff(SolverLit a, SolverLit b) {
        SolverLit g = make_lit(fresh(), false);
        defs_.push_back({negate(g), negate(a), b});
        defs_.push_back({negate(g), a, negate(b)});
        defs_.push_back({g, a, b});
        defs_.push_back({g, negate(a), negate(b)});
        return g;
    }

    SolverLit define_ite(SolverLit c, SolverLit t, SolverLit e) {
        SolverLit g = make_lit(fresh(), false);
        defs_.push_back({negate(g), negate(c), t});
        defs_.push_back({negate(g), c, e});
        defs_.push_back({g, negate(c), negate(t)});
        defs_.push_back({g, c, negate(e)});
        return g;
    }

    std::vector<SolverLit> args(const SExpr& t) {
        std::vector<SolverLit> a;
        for (std::size_t i = 1; i < t.size(); ++i) a.push_back(encode(t[i]));
        return a;
    }

    SolverLit encode_uncached(const SExpr& t) {
        if (t.is_atom()) {
            if (t.text() == "true") return constant(true);
            if (t.text() == "false") return constant(false);
            return opaque(t);
        }
        auto h = t.head();
        if (h == "not" && t.size() == 2) return negate(encode(t[1]));
        if (h == "and") return define_and(args(t));
        if (h == "or") return define_or(args(t));
        if (h == "=>" && t.size() >= 3) {
            // Right associative: a => (b => c).
            auto a = args(t);
            SolverLit acc = a.back();
            for (std::size_t i = a.size() - 1; i-- > 0;) acc = define_or({negate(a[i]), acc});
            return acc;
        }
        if (h == "xor" && t.size() >= 3) {
            auto a = args(t);
            SolverLit acc = a[0];
            for (std::size_t i = 1; i < a.size(); ++i) acc = negate(define_iff(acc, a[i]));
            return acc;
        }
        if (h == "ite" && t.size() == 4 && is_boolean(t[2])) {
            auto a = args(t);
            return define_ite(a[0], a[1], a[2]);
        }
        if ((h == "=" || h == "distinct") && t.size() == 3 && is_boolean(t[1]) &&
            is_boolean(t[2])) {
            SolverLit g = define_iff(encode(t[1]), encode(t[2]));
            return h == "=" ? g : negate(g);
        }
        if (h == "let" || h == "forall" || h == "exists" || h == "!")
            throw Error("propositional backend does not support '" + std::string(h) + "'");
        return opaque(t);
    }

    SolverLit opaque(const SExpr& t) {
        std::string key = t.str();
        auto it = atom_vars_.find(key);
        if (it == atom_vars_.end()) it = atom_vars_.emplace(std::move(key), fresh()).first;
        return make_lit(it->second, false);
    }

    const Signature* signature_;
    std::size_t num_vars_ = 0;
    std::optional<std::uint32_t> true_var_;
    Cnf defs_;
    std::unordered_map<std::string, std::uint32_t> atom_vars_;
    std::unordered_map<std::string, SolverLit> cache_;
};

} // namespace prop

/// In-process propositional decision procedure: every non-connective atom is
/// an independent boolean variable. Used as an independent test oracle and
/// for purely propositional problems.
class PropositionalSession final : public Session {
public:
    PropositionalSession(const Problem& problem, const LiteralTable& table, bool with_assertions)
        : table_(&table), signature_(std::make_unique<Signature>(problem.signature)),
          encoder_(*signature_) {
        if (with_assertions)
            for (const auto& a : problem.assertions) encoder_.assert_term(a, asserted_);
    }

    void assert_clauses_scoped(std::span<const Clause> clauses) override {
        frames_.push_back(asserted_.size());
        for (const auto& c : clauses) {
            std::vector<prop::SolverLit> clause;
            for (Lit l : c) {
                if (!table_->contains(l)) throw Error("literal outside the registered table");
                prop::SolverLit a = encoder_.encode(table_->atom_expr(l.atom()));
                clause.push_back(l.negative() ? prop::negate(a) : a);
            }
            asserted_.push_back(std::move(clause));
        }
    }

    void retract_scope() override {
        if (frames_.empty()) throw Error("retract_scope without matching assert_scoped");
        asserted_.resize(frames_.back());
        frames_.pop_back();
    }

    SatResult check_sat(std::span<const Lit> model_query = {}) override {
        ++checks_;
        prop::Cnf cnf = encoder_.definitions();
        cnf.insert(cnf.end(), asserted_.begin(), asserted_.end());
        auto model = prop::Dpll().solve(cnf, encoder_.num_vars());
        SatResult r;
        if (!model) {
            r.status = SatStatus::unsat;
            return r;
        }
        r.status = SatStatus::sat;
        std::vector<Lit> lits;
        for (Lit q : model_query) {
            auto var = encoder_.atom_var(table_->atom_text(q.atom()));
            if (!var) continue;
            // Variables the search never had to assign are left undetermined.
            auto v = (*model)[*var];
            if (v == 0) continue;
            lits.push_back(Lit::make(q.atom(), v == 2));
        }
        r.model_literals = std::move(lits);
        return r;
    }

    bool supports_models() const noexcept override { return true; }
    std::size_t depth() const noexcept override { return frames_.size(); }

private:
    const LiteralTable* table_;
    std::unique_ptr<Signature> signature_;
    prop::Encoder encoder_;
    prop::Cnf asserted_;
    std::vector<std::size_t> frames_;
};

class PropositionalBackend final : public Backend {
public:
    std::unique_ptr<Session> open(const Problem& problem, const LiteralTable& table,
                                  bool with_assertions = true) override {
        return std::make_unique<PropositionalSession>(problem, table, with_assertions);
    }
};

} // namespace impgen

#endif // IMPGEN_PROPOSITIONAL_HPP
