// Shared helpers for the unit and acceptance tests: random propositional
// instances, a truth-table oracle independent of the library's solvers, and
// external solver discovery.
#ifndef IMPGEN_TESTS_SUPPORT_HPP
#define IMPGEN_TESTS_SUPPORT_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "impgen/impgen.hpp"

namespace testing_support {

using namespace impgen;

#ifndef IMPGEN_DEFAULT_SOLVER
#define IMPGEN_DEFAULT_SOLVER ""
#endif

/// Command for the external solver, or nullopt when none can be found.
inline std::optional<std::string> solver_command() {
    if (const char* env = std::getenv("IMPGEN_SOLVER"); env && *env) return std::string(env);
    std::string fallback = IMPGEN_DEFAULT_SOLVER;
    if (!fallback.empty() && std::filesystem::exists(fallback)) return fallback;
    return std::nullopt;
}

inline std::string source_path(const std::string& relative) {
    return std::string(IMPGEN_SOURCE_DIR) + "/" + relative;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Propositional clause over atoms 0..n-1 in (atom, negative) form.
struct PLit {
    unsigned atom;
    bool negative;
    friend auto operator<=>(const PLit&, const PLit&) = default;
};
using PClause = std::vector<PLit>;

struct Instance {
    unsigned atoms = 0;
    std::vector<PClause> clauses;
};

/// Up to `max_clauses` clauses of width 1..3 over `atoms` atoms.
inline Instance random_instance(std::mt19937& rng, unsigned atoms, unsigned max_clauses,
                                unsigned max_width = 3) {
    Instance in;
    in.atoms = atoms;
    std::uniform_int_distribution<unsigned> count(1, max_clauses), width(1, max_width),
        atom(0, atoms - 1), coin(0, 1);
    unsigned n = count(rng);
    for (unsigned i = 0; i < n; ++i) {
        PClause c;
        unsigned w = width(rng);
        for (unsigned j = 0; j < w; ++j) c.push_back({atom(rng), coin(rng) == 1});
        in.clauses.push_back(std::move(c));
    }
    return in;
}

inline std::string atom_name(unsigned i) { return "p" + std::to_string(i); }

inline std::string plit_text(PLit l) {
    return l.negative ? "(not " + atom_name(l.atom) + ")" : atom_name(l.atom);
}

inline std::string problem_text(const Instance& in) {
    std::string s = "(set-logic QF_UF)\n";
    for (unsigned i = 0; i < in.atoms; ++i) s += "(declare-const " + atom_name(i) + " Bool)\n";
    for (const auto& c : in.clauses) {
        if (c.size() == 1) {
            s += "(assert " + plit_text(c[0]) + ")\n";
            continue;
        }
        s += "(assert (or";
        for (auto l : c) s += " " + plit_text(l);
        s += "))\n";
    }
    return s;
}

// --- truth tables ----------------------------------------------------------

inline bool satisfies(std::uint32_t assignment, PLit l) {
    bool v = (assignment >> l.atom) & 1u;
    return v != l.negative;
}

inline bool satisfies(std::uint32_t assignment, const PClause& c) {
    for (auto l : c)
        if (satisfies(assignment, l)) return true;
    return false;
}

/// Assignments (bitmasks over `atoms`) satisfying every clause of `cs`.
inline std::vector<std::uint32_t> models(unsigned atoms, const std::vector<PClause>& cs) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t a = 0; a < (1u << atoms); ++a) {
        bool ok = true;
        for (const auto& c : cs)
            if (!satisfies(a, c)) {
                ok = false;
                break;
            }
        if (ok) out.push_back(a);
    }
    return out;
}

inline bool entails(unsigned atoms, const std::vector<PClause>& premise, const PClause& c) {
    for (auto a : models(atoms, premise))
        if (!satisfies(a, c)) return false;
    return true;
}

/// Literal of the table for `l`; atom i must have been interned as p_i first.
inline Lit to_lit(PLit l) { return Lit::make(l.atom, l.negative); }
inline PLit to_plit(Lit l) { return {l.atom(), l.negative()}; }

inline Clause to_clause(const PClause& c) {
    std::vector<Lit> lits;
    for (auto l : c) lits.push_back(to_lit(l));
    return Clause(std::move(lits));
}

inline PClause to_pclause(const Clause& c) {
    PClause out;
    for (Lit l : c) out.push_back(to_plit(l));
    return out;
}

/// Every clause over `atoms` atoms with no complementary pair, the empty
/// clause included (3^atoms clauses).
inline std::vector<PClause> all_clauses(unsigned atoms) {
    std::vector<PClause> out;
    std::uint32_t total = 1;
    for (unsigned i = 0; i < atoms; ++i) total *= 3;
    for (std::uint32_t code = 0; code < total; ++code) {
        PClause c;
        std::uint32_t x = code;
        for (unsigned i = 0; i < atoms; ++i, x /= 3) {
            if (x % 3 == 1) c.push_back({i, false});
            if (x % 3 == 2) c.push_back({i, true});
        }
        out.push_back(std::move(c));
    }
    return out;
}

/// Clause valid under every assignment.
inline bool is_tautology(unsigned atoms, const PClause& c) { return entails(atoms, {}, c); }

/// Truth-table entailment between clauses over `atoms` atoms.
inline bool clause_entails(unsigned atoms, const PClause& c, const PClause& d) {
    for (std::uint32_t a = 0; a < (1u << atoms); ++a)
        if (satisfies(a, c) && !satisfies(a, d)) return false;
    return true;
}

/// Tautology-free, entailment-minimal subset, ties kept by the library's
/// clause ordering. Independent of the library's oracle and SubMin.
inline std::vector<Clause> brute_submin(unsigned atoms, std::vector<Clause> cs) {
    canonicalize(cs);
    std::vector<Clause> out;
    for (std::size_t d = 0; d < cs.size(); ++d) {
        PClause pd = to_pclause(cs[d]);
        if (is_tautology(atoms, pd)) continue;
        bool removed = false;
        for (std::size_t c = 0; c < cs.size() && !removed; ++c) {
            if (c == d) continue;
            PClause pc = to_pclause(cs[c]);
            if (is_tautology(atoms, pc)) continue;
            if (!clause_entails(atoms, pc, pd)) continue;
            if (c < d || !clause_entails(atoms, pd, pc)) removed = true;
        }
        if (!removed) out.push_back(cs[d]);
    }
    return out;
}

/// Prime implicates by enumeration: all entailed clauses, minimized.
inline std::vector<Clause> brute_prime_implicates(const Instance& in,
                                                  std::optional<std::size_t> size_limit = {}) {
    std::vector<Clause> entailed;
    for (const auto& c : all_clauses(in.atoms))
        if (entails(in.atoms, in.clauses, c)) entailed.push_back(to_clause(c));
    auto primes = brute_submin(in.atoms, std::move(entailed));
    if (size_limit) std::erase_if(primes, [&](const Clause& c) { return c.size() > *size_limit; });
    return primes;
}

/// Mutual entailment between two clause sets, by truth table.
inline bool equivalent_mod_tilde(unsigned atoms, const std::vector<Clause>& a,
                                 const std::vector<Clause>& b) {
    auto covered = [&](const std::vector<Clause>& from, const std::vector<Clause>& to) {
        for (const auto& d : to) {
            bool ok = false;
            for (const auto& c : from)
                if (clause_entails(atoms, to_pclause(c), to_pclause(d))) {
                    ok = true;
                    break;
                }
            if (!ok) return false;
        }
        return true;
    };
    return covered(a, b) && covered(b, a);
}

/// S ∪ complement(C) unsat, by truth table.
inline bool is_implicate(const Instance& in, const Clause& c) {
    return entails(in.atoms, in.clauses, to_pclause(c));
}

// --- library plumbing ------------------------------------------------------

/// A parsed propositional instance with sessions on the internal backend and
/// the abducible set of all 2n literals (p0, ¬p0, p1, ...).
struct Fixture {
    Instance instance;
    LiteralTable table;
    Problem problem;
    std::unique_ptr<Backend> backend;
    std::unique_ptr<Session> session;
    std::unique_ptr<Session> bare;
    AbducibleSet abducibles;

    explicit Fixture(Instance in, std::unique_ptr<Backend> b = nullptr) : instance(std::move(in)) {
        for (unsigned i = 0; i < instance.atoms; ++i) table.intern(atom_name(i));
        problem = parse_problem(problem_text(instance));
        backend = b ? std::move(b) : std::make_unique<PropositionalBackend>();
        session = backend->open(problem, table);
        bare = backend->open_bare(problem, table);
        for (unsigned i = 0; i < instance.atoms; ++i) {
            abducibles.add(Lit::make(i, false));
            abducibles.add(Lit::make(i, true));
        }
    }
};

// --- A-tree generators ------------------------------------------------------

/// Atom count for store tests.
inline constexpr unsigned kAtoms = 6;

/// p0 < ¬p0 < p1 < ¬p1 < ...
inline LiteralOrder default_order(unsigned atoms = kAtoms) {
    LiteralOrder o;
    for (unsigned i = 0; i < atoms; ++i) {
        o.append(Lit::make(i, false));
        o.append(Lit::make(i, true));
    }
    return o;
}

inline std::vector<Lit> ordered_lits(unsigned atoms = kAtoms) {
    std::vector<Lit> out;
    for (unsigned i = 0; i < atoms; ++i) {
        out.push_back(Lit::make(i, false));
        out.push_back(Lit::make(i, true));
    }
    return out;
}

/// Random well-formed tree, possibly with empty non-root nodes.
inline ATree random_tree(std::mt19937& rng, const std::vector<Lit>& lits, std::size_t from, int depth) {
    std::uniform_real_distribution<double> u(0, 1);
    double r = u(rng);
    if (from >= lits.size() || depth == 0) return r < 0.8 ? ATree::bottom() : ATree{};
    if (r < 0.2) return ATree::bottom();
    if (r < 0.3) return ATree{};
    ATree t;
    std::uniform_int_distribution<std::size_t> pick(from, lits.size() - 1);
    std::set<std::size_t> chosen;
    std::uniform_int_distribution<int> fan(1, 3);
    for (int k = fan(rng); k > 0; --k) chosen.insert(pick(rng));
    for (auto i : chosen) t.add_edge(lits[i], random_tree(rng, lits, i + 1, depth - 1));
    return t;
}

inline Clause random_clause(std::mt19937& rng, unsigned atoms, unsigned max_width) {
    std::uniform_int_distribution<unsigned> atom(0, atoms - 1), coin(0, 1), width(0, max_width);
    std::vector<Lit> lits;
    for (unsigned w = width(rng); w > 0; --w) lits.push_back(Lit::make(atom(rng), coin(rng)));
    return Clause(std::move(lits));
}

inline bool is_order_prefix(const LiteralOrder& o, const Clause& c, const Clause& d) {
    auto sc = o.sorted(c), sd = o.sorted(d);
    return sc.size() < sd.size() && std::equal(sc.begin(), sc.end(), sd.begin());
}

/// Random set in which no clause is an order-prefix of another.
inline std::vector<Clause> random_clause_set(std::mt19937& rng, const LiteralOrder& o, std::size_t max_size) {
    std::uniform_int_distribution<std::size_t> size(0, max_size);
    std::vector<Clause> raw;
    for (std::size_t n = size(rng); n > 0; --n) raw.push_back(random_clause(rng, kAtoms, 5));
    canonicalize(raw);
    std::vector<Clause> out;
    for (const auto& d : raw) {
        bool absorbed = false;
        for (const auto& c : raw)
            if (is_order_prefix(o, c, d)) absorbed = true;
        if (!absorbed) out.push_back(d);
    }
    return out;
}

inline bool no_empty_below_root(const ATree& t) {
    for (std::size_t i = 0; i < t.degree(); ++i) {
        if (t.child(i).is_empty()) return false;
        if (!no_empty_below_root(t.child(i))) return false;
    }
    return true;
}

/// Bare internal-backend session over p0..p(n-1).
struct Bare {
    LiteralTable table;
    Problem problem;
    PropositionalBackend backend;
    std::unique_ptr<Session> session;
    explicit Bare(unsigned atoms = kAtoms) {
        for (unsigned i = 0; i < atoms; ++i) table.intern(atom_name(i));
        problem = parse_problem(problem_text(Instance{atoms, {}}));
        session = backend.open_bare(problem, table);
    }
};

inline std::string show(const LiteralTable& table, const std::vector<Clause>& cs) {
    std::string s = "{";
    for (const auto& c : cs) s += " " + format_clause(table, c);
    return s + " }";
}

} // namespace testing_support

#endif // IMPGEN_TESTS_SUPPORT_HPP
