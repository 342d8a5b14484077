#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace impgen;
using namespace testing_support;

namespace {

#define REQUIRE_SOLVER()                                                   \
    auto solver = solver_command();                                        \
    if (!solver) GTEST_SKIP() << "no external solver (set IMPGEN_SOLVER)"

SmtBackend external(const std::string& cmd, bool transcript = false) {
    auto cfg = SolverConfig::from_command(cmd);
    cfg.record_transcript = transcript;
    return SmtBackend(cfg);
}

struct Opened {
    LiteralTable table;
    Problem problem;
    std::unique_ptr<Session> session;
};

Opened open(Backend& backend, const std::string& text, bool with_assertions = true) {
    Opened o;
    o.problem = parse_problem(text);
    o.session = backend.open(o.problem, o.table, with_assertions);
    return o;
}

const char* two_vars = "(declare-const p Bool)(declare-const q Bool)";

} // namespace

TEST(Internal, SatisfiableAndEmptyProblems) {
    PropositionalBackend b;
    auto o = open(b, std::string(two_vars) + "(assert (or p q))");
    EXPECT_TRUE(o.session->check_sat().sat());
    auto e = open(b, "");
    EXPECT_TRUE(e.session->check_sat().sat());
}

TEST(Internal, ComplementaryFramesAreUnsat) {
    PropositionalBackend b;
    auto o = open(b, two_vars);
    Lit p = o.table.intern("p");
    Lit f1[] = {p}, f2[] = {~p};
    o.session->assert_scoped(f1);
    o.session->assert_scoped(f2);
    EXPECT_TRUE(o.session->check_sat().unsat());
    o.session->retract_scope();
    EXPECT_TRUE(o.session->check_sat().sat());
    o.session->retract_scope();
    EXPECT_EQ(o.session->depth(), 0u);
    EXPECT_THROW(o.session->retract_scope(), Error);
}

TEST(Internal, ModelLiteralsAgreeWithTruthTable) {
    PropositionalBackend b;
    auto o = open(b, std::string(two_vars) + "(assert (or p q))(assert (not p))");
    Lit p = o.table.intern("p"), q = o.table.intern("q");
    Lit query[] = {p, q};
    auto r = o.session->check_sat(query);
    ASSERT_TRUE(r.sat());
    ASSERT_TRUE(r.model_literals);
    EXPECT_NE(std::find(r.model_literals->begin(), r.model_literals->end(), q),
              r.model_literals->end());
    EXPECT_NE(std::find(r.model_literals->begin(), r.model_literals->end(), ~p),
              r.model_literals->end());
}

TEST(Internal, ConnectivesAreEncoded) {
    PropositionalBackend b;
    auto o = open(b, std::string(two_vars) +
                         "(declare-const r Bool)"
                         "(assert (=> p q r))(assert (xor p q))(assert (= r (ite p q (not q))))"
                         "(assert (distinct p true))");
    // distinct p true forces ¬p, then xor gives q, ite gives r = ¬q = false.
    Lit p = o.table.intern("p"), q = o.table.intern("q"), r = o.table.intern("r");
    Lit query[] = {p, q, r};
    auto res = o.session->check_sat(query);
    ASSERT_TRUE(res.sat());
    std::vector<Lit> expected{~p, q, ~r};
    EXPECT_EQ(*res.model_literals, expected);
}

TEST(Internal, EntailmentAndTautology) {
    PropositionalBackend b;
    auto o = open(b, two_vars, false);
    Lit p = o.table.intern("p"), q = o.table.intern("q");
    Lit premise[] = {p};
    EXPECT_EQ(entails(*o.session, premise, Clause{p, q}), Entailment::yes);
    EXPECT_EQ(entails(*o.session, {}, Clause{p, q}), Entailment::no);
    EXPECT_EQ(is_tautology(*o.session, Clause{p, ~p}), Entailment::yes);
    EXPECT_EQ(clause_entails(*o.session, Clause{p}, Clause{p, q}), Entailment::yes);
    EXPECT_EQ(clause_entails(*o.session, Clause{p, q}, Clause{p}), Entailment::no);
    EXPECT_EQ(o.session->depth(), 0u);
}

TEST(Internal, TautologyAgreesWithTruthTable) {
    // Every clause over 3 atoms, complementary pairs included.
    PropositionalBackend b;
    auto o = open(b, "(declare-const p0 Bool)(declare-const p1 Bool)(declare-const p2 Bool)", false);
    for (unsigned i = 0; i < 3; ++i) o.table.intern(atom_name(i));
    for (unsigned mask = 0; mask < 64; ++mask) {
        PClause c;
        for (unsigned i = 0; i < 6; ++i)
            if (mask & (1u << i)) c.push_back({i / 2, (i % 2) == 1});
        bool taut = is_tautology(3, c);
        auto got = entails(*o.session, {}, to_clause(c));
        EXPECT_EQ(got == Entailment::yes, taut) << mask;
    }
}

TEST(Internal, PushPopRestoresBehaviour) {
    std::mt19937 rng(3);
    for (int round = 0; round < 20; ++round) {
        auto in = random_instance(rng, 6, 6);
        Fixture f(in);
        Fixture fresh(in);
        std::uniform_int_distribution<unsigned> atom(0, 5), coin(0, 1);
        // 100 random follow-up queries after a push/pop cycle.
        Lit pushed[] = {Lit::make(atom(rng), coin(rng))};
        f.session->assert_scoped(pushed);
        f.session->check_sat();
        f.session->retract_scope();
        for (int k = 0; k < 100; ++k) {
            Lit q[] = {Lit::make(atom(rng), coin(rng)), Lit::make(atom(rng), coin(rng))};
            ScopedFrame a(*f.session, std::span<const Lit>(q));
            ScopedFrame b(*fresh.session, std::span<const Lit>(q));
            EXPECT_EQ(f.session->check_sat().status, fresh.session->check_sat().status);
        }
    }
}

TEST(Internal, UnsupportedBinderIsRejected) {
    PropositionalBackend b;
    EXPECT_THROW(open(b, "(declare-const p Bool)(assert (forall ((x Bool)) (or x p)))"), Error);
}

TEST(External, SolverConfigAddsInteractiveFlags) {
    EXPECT_EQ(SolverConfig::from_command("z3").argv, (std::vector<std::string>{"z3", "-in", "-smt2"}));
    EXPECT_EQ(SolverConfig::from_command("/opt/cvc5").argv,
              (std::vector<std::string>{"/opt/cvc5", "--lang=smt2", "--incremental"}));
    EXPECT_EQ(SolverConfig::from_command("mysolver -q").argv,
              (std::vector<std::string>{"mysolver", "-q"}));
    EXPECT_THROW(SolverConfig::from_command("  "), Error);
}

TEST(External, SpawnFailureIsReported) {
    SmtBackend b(SolverConfig::from_command("/nonexistent/solver-binary"));
    EXPECT_THROW(open(b, ""), BackendError);
}

TEST(External, ProtocolTranscriptIsExact) {
    REQUIRE_SOLVER();
    auto b = external(*solver, true);
    auto o = open(b, "(set-logic QF_UF)(declare-const p Bool)(declare-const q Bool)(assert (or p q))");
    Lit p = o.table.intern("p"), q = o.table.intern("q");
    Lit frame[] = {~p};
    o.session->assert_scoped(frame);
    Lit query[] = {q};
    auto r = o.session->check_sat(query);
    o.session->retract_scope();
    ASSERT_TRUE(r.sat());
    EXPECT_EQ(*r.model_literals, std::vector<Lit>{q});
    auto& s = dynamic_cast<SmtSession&>(*o.session);
    EXPECT_EQ(s.transcript(),
              "(set-option :produce-models true)\n"
              "(set-logic QF_UF)\n"
              "(declare-const p Bool)\n"
              "(declare-const q Bool)\n"
              "(assert (or p q))\n"
              "(push 1)\n"
              "(assert (not p))\n"
              "(check-sat)\n"
              "(get-value (q))\n"
              "(pop 1)\n");
}

TEST(External, ArithmeticQueries) {
    REQUIRE_SOLVER();
    auto b = external(*solver);
    auto o = open(b, "(set-logic QF_LIA)(declare-const x Int)(assert (= x 0))");
    Lit one[] = {o.table.intern("(= x 1)")};
    o.session->assert_scoped(one);
    EXPECT_TRUE(o.session->check_sat().unsat());
    o.session->retract_scope();

    auto bare = b.open_bare(o.problem, o.table);
    Lit premise[] = {o.table.intern("(<= x 0)")};
    EXPECT_EQ(entails(*bare, premise, Clause{o.table.intern("(<= x 1)")}), Entailment::yes);
    EXPECT_EQ(is_tautology(*bare, Clause{o.table.intern("(= x x)")}), Entailment::yes);
}

TEST(External, ArrayExampleIsSatisfiable) {
    REQUIRE_SOLVER();
    auto b = external(*solver);
    auto text = read_text(source_path("benchmarks/array_example.smt2"));
    auto o = open(b, text);
    EXPECT_TRUE(o.session->check_sat().sat());
}

TEST(External, AgreesWithInternalOnRandom3Cnf) {
    REQUIRE_SOLVER();
    auto b = external(*solver);
    PropositionalBackend ib;
    std::string decls = "(set-logic QF_UF)";
    for (unsigned i = 0; i < 8; ++i) decls += "(declare-const " + atom_name(i) + " Bool)";
    auto ext = open(b, decls, false);
    auto in = open(ib, decls, false);
    for (unsigned i = 0; i < 8; ++i) {
        ext.table.intern(atom_name(i));
        in.table.intern(atom_name(i));
    }
    std::mt19937 rng(2024);
    std::uniform_int_distribution<unsigned> vars(3, 8), clauses(1, 40), coin(0, 1);
    int sat = 0;
    for (int k = 0; k < 500; ++k) {
        unsigned n = vars(rng);
        std::uniform_int_distribution<unsigned> atom(0, n - 1);
        std::vector<Clause> cnf;
        for (unsigned c = clauses(rng); c > 0; --c)
            cnf.push_back(Clause{Lit::make(atom(rng), coin(rng)), Lit::make(atom(rng), coin(rng)),
                                 Lit::make(atom(rng), coin(rng))});
        std::vector<PClause> pcnf;
        for (const auto& c : cnf) pcnf.push_back(to_pclause(c));
        bool truth = !models(n, pcnf).empty();
        ScopedFrame fe(*ext.session, std::span<const Clause>(cnf));
        ScopedFrame fi(*in.session, std::span<const Clause>(cnf));
        auto re = ext.session->check_sat().status, ri = in.session->check_sat().status;
        EXPECT_EQ(re, ri) << "instance " << k;
        EXPECT_EQ(ri == SatStatus::sat, truth) << "instance " << k;
        sat += truth;
    }
    // Both outcomes are exercised.
    EXPECT_GT(sat, 50);
    EXPECT_LT(sat, 450);
}

TEST(External, NestedPushPopMatchesFreshSessions) {
    REQUIRE_SOLVER();
    std::mt19937 rng(99);
    auto in = random_instance(rng, 8, 4);
    std::string text = problem_text(in);
    auto b = external(*solver);
    PropositionalBackend ib;
    for (Backend* backend : {static_cast<Backend*>(&b), static_cast<Backend*>(&ib)}) {
        auto o = open(*backend, text);
        for (unsigned i = 0; i < 8; ++i) o.table.intern(atom_name(i));
        std::uniform_int_distribution<unsigned> atom(0, 7), coin(0, 1);
        std::vector<Clause> frames;
        std::vector<SatStatus> seen;
        for (int d = 0; d < 50; ++d) {
            // Mostly wide clauses so that deep prefixes stay satisfiable.
            Clause c{Lit::make(atom(rng), coin(rng)), Lit::make(atom(rng), coin(rng)),
                     Lit::make(atom(rng), coin(rng))};
            Clause frame[] = {c};
            o.session->assert_clauses_scoped(frame);
            frames.push_back(c);
            seen.push_back(o.session->check_sat().status);
        }
        EXPECT_EQ(o.session->depth(), 50u);
        for (int d = 49; d >= 0; --d) {
            if (d % 7 == 0) {
                auto fresh = backend->open(o.problem, o.table);
                std::vector<Clause> prefix(frames.begin(), frames.begin() + d + 1);
                fresh->assert_clauses_scoped(prefix);
                EXPECT_EQ(fresh->check_sat().status, seen[d]) << "depth " << d;
            }
            EXPECT_EQ(o.session->check_sat().status, seen[d]) << "depth " << d;
            o.session->retract_scope();
        }
        auto fresh = backend->open(o.problem, o.table);
        EXPECT_EQ(o.session->check_sat().status, fresh->check_sat().status);
    }
}

TEST(External, TimeoutRestartsAndAnswersUnknown) {
    // A "solver" that swallows its input and never replies.
    SolverConfig cfg;
    cfg.argv = {"sh", "-c", "cat > /dev/null"};
    cfg.query_timeout = std::chrono::milliseconds(200);
    SmtBackend b(cfg);
    auto o = open(b, "(declare-const p Bool)");
    Lit frame[] = {o.table.intern("p")};
    o.session->assert_scoped(frame);
    auto r = o.session->check_sat();
    EXPECT_EQ(r.status, SatStatus::unknown);
    auto& s = dynamic_cast<SmtSession&>(*o.session);
    EXPECT_EQ(s.restarts(), 1u);
    EXPECT_EQ(s.depth(), 1u);
}

TEST(External, ErrorReplyIsAHardFailure) {
    SolverConfig cfg;
    cfg.argv = {"sh", "-c", "read line; echo '(error \"unsupported\")'; cat > /dev/null"};
    SmtBackend b(cfg);
    auto o = open(b, "(declare-const p Bool)");
    EXPECT_THROW(o.session->check_sat(), BackendError);
}
