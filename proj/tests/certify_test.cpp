#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "convexcert/certify.hpp"
#include "convexcert/expr.hpp"
#include "convexcert/zoo.hpp"

using namespace convexcert;
using namespace convexcert::certify;

namespace {

FunctionOracle from_text(const char* text, std::size_t n = 1) {
    return expr::make_oracle(expr::parse_expression(text, n));
}

SamplingPlan plan1(double lo, double hi, std::size_t n = 1000, std::uint64_t seed = 1) {
    return SamplingPlan{Box(Point{lo}, Point{hi}), n, 1, seed, 1e-5};
}

}  // namespace

TEST(Conditions, NamesRoundTrip) {
    for (std::size_t i = 0; i < kConditionNames.size(); ++i) {
        const auto id = static_cast<ConditionId>(i);
        EXPECT_EQ(parse_condition(to_string(id)), id);
    }
    EXPECT_FALSE(parse_condition("SM_8").has_value());
}

TEST(Convexity, SquareHolds) {
    const auto f = from_text("x1^2");
    for (auto id : kConvexityConditions) {
        const auto v = check_convexity(f, plan1(-5, 5, 1000, 3), id);
        EXPECT_TRUE(v.holds) << to_string(id);
        EXPECT_GE(v.worst_margin, 0.0) << to_string(id);
        EXPECT_GT(v.n_evaluated, 0u);
    }
}

TEST(Convexity, SineViolatedWithReverifiedWitness) {
    const auto f = zoo::make_sine().oracle;
    const auto v = check_convexity(f, plan1(0, 2 * std::numbers::pi), ConditionId::CVX_JENSEN);
    ASSERT_FALSE(v.holds);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_TRUE(v.witness_reverified);
    const auto& w = *v.witness;
    const double lhs = f.value(interpolate(w.x, w.y, w.alpha));
    const double rhs = w.alpha * f.value(w.x) + (1 - w.alpha) * f.value(w.y);
    EXPECT_GT(lhs, rhs);
}

TEST(Convexity, AbsFirstOrderAtKink) {
    const auto f = zoo::make_abs().oracle;
    EXPECT_TRUE(check_convexity(f, plan1(-2, 2), ConditionId::CVX_FIRST_ORDER).holds);
    EXPECT_TRUE(check_convexity(f, plan1(-2, 2), ConditionId::CVX_MONOTONE).holds);
    EXPECT_THROW(check_convexity(f, plan1(-2, 2), ConditionId::SM_0), ContractError);
}

TEST(Convexity, EvaluationFailurePropagates) {
    const auto f = from_text("log(x1)");
    EXPECT_THROW(check_convexity(f, plan1(-1, 1), ConditionId::CVX_JENSEN), EvaluationError);
}

TEST(StrongConvexity, SquareTight) {
    const auto f = from_text("x1^2");
    const auto v = check_strong_convexity(f, 2.0, plan1(-5, 5), ConditionId::SC_MONOTONE);
    EXPECT_TRUE(v.holds);
    EXPECT_NEAR(v.worst_margin, 0.0, 1e-9);
    EXPECT_EQ(v.parameter, 2.0);
    for (auto id : kStrongConvexityConditions) EXPECT_TRUE(check_strong_convexity(f, 2.0, plan1(-5, 5), id).holds);
}

TEST(StrongConvexity, SquareAboveModulus) {
    const auto f = from_text("x1^2");
    for (auto id : kStrongConvexityConditions) {
        const auto v = check_strong_convexity(f, 2.5, plan1(-5, 5), id);
        EXPECT_FALSE(v.holds) << to_string(id);
        EXPECT_TRUE(v.witness_reverified) << to_string(id);
    }
}

TEST(StrongConvexity, HuberWitnessInLinearRegion) {
    const auto f = zoo::make_huber(1.0).oracle;
    const auto v = check_strong_convexity(f, 0.1, plan1(-3, 3), ConditionId::SC_MONOTONE);
    ASSERT_FALSE(v.holds);
    ASSERT_TRUE(v.witness);
    const Point& x = v.witness->x;
    const Point& y = v.witness->y;
    EXPECT_GT(std::fabs(x[0]), 1.0);
    EXPECT_GT(std::fabs(y[0]), 1.0);
    const double lhs = dot(f.grad_select(y) - f.grad_select(x), y - x);
    EXPECT_LT(lhs, 0.1 * squared_norm(y - x));
}

TEST(StrongConvexity, Preconditions) {
    const auto f = from_text("x1^2");
    EXPECT_THROW(check_strong_convexity(f, 0.0, plan1(-1, 1), ConditionId::SC_DEF), ContractError);
    EXPECT_THROW(check_strong_convexity(f, 1.0, plan1(-1, 1), ConditionId::CVX_JENSEN), ContractError);
}

TEST(Implications, SquarePl) {
    const auto f = from_text("x1^2");
    const auto v = check_sc_implication(f, 2.0, 0.0, plan1(-5, 5), ConditionId::SCI_PL);
    EXPECT_TRUE(v.holds);
    EXPECT_TRUE(v.notes.empty());
    for (auto id : kImplicationConditions) EXPECT_TRUE(check_sc_implication(f, 2.0, 0.0, plan1(-5, 5), id).holds);
}

TEST(Implications, PlWithEstimatedMinimum) {
    const auto f = from_text("(x1 - 1)^2 + 3");
    const auto v = check_sc_implication(f, 2.0, std::nullopt, plan1(-5, 5), ConditionId::SCI_PL);
    EXPECT_TRUE(v.holds);
    ASSERT_EQ(v.notes.size(), 1u);
    EXPECT_NE(v.notes[0].find("estimated"), std::string::npos);
    EXPECT_NEAR(estimate_min_value(f, plan1(-5, 5)), 3.0, 1e-12);
}

TEST(Implications, PlNonconvexHoldsWhileScFails) {
    const auto e = zoo::make_pl_nonconvex();
    const auto pl = check_sc_implication(e.oracle, 1.0 / 32.0, 0.0, plan1(-10, 10, 2000), ConditionId::SCI_PL);
    EXPECT_TRUE(pl.holds);
    for (double mu : {1e-3, 0.1, 1.0}) {
        const auto sc = check_strong_convexity(e.oracle, mu, plan1(-3, 3), ConditionId::SC_MONOTONE);
        EXPECT_FALSE(sc.holds) << mu;
    }
}

TEST(Smoothness, SineBattery) {
    const auto f = zoo::make_sine().oracle;
    const auto plan = plan1(0, 2 * std::numbers::pi, 2000);
    for (auto id : {ConditionId::SM_0, ConditionId::SM_1, ConditionId::SM_2, ConditionId::SM_3, ConditionId::SM_4})
        EXPECT_TRUE(check_smoothness(f, 1.0, plan, id).holds) << to_string(id);
    for (auto id : {ConditionId::SM_5, ConditionId::SM_6, ConditionId::SM_7}) {
        const auto v = check_smoothness(f, 1.0, plan, id);
        EXPECT_FALSE(v.holds) << to_string(id);
        EXPECT_TRUE(v.witness_reverified) << to_string(id);
    }
}

TEST(Smoothness, SineSm5WitnessAtZeroPi) {
    const auto f = zoo::make_sine().oracle;
    const auto v = check_smoothness(f, 1.0, plan1(0, std::numbers::pi), ConditionId::SM_5);
    ASSERT_FALSE(v.holds);
    ASSERT_TRUE(v.witness);
    EXPECT_LE(v.worst_margin, -(std::numbers::pi + 2) + 1e-6);
    const double a = v.witness->x[0], b = v.witness->y[0];
    EXPECT_EQ(std::min(a, b), 0.0);
    EXPECT_EQ(std::max(a, b), std::numbers::pi);
}

TEST(Smoothness, HuberSm2Holds) {
    EXPECT_TRUE(check_smoothness(zoo::make_huber(1.0).oracle, 1.0, plan1(-3, 3), ConditionId::SM_2).holds);
}

TEST(Smoothness, NonsmoothRejected) {
    EXPECT_THROW(check_smoothness(zoo::make_abs().oracle, 1.0, plan1(-1, 1), ConditionId::SM_0), ContractError);
    EXPECT_THROW(check_smoothness(from_text("x1^2"), 0.0, plan1(-1, 1), ConditionId::SM_0), ContractError);
}

TEST(Smoothness, ConvexEquivalenceBattery) {
    for (const auto& e : zoo::catalog()) {
        if (!e.convex || !e.oracle.smooth() || !e.constants.known_L) continue;
        const SamplingPlan plan{e.default_box, 1000, 2, 1, 1e-5};
        for (auto id : kSmoothnessConditions) {
            const auto v = check_smoothness(e.oracle, *e.constants.known_L, plan, id);
            EXPECT_TRUE(v.holds) << e.name << ' ' << to_string(id) << " margin " << v.worst_margin;
            EXPECT_GE(v.worst_margin, -1e-7) << e.name << ' ' << to_string(id);
        }
    }
}

TEST(StrongConvexity, ZooBattery) {
    for (const auto& e : zoo::catalog()) {
        if (!e.constants.known_mu || *e.constants.known_mu <= 0) continue;
        const double mu = *e.constants.known_mu;
        const SamplingPlan plan{e.default_box, 1000, 2, 1, 1e-5};
        for (auto id : kStrongConvexityConditions)
            EXPECT_TRUE(check_strong_convexity(e.oracle, mu, plan, id).holds) << e.name << ' ' << to_string(id);
        for (auto id : kImplicationConditions)
            EXPECT_TRUE(check_sc_implication(e.oracle, mu, e.constants.known_min_value, plan, id).holds)
                << e.name << ' ' << to_string(id);
    }
}

TEST(Verdicts, Monotone) {
    const auto q = zoo::make_quadratic({1.0, 4.0});
    const SamplingPlan plan{q.default_box, 500, 1, 2, 1e-5};
    for (auto id : kStrongConvexityConditions) {
        bool previous = true;
        for (double mu : {0.25, 0.5, 0.9, 1.0, 1.2, 2.0, 5.0}) {
            const bool holds = check_strong_convexity(q.oracle, mu, plan, id).holds;
            EXPECT_TRUE(previous || !holds) << to_string(id) << " mu=" << mu;
            previous = holds;
        }
    }
    for (auto id : kSmoothnessConditions) {
        bool previous = false;
        for (double L : {1.0, 2.0, 3.9, 4.0, 4.5, 8.0}) {
            const bool holds = check_smoothness(q.oracle, L, plan, id).holds;
            EXPECT_TRUE(!previous || holds) << to_string(id) << " L=" << L;
            previous = holds;
        }
    }
}

TEST(Verdicts, DeterministicAndDegenerateCounted) {
    const auto f = from_text("x1^2 + x2^4", 2);
    const SamplingPlan plan{Box::cube(2, -1.0, 1.0), 300, 2, 9, 1e-5};
    const auto a = check_convexity(f, plan, ConditionId::CVX_MONOTONE);
    const auto b = check_convexity(f, plan, ConditionId::CVX_MONOTONE);
    EXPECT_EQ(a.worst_margin, b.worst_margin);
    EXPECT_EQ(a.n_evaluated, b.n_evaluated);

    FunctionOracle g(1, [](const Point& x) { return x[0] * x[0]; }, [](const Point& x) { return 2.0 * x; }, true);
    const SamplingPlan tiny{Box(Point{0.0}, Point{1e-10}), 10, 1, 1, 1e-5};
    const auto v = check_convexity(g, tiny, ConditionId::CVX_MONOTONE);
    EXPECT_EQ(v.n_degenerate, 10u);
    EXPECT_EQ(v.n_evaluated, 0u);
    EXPECT_TRUE(v.holds);
}

TEST(Estimators, Examples) {
    EXPECT_NEAR(estimate_mu(from_text("x1^2"), plan1(-5, 5)), 2.0, 1e-9);
    const auto q = zoo::make_quadratic({1.0, 4.0});
    const SamplingPlan qp{q.default_box, 1000, 1, 1, 1e-5};
    EXPECT_NEAR(estimate_mu(q.oracle, qp), 1.0, 1e-6);
    EXPECT_NEAR(estimate_L(q.oracle, qp), 4.0, 1e-6);
    EXPECT_NEAR(estimate_mu(zoo::make_huber(1.0).oracle, plan1(-3, 3)), 0.0, 1e-6);
    EXPECT_NEAR(estimate_L(zoo::make_sine().oracle, plan1(0, 2 * std::numbers::pi)), 1.0, 1e-3);
}

TEST(Estimators, QuarticGrowsWithBox) {
    const auto f = from_text("x1^4");
    double previous = 0.0;
    for (double b : {1.0, 2.0, 4.0}) {
        const double L = estimate_L(f, plan1(-b, b, 2000));
        EXPECT_GT(L, previous);
        EXPECT_LE(L, 12 * b * b * (1 + 1e-9));
        EXPECT_GE(L, 0.9 * 12 * b * b);
        previous = L;
    }
}

TEST(Estimators, EmptyPlanRejected) {
    EXPECT_THROW(estimate_mu(from_text("x1^2"), plan1(-1, 1, 0)), ContractError);
    EXPECT_THROW(estimate_L(from_text("x1^2"), plan1(-1, 1, 0)), ContractError);
}

TEST(Estimators, MuBelowL) {
    for (const auto& e : zoo::catalog()) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const SamplingPlan plan{e.default_box, 300, 1, seed, 1e-5};
            EXPECT_LE(estimate_mu(e.oracle, plan), estimate_L(e.oracle, plan)) << e.name;
        }
    }
}

TEST(ConjugateRelations, Examples) {
    const auto q1 = zoo::make_quadratic({1.0});
    EXPECT_DOUBLE_EQ(q1.conjugate->value(q1.oracle.grad_select(Point{3.0})), 9.0 - 4.5);
    const auto q2 = zoo::make_quadratic({2.0});
    EXPECT_DOUBLE_EQ(q2.conjugate->value(q2.oracle.grad_select(Point{1.0})), 2.0 - 1.0);
    const auto h = zoo::make_huber(1.0);
    const Point s = h.oracle.grad_select(Point{3.0});
    EXPECT_EQ(s[0], 1.0);
    EXPECT_TRUE(h.in_conjugate_domain(s));
    EXPECT_DOUBLE_EQ(h.conjugate->value(s), 3.0 - 2.5);
}

TEST(ConjugateRelations, HoldForClosedFormEntries) {
    for (const auto& e : zoo::catalog()) {
        if (!e.conjugate) continue;
        const SamplingPlan plan{e.default_box, 1000, 1, 1, 1e-5};
        const auto v12 = check_conjugate_relations(e, plan, ConditionId::CONJ_12);
        EXPECT_TRUE(v12.holds) << e.name;
        EXPECT_GE(v12.worst_margin, -1e-7) << e.name;
        EXPECT_TRUE(check_conjugate_relations(e, plan, ConditionId::CONJ_23).holds) << e.name;
    }
    EXPECT_THROW(check_conjugate_relations(zoo::make_sine(), plan1(0, 1), ConditionId::CONJ_12), ContractError);
    EXPECT_THROW(check_conjugate_relations(zoo::make_abs(), plan1(0, 1), ConditionId::SM_0), ContractError);
}

TEST(ConjugateRelations, WrongConjugateViolated) {
    auto e = zoo::make_quadratic({2.0});
    e.conjugate = zoo::make_quadratic({1.0}).oracle;  // s^2/2 instead of s^2/4
    const auto v = check_conjugate_relations(e, {e.default_box, 200, 1, 1, 1e-5}, ConditionId::CONJ_12);
    EXPECT_FALSE(v.holds);
    EXPECT_TRUE(v.witness_reverified);
}

TEST(ConjugateRelations, OutOfDomainSkipped) {
    auto e = zoo::make_abs();
    const auto v = check_conjugate_relations(e, plan1(-2, 2, 200), ConditionId::CONJ_12);
    EXPECT_EQ(v.n_skipped, 0u);
    auto narrow = zoo::make_huber(1.0);
    narrow.conjugate_domain = Box(Point{-0.5}, Point{0.5});
    const auto w = check_conjugate_relations(narrow, plan1(-3, 3, 200), ConditionId::CONJ_12);
    EXPECT_GT(w.n_skipped, 0u);
    EXPECT_TRUE(w.holds);
}
