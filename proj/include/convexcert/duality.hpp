#ifndef CONVEXCERT_DUALITY_HPP
#define CONVEXCERT_DUALITY_HPP

// Numerical verification of the conjugate duality
//   f mu-strongly convex        =>  grad f* is (1/mu)-Lipschitz
//   f convex with L-Lipschitz grad  =>  f* is (1/L)-strongly convex
// and the counterexamples separating the one-directional implications.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "convexcert/certify.hpp"
#include "convexcert/conjugate.hpp"
#include "convexcert/core.hpp"
#include "convexcert/zoo.hpp"

namespace convexcert::duality {

enum class Direction { SC_to_smooth, smooth_to_SC };

inline std::string to_string(Direction d) { return d == Direction::SC_to_smooth ? "SC_to_smooth" : "smooth_to_SC"; }

inline constexpr double kBoundRtol = 1e-6;
/// Fraction of the gradient image trimmed from each side.
inline constexpr double kImageShrink = 0.05;
/// Grid size for the hull-based conjugate of nonsmooth 1-D functions.
inline constexpr std::size_t kHullGrid = 20001;

struct DualityReport {
    std::string entry;
    Direction direction = Direction::SC_to_smooth;
    double mu_f = 0.0;
    double L_f = 0.0;
    double mu_conj = 0.0;
    double L_conj = 0.0;
    bool bound_satisfied = false;
    /// 1/mu_f - L_conj (part i) or mu_conj - 1/L_f (part ii); >= 0 when the bound holds.
    double slack = 0.0;
    std::optional<Box> primal_box;
    std::optional<Box> conjugate_box;
    std::string conjugate_source;  // "closed-form" or "numerical"
    std::optional<double> numerical_estimate;
    std::optional<double> discrepancy;  // |closed-form - numerical| estimate
    std::size_t n_pairs = 0;
    std::vector<std::string> notes;
};

namespace detail {

/// Bounding box of grad_select over the plan's sample points, shrunk per side.
inline Box gradient_image_box(const FunctionOracle& f, const std::vector<SampleTriple>& samples) {
    const std::size_t n = f.dimension();
    std::vector<double> lo(n, HUGE_VAL), hi(n, -HUGE_VAL);
    for (const auto& t : samples)
        for (const Point* p : {&t.x, &t.y}) {
            const Point g = f.grad_select(*p);
            for (std::size_t i = 0; i < n; ++i) {
                lo[i] = std::min(lo[i], g[i]);
                hi[i] = std::max(hi[i], g[i]);
            }
        }
    for (std::size_t i = 0; i < n; ++i)
        if (!(lo[i] < hi[i])) throw ContractError("gradient image is degenerate on axis " + std::to_string(i));
    return Box(Point(lo), Point(hi)).shrunk(kImageShrink);
}

/// Slope-side sample pairs. For box domains a fresh plan over the image box;
/// for non-box domains (simplex) the gradient images of the primal pairs.
inline std::vector<SampleTriple> conjugate_samples(const zoo::ZooEntry& e, const SamplingPlan& plan,
                                                   const std::vector<SampleTriple>& primal, const Box& image) {
    std::vector<SampleTriple> out;
    auto keep = [&](const Point& s) { return image.contains(s) && e.in_conjugate_domain(s); };
    if (e.conjugate_domain_contains) {
        for (const auto& t : primal) {
            SampleTriple c{e.oracle.grad_select(t.x), e.oracle.grad_select(t.y), t.alpha};
            if (keep(c.x) && keep(c.y)) out.push_back(std::move(c));
        }
        return out;
    }
    SamplingPlan conj_plan = plan;
    conj_plan.box = image;
    for (auto& t : sample_points(conj_plan))
        if (keep(t.x) && keep(t.y)) out.push_back(std::move(t));
    return out;
}

struct NumericalGradient {
    certify::GradientMap map;
    std::shared_ptr<bool> nonunique = std::make_shared<bool>(false);
};

inline NumericalGradient numerical_conjugate_gradient(const FunctionOracle& f, const Box& primal_box) {
    NumericalGradient g;
    g.map = [f, primal_box, flag = g.nonunique](const Point& s) {
        const auto r = conjugate::conjugate_gradient(f, s, primal_box);
        if (r.maybe_nonunique) *flag = true;
        return r.x;
    };
    return g;
}

/// Lipschitz constant of the gradient of the discrete conjugate of a 1-D
/// grid function, restricted to slopes inside `slopes_box`.
///
/// The discrete f* is piecewise linear; its derivative equals hull vertex
/// x_k on the slope interval between the adjacent edge slopes. Taking the
/// interval midpoints as slope samples, the estimate is the largest
/// difference quotient between consecutive samples.
inline double hull_conjugate_lipschitz(const conjugate::GridFunction& g, const Box& slopes_box) {
    const std::vector<std::size_t> hull = conjugate::lower_hull(g);
    std::vector<double> edge(hull.size() - 1);
    for (std::size_t k = 0; k + 1 < hull.size(); ++k)
        edge[k] = (g.values()[hull[k + 1]] - g.values()[hull[k]]) / (g.xs()[hull[k + 1]] - g.xs()[hull[k]]);
    // vertex k (interior) owns slopes (edge[k-1], edge[k])
    double best = 0.0;
    for (std::size_t k = 1; k + 2 < hull.size(); ++k) {
        const double c0 = 0.5 * (edge[k - 1] + edge[k]);
        const double c1 = 0.5 * (edge[k] + edge[k + 1]);
        if (edge[k - 1] < slopes_box.lo()[0] || edge[k + 1] > slopes_box.hi()[0]) continue;
        if (!(c1 > c0)) continue;
        best = std::max(best, (g.xs()[hull[k + 1]] - g.xs()[hull[k]]) / (c1 - c0));
    }
    return best;
}

inline double resolve_mu(const zoo::ZooEntry& e, const SamplingPlan& plan) {
    if (e.constants.known_mu && *e.constants.known_mu > 0) return *e.constants.known_mu;
    return certify::estimate_mu(e.oracle, plan);
}

inline double resolve_L(const zoo::ZooEntry& e, const SamplingPlan& plan) {
    if (e.constants.known_L && *e.constants.known_L > 0) return *e.constants.known_L;
    return certify::estimate_L(e.oracle, plan);
}

}  // namespace detail

/// f mu-strongly convex => grad f* is (1/mu)-Lipschitz, checked by the
/// sampled Lipschitz quotient of grad f* over the shrunk gradient image.
inline DualityReport verify_part_i(const zoo::ZooEntry& e, const SamplingPlan& plan) {
    if (!e.convex) throw ContractError("verify_part_i: entry '" + e.name + "' is not convex");
    const double mu = detail::resolve_mu(e, plan);
    if (!(mu > 0)) throw ContractError("verify_part_i: entry '" + e.name + "' is not strongly convex on the plan");

    const auto primal = sample_points(plan);
    const Box image = detail::gradient_image_box(e.oracle, primal);
    const auto pairs = detail::conjugate_samples(e, plan, primal, image);
    if (pairs.empty()) throw ContractError("verify_part_i: no slope pairs inside dom f*");

    std::optional<double> closed;
    if (e.conjugate) {
        const FunctionOracle& fs = *e.conjugate;
        closed = certify::supremum_lipschitz_quotient([&fs](const Point& s) { return fs.grad_select(s); }, pairs).value;
    }

    double numerical = 0.0;
    std::vector<std::string> notes;
    if (e.oracle.dimension() == 1 && !e.oracle.smooth()) {
        const auto g = conjugate::sample_grid(e.oracle, plan.box.lo()[0], plan.box.hi()[0], kHullGrid);
        numerical = detail::hull_conjugate_lipschitz(g, image);
        notes.push_back("numerical conjugate: discrete Legendre transform on " + std::to_string(kHullGrid) +
                        " points");
    } else {
        const auto grad = detail::numerical_conjugate_gradient(e.oracle, plan.box);
        numerical = certify::supremum_lipschitz_quotient(grad.map, pairs).value;
        if (*grad.nonunique) notes.push_back("conjugate maximizer not unique at some slopes");
    }

    DualityReport r;
    r.entry = e.name;
    r.direction = Direction::SC_to_smooth;
    r.mu_f = mu;
    if (e.constants.known_L) r.L_f = *e.constants.known_L;
    r.L_conj = closed.value_or(numerical);
    r.conjugate_source = closed ? "closed-form" : "numerical";
    r.numerical_estimate = numerical;
    if (closed) r.discrepancy = std::fabs(*closed - numerical);
    r.slack = 1.0 / mu - r.L_conj;
    r.bound_satisfied = r.L_conj <= (1.0 / mu) * (1.0 + kBoundRtol);
    r.primal_box = plan.box;
    r.conjugate_box = image;
    r.n_pairs = pairs.size();
    r.notes = std::move(notes);
    return r;
}

/// f convex with L-Lipschitz gradient => f* is (1/L)-strongly convex,
/// checked by the sampled monotonicity quotient of grad f*.
inline DualityReport verify_part_ii(const zoo::ZooEntry& e, const SamplingPlan& plan) {
    if (!e.convex) throw ContractError("verify_part_ii: entry '" + e.name + "' is not convex");
    if (!e.oracle.smooth()) throw ContractError("verify_part_ii: entry '" + e.name + "' is not smooth");
    const double L = detail::resolve_L(e, plan);

    const auto primal = sample_points(plan);
    const Box image = detail::gradient_image_box(e.oracle, primal);
    const auto pairs = detail::conjugate_samples(e, plan, primal, image);
    if (pairs.empty()) throw ContractError("verify_part_ii: no slope pairs inside dom f*");

    std::optional<double> closed;
    if (e.conjugate) {
        const FunctionOracle& fs = *e.conjugate;
        closed = certify::infimum_monotone_quotient([&fs](const Point& s) { return fs.grad_select(s); }, pairs).value;
    }
    const auto grad = detail::numerical_conjugate_gradient(e.oracle, plan.box);
    const double numerical = certify::infimum_monotone_quotient(grad.map, pairs).value;

    DualityReport r;
    r.entry = e.name;
    r.direction = Direction::smooth_to_SC;
    r.L_f = L;
    if (e.constants.known_mu) r.mu_f = *e.constants.known_mu;
    r.mu_conj = closed.value_or(numerical);
    r.conjugate_source = closed ? "closed-form" : "numerical";
    r.numerical_estimate = numerical;
    if (closed) r.discrepancy = std::fabs(*closed - numerical);
    r.slack = r.mu_conj - 1.0 / L;
    r.bound_satisfied = r.mu_conj >= (1.0 / L) * (1.0 - kBoundRtol);
    r.primal_box = plan.box;
    r.conjugate_box = image;
    r.n_pairs = pairs.size();
    if (*grad.nonunique) r.notes.push_back("conjugate maximizer not unique at some slopes");
    return r;
}

// ---------------------------------------------------------------------------
// Counterexamples
// ---------------------------------------------------------------------------

struct CounterexampleClaim {
    std::string claim;
    certify::CertVerdict holding;
    certify::CertVerdict violating;
    /// Further violated verdicts supporting the claim (e.g. other mu values).
    std::vector<certify::CertVerdict> supporting;
};

inline SamplingPlan counterexample_plan(Box box) { return SamplingPlan{std::move(box), 2000, 3, 1, 1e-5}; }

/// The fixed instances showing that the one-directional implications do not
/// reverse without convexity or strong convexity.
inline std::vector<CounterexampleClaim> counterexample_suite() {
    using certify::ConditionId;
    std::vector<CounterexampleClaim> out;

    {
        const auto sine = zoo::make_sine();
        const auto plan = counterexample_plan(Box(Point{0.0}, Point{std::numbers::pi}));
        out.push_back({"sin satisfies SM_0 at L=1 but violates SM_5 (cocoercive bounds need convexity)",
                       certify::check_smoothness(sine.oracle, 1.0, plan, ConditionId::SM_0),
                       certify::check_smoothness(sine.oracle, 1.0, plan, ConditionId::SM_5),
                       {}});
    }
    {
        const auto pl = zoo::make_pl_nonconvex();
        const auto pl_plan = counterexample_plan(Box(Point{-10.0}, Point{10.0}));
        const auto cvx_plan = counterexample_plan(Box(Point{-3.0}, Point{3.0}));
        out.push_back({"x^2+3sin^2(x) satisfies SCI_PL at mu=1/32 but is not convex",
                       certify::check_sc_implication(pl.oracle, 1.0 / 32.0, pl.constants.known_min_value, pl_plan,
                                                     ConditionId::SCI_PL),
                       certify::check_convexity(pl.oracle, cvx_plan, ConditionId::CVX_JENSEN),
                       {}});
    }
    {
        const auto huber = zoo::make_huber(1.0);
        const auto plan = counterexample_plan(Box(Point{-3.0}, Point{3.0}));
        CounterexampleClaim c{"Huber(1) satisfies SM_2 at L=1 but is not strongly convex for any tested mu >= 1e-3",
                              certify::check_smoothness(huber.oracle, 1.0, plan, ConditionId::SM_2),
                              certify::check_strong_convexity(huber.oracle, 1e-3, plan, ConditionId::SC_MONOTONE),
                              {}};
        for (double mu : {1e-2, 1e-1, 1.0})
            c.supporting.push_back(certify::check_strong_convexity(huber.oracle, mu, plan, ConditionId::SC_MONOTONE));
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace convexcert::duality

#endif  // CONVEXCERT_DUALITY_HPP
