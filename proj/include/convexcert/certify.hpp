#ifndef CONVEXCERT_CERTIFY_HPP
#define CONVEXCERT_CERTIFY_HPP

// Sampled checks of the convexity, strong convexity and smoothness
// inequalities. Every check is a necessary-condition test: a violated verdict
// carries a concrete witness, a holding verdict is evidence over the sample.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convexcert/core.hpp"
#include "convexcert/zoo.hpp"

namespace convexcert::certify {

enum class ConditionId {
    CVX_JENSEN,
    CVX_FIRST_ORDER,
    CVX_MONOTONE,
    SC_DEF,
    SC_JENSEN,
    SC_FIRST_ORDER,
    SC_MONOTONE,
    SCI_PL,
    SCI_GRADNORM,
    SCI_UPPER,
    SCI_COCOERCIVE,
    SM_0,
    SM_1,
    SM_2,
    SM_3,
    SM_4,
    SM_5,
    SM_6,
    SM_7,
    CONJ_12,
    CONJ_23,
};

inline constexpr std::array<std::string_view, 21> kConditionNames{
    "CVX_JENSEN", "CVX_FIRST_ORDER", "CVX_MONOTONE", "SC_DEF",        "SC_JENSEN", "SC_FIRST_ORDER", "SC_MONOTONE",
    "SCI_PL",     "SCI_GRADNORM",    "SCI_UPPER",    "SCI_COCOERCIVE", "SM_0",      "SM_1",           "SM_2",
    "SM_3",       "SM_4",            "SM_5",         "SM_6",          "SM_7",      "CONJ_12",        "CONJ_23"};

inline std::string to_string(ConditionId id) { return std::string(kConditionNames[static_cast<std::size_t>(id)]); }

inline std::optional<ConditionId> parse_condition(std::string_view name) {
    for (std::size_t i = 0; i < kConditionNames.size(); ++i)
        if (kConditionNames[i] == name) return static_cast<ConditionId>(i);
    return std::nullopt;
}

inline constexpr std::array kConvexityConditions{ConditionId::CVX_JENSEN, ConditionId::CVX_FIRST_ORDER,
                                                 ConditionId::CVX_MONOTONE};
inline constexpr std::array kStrongConvexityConditions{ConditionId::SC_DEF, ConditionId::SC_JENSEN,
                                                       ConditionId::SC_FIRST_ORDER, ConditionId::SC_MONOTONE};
inline constexpr std::array kImplicationConditions{ConditionId::SCI_PL, ConditionId::SCI_GRADNORM,
                                                   ConditionId::SCI_UPPER, ConditionId::SCI_COCOERCIVE};
inline constexpr std::array kSmoothnessConditions{ConditionId::SM_0, ConditionId::SM_1, ConditionId::SM_2,
                                                  ConditionId::SM_3, ConditionId::SM_4, ConditionId::SM_5,
                                                  ConditionId::SM_6, ConditionId::SM_7};

template <std::size_t N>
bool is_one_of(ConditionId id, const std::array<ConditionId, N>& set) {
    return std::find(set.begin(), set.end(), id) != set.end();
}

/// "holds" iff worst_margin >= -(atol + rtol * scale).
struct Tolerance {
    double atol = 1e-9;
    double rtol = 1e-7;
};

struct Witness {
    Point x;
    Point y;
    double alpha = 0.0;
};

struct CertVerdict {
    ConditionId condition = ConditionId::CVX_JENSEN;
    bool holds = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;
    std::size_t n_evaluated = 0;
    std::size_t n_degenerate = 0;  // pairs with |y - x| <= 1e-9, discarded
    std::size_t n_skipped = 0;     // samples outside dom f*
    double scale = 0.0;            // max |side| encountered
    bool witness_reverified = false;
    std::optional<double> parameter;  // mu or L the check ran at
    std::string selection_rule;
    std::vector<std::string> notes;
};

inline constexpr double kDegeneratePairDistance = 1e-9;

// ---------------------------------------------------------------------------
// Evaluation engine
// ---------------------------------------------------------------------------

namespace detail {

struct Params {
    double mu = 0.0;
    double L = 0.0;
    double f_min = 0.0;
};

/// Receives (margin, scale, witness) for every inequality instance.
using Emit = std::function<void(double margin, double scale, const Point& x, const Point& y, double alpha)>;

inline void emit_sides(const Emit& emit, double big, double small, const Point& x, const Point& y, double alpha) {
    emit(big - small, std::max(std::fabs(big), std::fabs(small)), x, y, alpha);
}

/// Evaluates one triple for an oracle-based condition. Returns false if the
/// pair is degenerate and was skipped.
inline bool evaluate_triple(const FunctionOracle& f, ConditionId id, const Params& p, const Point& x,
                            const Point& y, std::span<const double> alphas, const Emit& emit) {
    using C = ConditionId;

    if (id == C::SCI_PL) {
        for (const Point* q : {&x, &y}) {
            const Point s = f.grad_select(*q);
            emit_sides(emit, 0.5 * squared_norm(s), p.mu * (f.value(*q) - p.f_min), *q, *q, 1.0);
        }
        return true;
    }

    const Point d = y - x;
    const double dist2 = squared_norm(d);
    if (std::sqrt(dist2) <= kDegeneratePairDistance) return false;

    // Jensen-type conditions on an auxiliary g = a f + b/2 |.|^2
    auto jensen = [&](double a, double b, double curvature_term, bool reversed) {
        auto g = [&](const Point& z) { return a * f.value(z) + 0.5 * b * squared_norm(z); };
        const double gx = g(x), gy = g(y);
        for (double alpha : alphas) {
            const double chord = alpha * gx + (1.0 - alpha) * gy;
            const double mid = g(interpolate(x, y, alpha));
            const double extra = alpha * (1.0 - alpha) * curvature_term;
            if (!reversed)
                emit_sides(emit, chord - extra, mid, x, y, alpha);
            else
                emit_sides(emit, mid, chord - extra, x, y, alpha);
        }
    };

    switch (id) {
        case C::CVX_JENSEN: jensen(1.0, 0.0, 0.0, false); return true;
        case C::SC_DEF: jensen(1.0, -p.mu, 0.0, false); return true;
        case C::SM_1: jensen(-1.0, p.L, 0.0, false); return true;
        case C::SC_JENSEN: jensen(1.0, 0.0, 0.5 * p.mu * dist2, false); return true;
        case C::SM_4: jensen(1.0, 0.0, 0.5 * p.L * dist2, true); return true;
        case C::SM_7: {
            const Point gdiff = f.grad_select(x) - f.grad_select(y);
            jensen(1.0, 0.0, squared_norm(gdiff) / (2.0 * p.L), false);
            return true;
        }
        default: break;
    }

    const double fx = f.value(x), fy = f.value(y);
    const Point sx = f.grad_select(x), sy = f.grad_select(y);
    const Point sdiff = sy - sx;
    const double inner = dot(sdiff, d);
    const double linear = fx + dot(sx, d);

    switch (id) {
        case C::CVX_FIRST_ORDER: emit_sides(emit, fy, linear, x, y, 0.0); break;
        case C::CVX_MONOTONE: emit_sides(emit, inner, 0.0, x, y, 0.0); break;
        case C::SC_FIRST_ORDER: emit_sides(emit, fy, linear + 0.5 * p.mu * dist2, x, y, 0.0); break;
        case C::SC_MONOTONE: emit_sides(emit, inner, p.mu * dist2, x, y, 0.0); break;
        case C::SCI_GRADNORM: emit_sides(emit, norm(sdiff), p.mu * std::sqrt(dist2), x, y, 0.0); break;
        case C::SCI_UPPER:
            emit_sides(emit, linear + squared_norm(sdiff) / (2.0 * p.mu), fy, x, y, 0.0);
            break;
        case C::SCI_COCOERCIVE: emit_sides(emit, squared_norm(sdiff) / p.mu, inner, x, y, 0.0); break;
        case C::SM_0: emit_sides(emit, p.L * std::sqrt(dist2), norm(sdiff), x, y, 0.0); break;
        case C::SM_2: emit_sides(emit, linear + 0.5 * p.L * dist2, fy, x, y, 0.0); break;
        case C::SM_3: emit_sides(emit, p.L * dist2, inner, x, y, 0.0); break;
        case C::SM_5: emit_sides(emit, fy, linear + squared_norm(sdiff) / (2.0 * p.L), x, y, 0.0); break;
        case C::SM_6: emit_sides(emit, inner, squared_norm(sdiff) / p.L, x, y, 0.0); break;
        default: throw ContractError("condition " + to_string(id) + " is not an oracle condition");
    }
    return true;
}

/// Running min of margins; ties keep the lowest sample index.
class Accumulator {
public:
    Accumulator(ConditionId id, Tolerance tol) : tol_(tol) { verdict_.condition = id; }

    Emit emitter() {
        return [this](double margin, double scale, const Point& x, const Point& y, double alpha) {
            ++verdict_.n_evaluated;
            verdict_.scale = std::max(verdict_.scale, scale);
            if (margin < verdict_.worst_margin) {
                verdict_.worst_margin = margin;
                verdict_.witness = Witness{x, y, alpha};
            }
        };
    }

    CertVerdict& verdict() { return verdict_; }

    CertVerdict finish() {
        verdict_.holds = verdict_.n_evaluated == 0 || verdict_.worst_margin >= -threshold();
        return verdict_;
    }

    double threshold() const { return tol_.atol + tol_.rtol * verdict_.scale; }

private:
    Tolerance tol_;
    CertVerdict verdict_;
};

inline CertVerdict run_oracle_check(const FunctionOracle& f, ConditionId id, const Params& p,
                                    const SamplingPlan& plan, Tolerance tol) {
    if (plan.box.dimension() != f.dimension())
        throw ContractError("sampling box dimension " + std::to_string(plan.box.dimension()) +
                            " does not match oracle dimension " + std::to_string(f.dimension()));
    Accumulator acc(id, tol);
    const Emit emit = acc.emitter();
    for (const SampleTriple& t : sample_points(plan)) {
        const std::vector<double> alphas = plan.alphas_for(t.alpha);
        if (!evaluate_triple(f, id, p, t.x, t.y, alphas, emit)) ++acc.verdict().n_degenerate;
    }
    CertVerdict v = acc.finish();
    v.selection_rule = f.selection_rule();

    if (!v.holds && v.witness) {
        // re-evaluate the witness in isolation; the stored margin must reproduce
        double again = std::numeric_limits<double>::infinity();
        const double alpha = v.witness->alpha;
        evaluate_triple(f, id, p, v.witness->x, v.witness->y, std::span<const double>(&alpha, 1),
                        [&](double m, double, const Point&, const Point&, double) { again = std::min(again, m); });
        v.witness_reverified = again == v.worst_margin;
        if (!v.witness_reverified)
            v.notes.push_back("witness re-evaluation gave margin " + std::to_string(again));
    }
    if (!f.smooth()) v.notes.push_back("subgradient selection: " + f.selection_rule());
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public checks
// ---------------------------------------------------------------------------

/// Jensen, first-order or monotone-subgradient test of convexity.
inline CertVerdict check_convexity(const FunctionOracle& f, const SamplingPlan& plan, ConditionId which,
                                   Tolerance tol = {}) {
    if (!is_one_of(which, kConvexityConditions))
        throw ContractError("check_convexity: " + to_string(which) + " is not a convexity condition");
    return detail::run_oracle_check(f, which, {}, plan, tol);
}

/// Strong convexity with parameter mu; SC_DEF tests convexity of f - mu/2 |x|^2.
inline CertVerdict check_strong_convexity(const FunctionOracle& f, double mu, const SamplingPlan& plan,
                                          ConditionId which, Tolerance tol = {}) {
    if (!is_one_of(which, kStrongConvexityConditions))
        throw ContractError("check_strong_convexity: " + to_string(which) + " is not a strong convexity condition");
    if (!(mu > 0)) throw ContractError("check_strong_convexity: mu must be positive");
    detail::Params p;
    p.mu = mu;
    CertVerdict v = detail::run_oracle_check(f, which, p, plan, tol);
    v.parameter = mu;
    return v;
}

/// Minimum of f over the box by multi-start projected gradient descent with
/// Armijo backtracking, seeded from the lattice points and sampled points.
inline double estimate_min_value(const FunctionOracle& f, const SamplingPlan& plan) {
    const Box& box = plan.box;
    std::vector<Point> starts = box.corners().size() <= 64 ? box.corners() : std::vector<Point>{};
    starts.push_back(box.midpoint());
    double best = HUGE_VAL;
    for (const SampleTriple& t : sample_points(plan)) {
        best = std::min({best, f.value(t.x), f.value(t.y)});
        if (starts.size() < 80) starts.push_back(t.x);
    }
    for (Point x : starts) {
        double fx = f.value(x);
        double step = 1.0;
        for (int iter = 0; iter < 500; ++iter) {
            const Point g = f.grad_select(x);
            if (norm(g) < 1e-12) break;
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                Point cand = box.clamp(x - step * g);
                const double fc = f.value(cand);
                if (fc <= fx - 1e-4 * dot(g, x - cand)) {
                    moved = !(cand == x);
                    x = std::move(cand);
                    fx = fc;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        best = std::min(best, fx);
    }
    return best;
}

/// Inequalities implied by strong convexity. SCI_PL needs the minimum value;
/// when f_min is absent it is estimated and the verdict says so.
inline CertVerdict check_sc_implication(const FunctionOracle& f, double mu, std::optional<double> f_min,
                                        const SamplingPlan& plan, ConditionId which, Tolerance tol = {}) {
    if (!is_one_of(which, kImplicationConditions))
        throw ContractError("check_sc_implication: " + to_string(which) + " is not an implication condition");
    if (!(mu > 0)) throw ContractError("check_sc_implication: mu must be positive");
    detail::Params p;
    p.mu = mu;
    bool estimated = false;
    if (which == ConditionId::SCI_PL) {
        if (f_min) {
            p.f_min = *f_min;
        } else {
            p.f_min = estimate_min_value(f, plan);
            estimated = true;
        }
    }
    CertVerdict v = detail::run_oracle_check(f, which, p, plan, tol);
    v.parameter = mu;
    if (estimated) v.notes.push_back("f_min estimated numerically: " + std::to_string(p.f_min));
    return v;
}

/// Lipschitz-gradient conditions [0]-[7] at L; requires a smooth oracle.
inline CertVerdict check_smoothness(const FunctionOracle& f, double L, const SamplingPlan& plan, ConditionId which,
                                    Tolerance tol = {}) {
    if (!is_one_of(which, kSmoothnessConditions))
        throw ContractError("check_smoothness: " + to_string(which) + " is not a smoothness condition");
    if (!f.smooth()) throw ContractError("check_smoothness: oracle is not smooth");
    if (!(L > 0)) throw ContractError("check_smoothness: L must be positive");
    detail::Params p;
    p.L = L;
    CertVerdict v = detail::run_oracle_check(f, which, p, plan, tol);
    v.parameter = L;
    return v;
}

// ---------------------------------------------------------------------------
// Constant estimation
// ---------------------------------------------------------------------------

using GradientMap = std::function<Point(const Point&)>;

struct QuotientEstimate {
    double value = 0.0;
    std::size_t n_pairs = 0;       // pairs used
    std::size_t n_degenerate = 0;  // pairs discarded as too close
};

/// inf over pairs of (g(y) - g(x))^T (y - x) / |y - x|^2.
inline QuotientEstimate infimum_monotone_quotient(const GradientMap& g, std::span<const SampleTriple> pairs) {
    QuotientEstimate e;
    e.value = HUGE_VAL;
    for (const auto& t : pairs) {
        const Point d = t.y - t.x;
        const double d2 = squared_norm(d);
        if (std::sqrt(d2) <= kDegeneratePairDistance) {
            ++e.n_degenerate;
            continue;
        }
        e.value = std::min(e.value, dot(g(t.y) - g(t.x), d) / d2);
        ++e.n_pairs;
    }
    return e;
}

/// sup over pairs of |g(y) - g(x)| / |y - x|.
inline QuotientEstimate supremum_lipschitz_quotient(const GradientMap& g, std::span<const SampleTriple> pairs) {
    QuotientEstimate e;
    for (const auto& t : pairs) {
        const double dist = norm(t.y - t.x);
        if (dist <= kDegeneratePairDistance) {
            ++e.n_degenerate;
            continue;
        }
        e.value = std::max(e.value, norm(g(t.y) - g(t.x)) / dist);
        ++e.n_pairs;
    }
    return e;
}

/// Sampled strong convexity modulus, clamped below at 0.
inline double estimate_mu(const FunctionOracle& f, const SamplingPlan& plan) {
    const auto pairs = sample_points(plan);
    const auto e = infimum_monotone_quotient([&f](const Point& x) { return f.grad_select(x); }, pairs);
    if (e.n_pairs == 0) throw ContractError("estimate_mu: plan has no non-degenerate pairs");
    return std::max(e.value, 0.0);
}

/// Sampled Lipschitz constant of the (selected) gradient.
inline double estimate_L(const FunctionOracle& f, const SamplingPlan& plan) {
    const auto pairs = sample_points(plan);
    const auto e = supremum_lipschitz_quotient([&f](const Point& x) { return f.grad_select(x); }, pairs);
    if (e.n_pairs == 0) throw ContractError("estimate_L: plan has no non-degenerate pairs");
    return e.value;
}

// ---------------------------------------------------------------------------
// Conjugate relations
// ---------------------------------------------------------------------------

/// CONJ_12: f*(s) = s^T x - f(x) at s = grad_select(x).
/// CONJ_23: x is a subgradient of f* at s, tested against the other sampled
/// subgradient s_y: f*(s_y) >= f*(s_x) + x^T (s_y - s_x).
/// Samples whose subgradient falls outside dom f* are skipped and counted.
inline CertVerdict check_conjugate_relations(const zoo::ZooEntry& entry, const SamplingPlan& plan, ConditionId which,
                                             Tolerance tol = {}) {
    if (which != ConditionId::CONJ_12 && which != ConditionId::CONJ_23)
        throw ContractError("check_conjugate_relations: " + to_string(which) + " is not a conjugate condition");
    if (!entry.conjugate) throw ContractError("check_conjugate_relations: entry '" + entry.name + "' has no conjugate");
    const FunctionOracle& f = entry.oracle;
    const FunctionOracle& fs = *entry.conjugate;

    detail::Accumulator acc(which, tol);
    const detail::Emit emit = acc.emitter();
    auto young_gap = [&](const Point& x, const Point& s) {
        const double lhs = fs.value(s);
        const double rhs = dot(s, x) - f.value(x);
        emit(-std::fabs(lhs - rhs), std::max(std::fabs(lhs), std::fabs(rhs)), x, x, 0.0);
    };

    for (const SampleTriple& t : sample_points(plan)) {
        const Point sx = f.grad_select(t.x);
        const Point sy = f.grad_select(t.y);
        if (which == ConditionId::CONJ_12) {
            for (const auto& [x, s] : {std::pair{&t.x, &sx}, std::pair{&t.y, &sy}}) {
                if (!entry.in_conjugate_domain(*s)) {
                    ++acc.verdict().n_skipped;
                    continue;
                }
                young_gap(*x, *s);
            }
        } else {
            if (!entry.in_conjugate_domain(sx) || !entry.in_conjugate_domain(sy)) {
                ++acc.verdict().n_skipped;
                continue;
            }
            const double big = fs.value(sy);
            const double small = fs.value(sx) + dot(t.x, sy - sx);
            detail::emit_sides(emit, big, small, t.x, t.y, 0.0);
        }
    }
    CertVerdict v = acc.finish();
    v.selection_rule = f.selection_rule();
    if (!v.holds && v.witness) {
        const Point& x = v.witness->x;
        const Point& y = v.witness->y;
        double again = 0.0;
        if (which == ConditionId::CONJ_12) {
            const Point s = f.grad_select(x);
            again = -std::fabs(fs.value(s) - (dot(s, x) - f.value(x)));
        } else {
            const Point sx = f.grad_select(x), sy = f.grad_select(y);
            again = fs.value(sy) - (fs.value(sx) + dot(x, sy - sx));
        }
        v.witness_reverified = again == v.worst_margin;
    }
    return v;
}

}  // namespace convexcert::certify

#endif  // CONVEXCERT_CERTIFY_HPP
