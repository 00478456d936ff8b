#ifndef CONVEXCERT_ZOO_HPP
#define CONVEXCERT_ZOO_HPP

// Benchmark functions with analytically known constants and conjugates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "convexcert/core.hpp"

namespace convexcert::zoo {

struct ZooEntry {
    std::string name;
    FunctionOracle oracle;
    ScalarConstants constants;
    std::optional<FunctionOracle> conjugate;
    /// Box containing dom f*; absent means all of R^n.
    std::optional<Box> conjugate_domain;
    /// Membership in dom f* when it is not the whole box (e.g. a simplex).
    std::function<bool(const Point&)> conjugate_domain_contains;
    bool convex = false;
    /// Box used when the caller supplies none.
    Box default_box;

    /// True when f* is finite at s.
    bool in_conjugate_domain(const Point& s) const {
        if (conjugate_domain && !conjugate_domain->contains(s)) return false;
        if (conjugate_domain_contains) return conjugate_domain_contains(s);
        return true;
    }
};

namespace detail {

inline double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

inline Point map(const Point& x, const std::function<double(double, std::size_t)>& fn) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = fn(x[i], i);
    return Point::unchecked(std::move(out));
}

}  // namespace detail

/// f(x) = 1/2 sum d_i x_i^2; mu = min d, L = max d, f*(s) = 1/2 sum s_i^2 / d_i.
inline ZooEntry make_quadratic(const std::vector<double>& diag) {
    if (diag.empty()) throw ContractError("make_quadratic: diag must be non-empty");
    for (double d : diag)
        if (!(d > 0) || !std::isfinite(d)) throw ContractError("make_quadratic: diag entries must be > 0");
    const std::size_t n = diag.size();

    FunctionOracle f(
        n,
        [diag](const Point& x) {
            double v = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) v += diag[i] * x[i] * x[i];
            return 0.5 * v;
        },
        [diag](const Point& x) { return detail::map(x, [&](double v, std::size_t i) { return diag[i] * v; }); },
        true);
    FunctionOracle conj(
        n,
        [diag](const Point& s) {
            double v = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) v += s[i] * s[i] / diag[i];
            return 0.5 * v;
        },
        [diag](const Point& s) { return detail::map(s, [&](double v, std::size_t i) { return v / diag[i]; }); },
        true);

    ScalarConstants c;
    c.known_mu = *std::min_element(diag.begin(), diag.end());
    c.known_L = *std::max_element(diag.begin(), diag.end());
    c.known_min_value = 0.0;
    c.known_minimizer = Point::zeros(n);
    return ZooEntry{"quadratic", f, c, conj, std::nullopt, {}, true, Box::cube(n, -5.0, 5.0)};
}

/// Huber: 1/2 x^2 on |x| <= delta, delta|x| - delta^2/2 beyond. L = 1, mu = 0;
/// f*(s) = 1/2 s^2 on [-delta, delta].
inline ZooEntry make_huber(double delta) {
    if (!(delta > 0) || !std::isfinite(delta)) throw ContractError("make_huber: delta must be > 0");
    FunctionOracle f(
        1,
        [delta](const Point& x) {
            const double a = std::fabs(x[0]);
            return a <= delta ? 0.5 * x[0] * x[0] : delta * a - 0.5 * delta * delta;
        },
        [delta](const Point& x) { return Point{std::clamp(x[0], -delta, delta)}; }, true);
    FunctionOracle conj(
        1, [](const Point& s) { return 0.5 * s[0] * s[0]; }, [](const Point& s) { return s; }, true);

    ScalarConstants c;
    c.known_mu = 0.0;
    c.known_L = 1.0;
    c.known_min_value = 0.0;
    c.known_minimizer = Point{0.0};
    return ZooEntry{"huber", f, c, conj, Box(Point{-delta}, Point{delta}), {}, true, Box::cube(1, -3.0, 3.0)};
}

/// f(x) = x^2 + 3 sin^2 x: nonconvex, satisfies a PL inequality, minimum 0 at 0.
/// f'' = 2 + 6 cos 2x, so L = 8.
inline ZooEntry make_pl_nonconvex() {
    FunctionOracle f(
        1,
        [](const Point& x) {
            const double s = std::sin(x[0]);
            return x[0] * x[0] + 3.0 * s * s;
        },
        [](const Point& x) { return Point{2.0 * x[0] + 3.0 * std::sin(2.0 * x[0])}; }, true);
    ScalarConstants c;
    c.known_L = 8.0;
    c.known_min_value = 0.0;
    c.known_minimizer = Point{0.0};
    return ZooEntry{"pl_nonconvex", f, c, std::nullopt, std::nullopt, {}, false, Box::cube(1, -3.0, 3.0)};
}

/// f(x) = log sum exp(x_i); L = 1, mu = 0. f* is negative entropy on the simplex.
inline ZooEntry make_logsumexp(std::size_t n) {
    if (n == 0) throw ContractError("make_logsumexp: n must be >= 1");
    auto lse = [](const Point& x) {
        const double m = *std::max_element(x.begin(), x.end());
        double s = 0.0;
        for (double v : x) s += std::exp(v - m);
        return m + std::log(s);
    };
    FunctionOracle f(
        n, lse,
        [lse](const Point& x) {
            const double l = lse(x);
            return detail::map(x, [&](double v, std::size_t) { return std::exp(v - l); });
        },
        true);
    FunctionOracle conj(
        n,
        [](const Point& s) {
            double v = 0.0;
            for (double p : s)
                if (p > 0) v += p * std::log(p);
            return v;
        },
        [](const Point& s) { return detail::map(s, [](double p, std::size_t) { return std::log(p) + 1.0; }); },
        true);

    ScalarConstants c;
    c.known_mu = 0.0;
    c.known_L = 1.0;
    auto in_simplex = [n](const Point& s) {
        double total = 0.0;
        for (double p : s) {
            if (!(p > 0)) return false;
            total += p;
        }
        return std::fabs(total - 1.0) <= 1e-9 * static_cast<double>(n);
    };
    return ZooEntry{"logsumexp", f, c, conj, Box::cube(n, 0.0, 1.0), in_simplex, true, Box::cube(n, -3.0, 3.0)};
}

/// f(x) = |x| with abs'(0) = 0; f* = 0 on [-1, 1].
inline ZooEntry make_abs() {
    FunctionOracle f(
        1, [](const Point& x) { return std::fabs(x[0]); },
        [](const Point& x) { return Point{detail::sign0(x[0])}; }, false, "abs'(0)=0 (minimal-norm subgradient)");
    FunctionOracle conj(
        1, [](const Point&) { return 0.0; }, [](const Point&) { return Point{0.0}; }, false,
        "0 (minimal-norm subgradient of the indicator)");
    ScalarConstants c;
    c.known_mu = 0.0;
    c.known_min_value = 0.0;
    c.known_minimizer = Point{0.0};
    return ZooEntry{"abs", f, c, conj, Box(Point{-1.0}, Point{1.0}), {}, true, Box::cube(1, -2.0, 2.0)};
}

/// f(x) = 1/2 x^2 + |x|: nonsmooth, mu = 1, f*(s) = 1/2 max(|s| - 1, 0)^2.
inline ZooEntry make_quadratic_abs() {
    FunctionOracle f(
        1, [](const Point& x) { return 0.5 * x[0] * x[0] + std::fabs(x[0]); },
        [](const Point& x) { return Point{x[0] + detail::sign0(x[0])}; }, false,
        "abs'(0)=0 (minimal-norm subgradient)");
    FunctionOracle conj(
        1,
        [](const Point& s) {
            const double t = std::max(std::fabs(s[0]) - 1.0, 0.0);
            return 0.5 * t * t;
        },
        [](const Point& s) { return Point{detail::sign0(s[0]) * std::max(std::fabs(s[0]) - 1.0, 0.0)}; },
        true);
    ScalarConstants c;
    c.known_mu = 1.0;
    c.known_min_value = 0.0;
    c.known_minimizer = Point{0.0};
    return ZooEntry{"quadratic_abs", f, c, conj, std::nullopt, {}, true, Box::cube(1, -5.0, 5.0)};
}

/// f(x) = sin x: 1-smooth, nonconvex.
inline ZooEntry make_sine() {
    FunctionOracle f(
        1, [](const Point& x) { return std::sin(x[0]); }, [](const Point& x) { return Point{std::cos(x[0])}; },
        true);
    ScalarConstants c;
    c.known_L = 1.0;
    c.known_min_value = -1.0;
    return ZooEntry{"sine", f, c, std::nullopt, std::nullopt, {}, false, Box(Point{0.0}, Point{2.0 * std::numbers::pi})};
}

/// Parameters accepted by make_entry.
struct ZooParams {
    std::vector<double> diag{1.0, 4.0};
    double delta = 1.0;
    std::size_t n = 2;
};

inline const std::vector<std::string>& entry_names() {
    static const std::vector<std::string> names{"abs",        "huber",         "logsumexp", "pl_nonconvex",
                                                "quadratic", "quadratic_abs", "sine"};
    return names;
}

inline ZooEntry make_entry(const std::string& name, const ZooParams& p = {}) {
    if (name == "quadratic") return make_quadratic(p.diag);
    if (name == "huber") return make_huber(p.delta);
    if (name == "pl_nonconvex") return make_pl_nonconvex();
    if (name == "logsumexp") return make_logsumexp(p.n);
    if (name == "abs") return make_abs();
    if (name == "quadratic_abs") return make_quadratic_abs();
    if (name == "sine") return make_sine();
    throw ContractError("unknown zoo entry '" + name + "'");
}

/// Every entry with default parameters, in name order.
inline std::vector<ZooEntry> catalog() {
    std::vector<ZooEntry> out;
    for (const auto& name : entry_names()) out.push_back(make_entry(name));
    return out;
}

inline std::string format_constant(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

/// One tab-separated line: name, dimension, mu=, L=, min=.
inline std::string list_line(const ZooEntry& e) {
    return e.name + "\t" + std::to_string(e.oracle.dimension()) + "\tmu=" + format_constant(e.constants.known_mu) +
           "\tL=" + format_constant(e.constants.known_L) + "\tmin=" + format_constant(e.constants.known_min_value);
}

}  // namespace convexcert::zoo

#endif  // CONVEXCERT_ZOO_HPP
