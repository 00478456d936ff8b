#ifndef CONVEXCERT_CONJUGATE_HPP
#define CONVEXCERT_CONJUGATE_HPP

// Numerical Fenchel conjugation: f*(s) = sup_x (s^T x - f(x)).

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "convexcert/core.hpp"

namespace convexcert::conjugate {

class UnsupportedDimension : public ContractError {
public:
    using ContractError::ContractError;
};

/// Sampled 1-D function: strictly increasing abscissae with finite values.
class GridFunction {
public:
    GridFunction(std::vector<double> xs, std::vector<double> values)
        : xs_(std::move(xs)), values_(std::move(values)) {
        if (xs_.size() != values_.size()) throw ContractError("GridFunction: xs and values differ in length");
        if (xs_.size() < 2) throw ContractError("GridFunction: need at least 2 samples");
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            if (!std::isfinite(xs_[i]) || !std::isfinite(values_[i]))
                throw ContractError("GridFunction: non-finite sample at index " + std::to_string(i));
            if (i > 0 && !(xs_[i] > xs_[i - 1]))
                throw ContractError("GridFunction: xs not strictly increasing at index " + std::to_string(i));
        }
    }

    std::size_t size() const noexcept { return xs_.size(); }
    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> xs_;
    std::vector<double> values_;
};

/// Conjugate samples at the requested slopes plus the maximizing input index.
struct ConjugateResult {
    std::vector<double> slopes;
    std::vector<double> values;
    std::vector<std::size_t> argmax_index;

    GridFunction grid() const { return GridFunction(slopes, values); }
};

/// n points from lo to hi inclusive; the last point is exactly hi.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 2) throw ContractError("uniform_grid: need at least 2 points");
    if (!(lo < hi)) throw ContractError("uniform_grid: lo must be < hi");
    std::vector<double> xs(n);
    const double span = hi - lo;
    for (std::size_t i = 0; i + 1 < n; ++i)
        xs[i] = lo + span * static_cast<double>(i) / static_cast<double>(n - 1);
    xs[n - 1] = hi;
    return xs;
}

/// Samples a 1-D oracle on uniform_grid(lo, hi, n).
inline GridFunction sample_grid(const FunctionOracle& f, double lo, double hi, std::size_t n) {
    if (f.dimension() != 1) throw UnsupportedDimension("sample_grid: oracle must be 1-D");
    std::vector<double> xs = uniform_grid(lo, hi, n);
    std::vector<double> vs(n);
    for (std::size_t i = 0; i < n; ++i) vs[i] = f.value(Point::unchecked({xs[i]}));
    return GridFunction(std::move(xs), std::move(vs));
}

/// Exhaustive max of s*x - v over the samples of g.
inline double conjugate_brute(const GridFunction& g, double s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) best = std::max(best, s * g.xs()[i] - g.values()[i]);
    return best;
}

/// Exhaustive max of s^T x - f(x) over a tensor grid with grid_n points per axis.
inline double conjugate_brute(const FunctionOracle& f, const Box& box, std::size_t grid_n, const Point& s) {
    const std::size_t n = f.dimension();
    if (n > 3) throw UnsupportedDimension("conjugate_brute: dimension " + std::to_string(n) + " exceeds 3");
    if (grid_n < 2) throw ContractError("conjugate_brute: grid_n must be >= 2");
    if (box.dimension() != n || s.size() != n) throw ContractError("conjugate_brute: dimension mismatch");

    std::vector<std::vector<double>> axes(n);
    for (std::size_t i = 0; i < n; ++i) axes[i] = uniform_grid(box.lo()[i], box.hi()[i], grid_n);

    std::vector<std::size_t> idx(n, 0);
    std::vector<double> c(n);
    double best = -std::numeric_limits<double>::infinity();
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) c[i] = axes[i][idx[i]];
        const Point x = Point::unchecked(c);
        best = std::max(best, dot(s, x) - f.value(x));
        std::size_t axis = 0;
        while (axis < n && ++idx[axis] == grid_n) idx[axis++] = 0;
        if (axis == n) break;
    }
    return best;
}

/// Indices of the lower convex hull of (xs, values), left to right.
/// Collinear interior points are dropped. Single monotone-chain pass.
inline std::vector<std::size_t> lower_hull(const GridFunction& g) {
    const auto& x = g.xs();
    const auto& v = g.values();
    std::vector<std::size_t> hull;
    hull.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            const double cross = (x[b] - x[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (x[i] - x[a]);
            if (cross > 0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }
    return hull;
}

/// Linear-time discrete Legendre transform.
///
/// For each slope s returns max_i (s * xs[i] - values[i]). The maximizer is
/// always a lower-hull vertex, and it moves monotonically right as s grows,
/// so one pointer walks the hull once across all slopes: O(n + m).
inline ConjugateResult llt_1d(const GridFunction& input, const std::vector<double>& slopes) {
    for (std::size_t k = 1; k < slopes.size(); ++k)
        if (!(slopes[k] > slopes[k - 1]))
            throw ContractError("llt_1d: slopes must be strictly increasing (index " + std::to_string(k) + ")");

    ConjugateResult out;
    out.slopes = slopes;
    out.values.resize(slopes.size());
    out.argmax_index.resize(slopes.size());
    if (slopes.empty()) return out;

    const auto& x = input.xs();
    const auto& v = input.values();
    const std::vector<std::size_t> hull = lower_hull(input);

    std::size_t j = 0;
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        const double s = slopes[k];
        double best = s * x[hull[j]] - v[hull[j]];
        while (j + 1 < hull.size()) {
            const double next = s * x[hull[j + 1]] - v[hull[j + 1]];
            if (next < best) break;
            best = next;
            ++j;
        }
        out.values[k] = best;
        out.argmax_index[k] = hull[j];
    }
    return out;
}

/// Slopes of the lower-hull edges, strictly increasing.
inline std::vector<double> hull_edge_slopes(const GridFunction& g) {
    const std::vector<std::size_t> hull = lower_hull(g);
    std::vector<double> slopes;
    slopes.reserve(hull.size());
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const std::size_t a = hull[k], b = hull[k + 1];
        const double m = (g.values()[b] - g.values()[a]) / (g.xs()[b] - g.xs()[a]);
        if (slopes.empty() || m > slopes.back()) slopes.push_back(m);
    }
    return slopes;
}

/// f** on the samples of g, by conjugating twice: first at the hull edge
/// slopes, then back at the original abscissae.
inline std::vector<double> biconjugate(const GridFunction& g) {
    const std::vector<double> slopes = hull_edge_slopes(g);
    const ConjugateResult first = llt_1d(g, slopes);
    std::vector<double> out(g.size());
    if (slopes.size() == 1) {
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = slopes[0] * g.xs()[i] - first.values[0];
        return out;
    }
    const ConjugateResult second = llt_1d(first.grid(), g.xs());
    return second.values;
}

/// max over the grid of |f**(x) - f(x)|; zero up to rounding for convex f,
/// the largest distance to the convex hull otherwise.
inline double biconjugate_gap(const FunctionOracle& f, const Box& box, std::size_t grid_n) {
    if (f.dimension() != 1 || box.dimension() != 1)
        throw UnsupportedDimension("biconjugate_gap: only 1-D functions are supported");
    const GridFunction g = sample_grid(f, box.lo()[0], box.hi()[0], grid_n);
    const std::vector<double> fss = biconjugate(g);
    double gap = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gap = std::max(gap, std::fabs(fss[i] - g.values()[i]));
    return gap;
}

// ---------------------------------------------------------------------------
// Conjugate gradient via the inner maximization
// ---------------------------------------------------------------------------

struct ConjugateGradientResult {
    Point x;                       // maximizer of s^T x - f(x) over the box
    double residual = 0.0;         // max component of the stationarity residual
    bool on_boundary = false;
    bool maybe_nonunique = false;  // curvature vanishes along some direction at x
    std::size_t sweeps = 0;
};

namespace detail {

inline constexpr double kResidualTol = 1e-8;
inline constexpr std::size_t kMaxSweeps = 2000;

inline double component(const FunctionOracle& f, Point& x, std::size_t i, double t) {
    const double saved = x[i];
    x[i] = t;
    const double g = f.grad_select(x)[i];
    x[i] = saved;
    return g;
}

/// Stationarity residual of coordinate i: zero when x_i sits on a box face
/// with the right sign, or when the residual changes sign between x_i and its
/// floating-point neighbours (s_i lies in the one-sided derivative range).
inline double coordinate_residual(const FunctionOracle& f, Point& x, const Point& s, const Box& box,
                                  std::size_t i) {
    const double r = component(f, x, i, x[i]) - s[i];
    if (x[i] <= box.lo()[i] && r >= 0) return 0.0;
    if (x[i] >= box.hi()[i] && r <= 0) return 0.0;
    if (std::fabs(r) <= kResidualTol) return std::fabs(r);
    const double below = component(f, x, i, std::nextafter(x[i], -HUGE_VAL)) - s[i];
    const double above = component(f, x, i, std::nextafter(x[i], HUGE_VAL)) - s[i];
    if (below <= 0 && above >= 0) return 0.0;
    return std::fabs(r);
}

/// Solves d f / d x_i = s_i along coordinate i by bisection on the monotone
/// residual, to full floating-point resolution.
inline double solve_coordinate(const FunctionOracle& f, Point& x, const Point& s, const Box& box, std::size_t i) {
    double lo = box.lo()[i], hi = box.hi()[i];
    if (component(f, x, i, lo) - s[i] >= 0) return lo;
    if (component(f, x, i, hi) - s[i] <= 0) return hi;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double r = component(f, x, i, mid) - s[i];
        if (r == 0) return mid;
        (r < 0 ? lo : hi) = mid;
    }
    const double rlo = std::fabs(component(f, x, i, lo) - s[i]);
    const double rhi = std::fabs(component(f, x, i, hi) - s[i]);
    return rlo <= rhi ? lo : hi;
}

/// Smallest over largest pivot of an LDL^T factorization of the
/// finite-difference Hessian; ~0 when the curvature is flat in some direction.
inline double curvature_ratio(const FunctionOracle& f, const Point& x) {
    const std::size_t n = f.dimension();
    std::vector<double> h(n * n);
    Point probe = x;
    for (std::size_t j = 0; j < n; ++j) {
        const double step = 1e-5 * (1.0 + std::fabs(x[j]));
        probe[j] = x[j] + step;
        const Point gp = f.grad_select(probe);
        probe[j] = x[j] - step;
        const Point gm = f.grad_select(probe);
        probe[j] = x[j];
        for (std::size_t i = 0; i < n; ++i) h[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) h[i * n + j] = h[j * n + i] = 0.5 * (h[i * n + j] + h[j * n + i]);

    double dmin = HUGE_VAL, dmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = h[k * n + k];
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, std::fabs(d));
        if (std::fabs(d) < 1e-300) continue;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = h[i * n + k] / d;
            for (std::size_t j = k + 1; j < n; ++j) h[i * n + j] -= l * h[k * n + j];
        }
    }
    return dmax > 0 ? dmin / dmax : 0.0;
}

}  // namespace detail

/// Maximizer of s^T x - f(x) over box, i.e. the gradient of f* at s for
/// strictly convex f.
///
/// Cyclic coordinate ascent where each coordinate step is a bisection solve
/// of d f / d x_i = s_i; separable functions converge in a single sweep.
/// Throws NumericFailure (carrying the best iterate) if the residual does not
/// reach 1e-8 within the sweep budget.
inline ConjugateGradientResult conjugate_gradient(const FunctionOracle& f, const Point& s, const Box& box) {
    const std::size_t n = f.dimension();
    if (s.size() != n || box.dimension() != n) throw ContractError("conjugate_gradient: dimension mismatch");

    ConjugateGradientResult out;
    Point x = box.midpoint();
    auto residual = [&](Point& p) {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r = std::max(r, detail::coordinate_residual(f, p, s, box, i));
        return r;
    };

    Point best = x;
    double best_residual = HUGE_VAL;
    for (std::size_t sweep = 1; sweep <= detail::kMaxSweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) x[i] = detail::solve_coordinate(f, x, s, box, i);
        const double r = residual(x);
        if (r < best_residual) {
            best_residual = r;
            best = x;
        }
        if (r <= detail::kResidualTol) {
            out.sweeps = sweep;
            break;
        }
    }
    if (best_residual > detail::kResidualTol)
        throw NumericFailure("conjugate_gradient: residual " + std::to_string(best_residual) +
                                 " above tolerance at s=" + to_string(s),
                             best.coords());

    out.x = best;
    out.residual = best_residual;
    for (std::size_t i = 0; i < n; ++i)
        if (best[i] <= box.lo()[i] || best[i] >= box.hi()[i]) out.on_boundary = true;
    if (f.smooth() && !out.on_boundary) out.maybe_nonunique = detail::curvature_ratio(f, best) < 1e-6;
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Two-column CSV with a header row; values written with round-trip precision.
inline void write_csv(std::ostream& os, const std::vector<double>& a, const std::vector<double>& b,
                      const std::string& header_a = "x", const std::string& header_b = "value") {
    if (a.size() != b.size()) throw ContractError("write_csv: column lengths differ");
    os << header_a << ',' << header_b << '\n';
    std::ostringstream line;
    line.precision(17);
    for (std::size_t i = 0; i < a.size(); ++i) {
        line.str("");
        line << a[i] << ',' << b[i] << '\n';
        os << line.str();
    }
}

inline void write_csv(std::ostream& os, const GridFunction& g) { write_csv(os, g.xs(), g.values()); }

/// Reads the `x,value` format written by write_csv.
inline GridFunction read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "x,value") throw ContractError("read_grid_csv: expected header 'x,value'");
    std::vector<double> xs, vs;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ContractError("read_grid_csv: missing ',' on line " + std::to_string(row));
        try {
            std::size_t used = 0;
            xs.push_back(std::stod(line.substr(0, comma), &used));
            vs.push_back(std::stod(line.substr(comma + 1), &used));
        } catch (const std::logic_error&) {
            throw ContractError("read_grid_csv: malformed number on line " + std::to_string(row));
        }
    }
    return GridFunction(std::move(xs), std::move(vs));
}

}  // namespace convexcert::conjugate

#endif  // CONVEXCERT_CONJUGATE_HPP
