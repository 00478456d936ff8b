#ifndef CONVEXCERT_CORE_HPP
#define CONVEXCERT_CORE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace convexcert {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Violated precondition or invariant of a public operation.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A function could not be evaluated (domain error, non-finite value).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver did not reach its accuracy target.
class NumericFailure : public std::runtime_error {
public:
    NumericFailure(const std::string& what, std::vector<double> best)
        : std::runtime_error(what), best_iterate_(std::move(best)) {}
    const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }

private:
    std::vector<double> best_iterate_;
};

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

/// Dense point of R^n. Public construction validates that every entry is
/// finite and that n >= 1; arithmetic results are not re-validated.
class Point {
public:
    Point() = default;
    explicit Point(std::vector<double> coords) : coords_(std::move(coords)) { validate(); }
    Point(std::initializer_list<double> coords) : coords_(coords) { validate(); }

    static Point zeros(std::size_t n) {
        if (n == 0) throw ContractError("Point: dimension must be >= 1");
        return unchecked(std::vector<double>(n, 0.0));
    }
    static Point filled(std::size_t n, double v) {
        if (n == 0) throw ContractError("Point: dimension must be >= 1");
        return Point(std::vector<double>(n, v));
    }
    static Point unchecked(std::vector<double> coords) {
        Point p;
        p.coords_ = std::move(coords);
        return p;
    }

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }
    const std::vector<double>& coords() const noexcept { return coords_; }
    auto begin() const noexcept { return coords_.begin(); }
    auto end() const noexcept { return coords_.end(); }

    bool all_finite() const noexcept {
        for (double v : coords_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Point& operator+=(const Point& o) {
        check_same(o);
        for (std::size_t i = 0; i < size(); ++i) coords_[i] += o.coords_[i];
        return *this;
    }
    Point& operator-=(const Point& o) {
        check_same(o);
        for (std::size_t i = 0; i < size(); ++i) coords_[i] -= o.coords_[i];
        return *this;
    }
    Point& operator*=(double a) {
        for (double& v : coords_) v *= a;
        return *this;
    }

    friend Point operator+(Point a, const Point& b) { return a += b; }
    friend Point operator-(Point a, const Point& b) { return a -= b; }
    friend Point operator-(Point a) { return a *= -1.0; }
    friend Point operator*(double s, Point a) { return a *= s; }
    friend Point operator*(Point a, double s) { return a *= s; }
    friend bool operator==(const Point& a, const Point& b) { return a.coords_ == b.coords_; }

    void check_same(const Point& o) const {
        if (o.size() != size())
            throw ContractError("Point: dimension mismatch (" + std::to_string(size()) + " vs " +
                                std::to_string(o.size()) + ")");
    }

private:
    void validate() const {
        if (coords_.empty()) throw ContractError("Point: dimension must be >= 1");
        if (!all_finite()) throw ContractError("Point: non-finite coordinate");
    }

    std::vector<double> coords_;
};

inline double dot(const Point& a, const Point& b) {
    a.check_same(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(squared_norm(a)); }

inline std::string to_string(const Point& p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ')';
    return os.str();
}

/// Point on the segment: alpha*x + (1-alpha)*y.
inline Point interpolate(const Point& x, const Point& y, double alpha) {
    x.check_same(y);
    std::vector<double> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = alpha * x[i] + (1.0 - alpha) * y[i];
    return Point::unchecked(std::move(c));
}

// ---------------------------------------------------------------------------
// Box
// ---------------------------------------------------------------------------

/// Axis-aligned box [lo, hi] with lo[i] < hi[i].
class Box {
public:
    Box(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.size() != hi_.size()) throw ContractError("Box: lo/hi dimension mismatch");
        if (lo_.size() == 0) throw ContractError("Box: dimension must be >= 1");
        for (std::size_t i = 0; i < lo_.size(); ++i)
            if (!(lo_[i] < hi_[i]))
                throw ContractError("Box: degenerate axis " + std::to_string(i) + " (lo >= hi)");
    }

    /// Same interval on every axis.
    static Box cube(std::size_t n, double lo, double hi) {
        return Box(Point::filled(n, lo), Point::filled(n, hi));
    }

    std::size_t dimension() const noexcept { return lo_.size(); }
    const Point& lo() const noexcept { return lo_; }
    const Point& hi() const noexcept { return hi_; }
    double width(std::size_t i) const { return hi_[i] - lo_[i]; }

    bool contains(const Point& p) const {
        if (p.size() != dimension()) return false;
        for (std::size_t i = 0; i < dimension(); ++i)
            if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
        return true;
    }

    Point midpoint() const {
        std::vector<double> c(dimension());
        for (std::size_t i = 0; i < dimension(); ++i) c[i] = 0.5 * (lo_[i] + hi_[i]);
        return Point::unchecked(std::move(c));
    }

    /// The 2^n corners; bit i of the index selects hi on axis i.
    std::vector<Point> corners() const {
        const std::size_t n = dimension();
        std::vector<Point> out;
        out.reserve(std::size_t{1} << n);
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = (mask >> i & 1u) ? hi_[i] : lo_[i];
            out.push_back(Point::unchecked(std::move(c)));
        }
        return out;
    }

    Point clamp(Point p) const {
        for (std::size_t i = 0; i < dimension(); ++i) p[i] = std::min(std::max(p[i], lo_[i]), hi_[i]);
        return p;
    }

    /// Each side pulled inward by `fraction` of that axis' width.
    Box shrunk(double fraction) const {
        std::vector<double> lo(dimension()), hi(dimension());
        for (std::size_t i = 0; i < dimension(); ++i) {
            lo[i] = lo_[i] + fraction * width(i);
            hi[i] = hi_[i] - fraction * width(i);
        }
        return Box(Point(std::move(lo)), Point(std::move(hi)));
    }

    friend bool operator==(const Box& a, const Box& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }

private:
    Point lo_;
    Point hi_;
};

// ---------------------------------------------------------------------------
// Function oracles
// ---------------------------------------------------------------------------

/// A real function on R^n with a selected (sub)gradient.
///
/// `value` and `grad_select` must be deterministic and callable concurrently.
/// At nonsmooth points `grad_select` returns one element of the
/// subdifferential; `selection_rule` describes how that element is chosen so
/// verdicts can report it.
class FunctionOracle {
public:
    using ValueFn = std::function<double(const Point&)>;
    using GradFn = std::function<Point(const Point&)>;

    FunctionOracle(std::size_t dimension, ValueFn value, GradFn grad, bool smooth,
                   std::string selection_rule = "gradient")
        : dimension_(dimension),
          value_(std::move(value)),
          grad_(std::move(grad)),
          smooth_(smooth),
          selection_rule_(std::move(selection_rule)) {
        if (dimension_ == 0) throw ContractError("FunctionOracle: dimension must be >= 1");
        if (!value_ || !grad_) throw ContractError("FunctionOracle: value and gradient required");
    }

    std::size_t dimension() const noexcept { return dimension_; }
    bool smooth() const noexcept { return smooth_; }
    const std::string& selection_rule() const noexcept { return selection_rule_; }

    /// f(x); throws EvaluationError on a non-finite result.
    double value(const Point& x) const {
        check_dim(x);
        const double v = value_(x);
        if (!std::isfinite(v)) throw EvaluationError("non-finite function value at " + to_string(x));
        return v;
    }

    /// Selected element of the subdifferential at x.
    Point grad_select(const Point& x) const {
        check_dim(x);
        Point g = grad_(x);
        if (g.size() != dimension_)
            throw ContractError("FunctionOracle: gradient dimension mismatch at " + to_string(x));
        if (!g.all_finite()) throw EvaluationError("non-finite gradient at " + to_string(x));
        return g;
    }

private:
    void check_dim(const Point& x) const {
        if (x.size() != dimension_)
            throw ContractError("FunctionOracle: expected dimension " + std::to_string(dimension_) +
                                ", got " + std::to_string(x.size()));
    }

    std::size_t dimension_;
    ValueFn value_;
    GradFn grad_;
    bool smooth_;
    std::string selection_rule_;
};

/// Analytically known constants of a function.
struct ScalarConstants {
    std::optional<double> known_mu;
    std::optional<double> known_L;
    std::optional<double> known_min_value;
    std::optional<Point> known_minimizer;

    void validate() const {
        if (known_mu && *known_mu < 0) throw ContractError("ScalarConstants: mu must be >= 0");
        if (known_L && *known_L < 0) throw ContractError("ScalarConstants: L must be >= 0");
        if (known_mu && known_L && *known_mu > *known_L)
            throw ContractError("ScalarConstants: mu must not exceed L");
    }
};

/// Central-difference gradient, component i = (f(x+h e_i) - f(x-h e_i)) / 2h.
inline Point fd_gradient(const FunctionOracle& f, const Point& x, double h = 1e-5) {
    if (!(h > 0)) throw ContractError("fd_gradient: step must be positive");
    std::vector<double> g(f.dimension());
    Point probe = x;
    for (std::size_t i = 0; i < f.dimension(); ++i) {
        const double xi = x[i];
        probe[i] = xi + h;
        const double fp = f.value(probe);
        probe[i] = xi - h;
        const double fm = f.value(probe);
        probe[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return Point::unchecked(std::move(g));
}

/// phi(z) = f(z) - slope^T z, with grad_select shifted by -slope.
inline FunctionOracle tilt(const FunctionOracle& f, const Point& slope) {
    if (slope.size() != f.dimension())
        throw ContractError("tilt: slope dimension " + std::to_string(slope.size()) +
                            " does not match oracle dimension " + std::to_string(f.dimension()));
    return FunctionOracle(
        f.dimension(), [f, slope](const Point& z) { return f.value(z) - dot(slope, z); },
        [f, slope](const Point& z) { return f.grad_select(z) - slope; }, f.smooth(),
        f.selection_rule());
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Parameters realizing the "for all x, y" and "for all alpha" quantifiers.
struct SamplingPlan {
    Box box;
    std::size_t n_pairs = 1000;
    std::size_t n_alphas = 1;
    std::uint64_t seed = 1;
    double fd_step = 1e-5;

    void validate() const {
        if (n_alphas == 0) throw ContractError("SamplingPlan: n_alphas must be >= 1");
        if (!(fd_step > 0)) throw ContractError("SamplingPlan: fd_step must be positive");
    }

    /// The alphas used at one sample: its own alpha rotated through n_alphas
    /// evenly spaced offsets.
    std::vector<double> alphas_for(double alpha) const {
        std::vector<double> out(n_alphas);
        for (std::size_t j = 0; j < n_alphas; ++j) {
            double a = alpha + static_cast<double>(j) / static_cast<double>(n_alphas);
            out[j] = a > 1.0 ? a - 1.0 : a;
        }
        return out;
    }
};

struct SampleTriple {
    Point x;
    Point y;
    double alpha;
};

namespace detail {

/// Lattice points are included only up to this dimension (2^n corners).
inline constexpr std::size_t kMaxLatticeDimension = 6;

inline double unit_uniform(std::mt19937_64& rng) {
    // 53 random bits mapped to [0, 1]; stable across standard libraries.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic sample of exactly plan.n_pairs (x, y, alpha) triples.
///
/// The first triples are ordered pairs of distinct lattice points (box corners
/// and midpoint, alpha = 1/2). The rest are seeded pseudorandom: x uniform in
/// the box; y uniform for even indices and a multi-scale perturbation of x
/// (clamped to the box) for odd indices, so that both distant and nearby pairs
/// are represented.
inline std::vector<SampleTriple> sample_points(const SamplingPlan& plan) {
    plan.validate();
    const Box& box = plan.box;
    const std::size_t n = box.dimension();
    std::vector<SampleTriple> out;
    out.reserve(plan.n_pairs);

    if (n <= detail::kMaxLatticeDimension) {
        std::vector<Point> lattice = box.corners();
        lattice.push_back(box.midpoint());
        for (std::size_t i = 0; i < lattice.size() && out.size() < plan.n_pairs; ++i)
            for (std::size_t j = 0; j < lattice.size() && out.size() < plan.n_pairs; ++j)
                if (i != j) out.push_back({lattice[i], lattice[j], 0.5});
    }

    std::mt19937_64 rng(plan.seed);
    auto uniform_point = [&] {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = box.lo()[i] + detail::unit_uniform(rng) * box.width(i);
        return Point::unchecked(std::move(c));
    };
    for (std::size_t k = 0; out.size() < plan.n_pairs; ++k) {
        Point x = uniform_point();
        Point y = x;
        if (k % 2 == 0) {
            y = uniform_point();
        } else {
            // radius in [1e-4, 1] of the axis width, log-uniform
            const double radius = std::pow(10.0, -4.0 * detail::unit_uniform(rng));
            for (std::size_t i = 0; i < n; ++i)
                y[i] = x[i] + (2.0 * detail::unit_uniform(rng) - 1.0) * radius * box.width(i);
            y = box.clamp(std::move(y));
        }
        const double alpha = detail::unit_uniform(rng);
        out.push_back({std::move(x), std::move(y), alpha});
    }
    return out;
}

}  // namespace convexcert

#endif  // CONVEXCERT_CORE_HPP
