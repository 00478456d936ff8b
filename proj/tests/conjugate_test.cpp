#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "convexcert/conjugate.hpp"
#include "convexcert/zoo.hpp"

using namespace convexcert;
using namespace convexcert::conjugate;

namespace {

FunctionOracle scaled_square(double mu) {
    return FunctionOracle(1, [mu](const Point& x) { return 0.5 * mu * x[0] * x[0]; },
                          [mu](const Point& x) { return Point{mu * x[0]}; }, true);
}

FunctionOracle power4() {
    return FunctionOracle(1, [](const Point& x) { return std::pow(x[0], 4); },
                          [](const Point& x) { return Point{4.0 * std::pow(x[0], 3)}; }, true);
}

FunctionOracle neg_square() {
    return FunctionOracle(1, [](const Point& x) { return -x[0] * x[0]; },
                          [](const Point& x) { return Point{-2.0 * x[0]}; }, true);
}

GridFunction random_piecewise(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> kind(0, 3);
    const std::vector<double> xs = uniform_grid(-3.0, 3.0, n);
    std::vector<double> vs(n);
    const int pieces = 1 + static_cast<int>(rng() % 6);
    std::vector<double> cut{-3.0};
    for (int p = 1; p < pieces; ++p) cut.push_back(3.0 * u(rng));
    std::sort(cut.begin(), cut.end());
    std::vector<std::array<double, 3>> coef(pieces);
    std::vector<int> kinds(pieces);
    for (int p = 0; p < pieces; ++p) {
        coef[p] = {u(rng), 3 * u(rng), 2 * u(rng)};
        kinds[p] = kind(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i];
        int p = static_cast<int>(std::upper_bound(cut.begin(), cut.end(), x) - cut.begin()) - 1;
        p = std::max(p, 0);
        const auto& c = coef[p];
        switch (kinds[p]) {
            case 0: vs[i] = c[0] + c[1] * x; break;
            case 1: vs[i] = c[0] + c[1] * x + c[2] * x * x; break;
            case 2: vs[i] = c[0] + c[1] * std::fabs(x - c[2]); break;
            default: vs[i] = c[0] + std::sin(3.0 * c[1] * x) + u(rng) * 0.01; break;
        }
    }
    return GridFunction(xs, vs);
}

std::vector<double> random_slopes(std::mt19937_64& rng, std::size_t m, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> s(m);
    for (auto& v : s) v = u(rng);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace

TEST(GridFunction, Validation) {
    EXPECT_THROW(GridFunction({0.0}, {1.0}), ContractError);
    EXPECT_THROW(GridFunction({0.0, 0.0}, {1.0, 2.0}), ContractError);
    EXPECT_THROW(GridFunction({1.0, 0.0}, {1.0, 2.0}), ContractError);
    EXPECT_THROW(GridFunction({0.0, 1.0}, {1.0, NAN}), ContractError);
    EXPECT_THROW(GridFunction({0.0, 1.0}, {1.0}), ContractError);
    EXPECT_EQ(uniform_grid(-1.0, 1.0, 3), (std::vector<double>{-1.0, 0.0, 1.0}));
}

TEST(ConjugateBrute, Examples) {
    EXPECT_NEAR(conjugate_brute(scaled_square(1.0), Box(Point{-10.0}, Point{10.0}), 20001, Point{2.0}), 2.0, 1e-12);
    EXPECT_NEAR(conjugate_brute(scaled_square(2.0), Box(Point{-10.0}, Point{10.0}), 20001, Point{3.0}), 2.25, 1e-12);
    EXPECT_NEAR(conjugate_brute(zoo::make_abs().oracle, Box(Point{-10.0}, Point{10.0}), 20001, Point{0.5}), 0.0,
                1e-4);
}

TEST(ConjugateBrute, DimensionGuard) {
    const auto q4 = zoo::make_quadratic({1.0, 1.0, 1.0, 1.0});
    EXPECT_THROW(conjugate_brute(q4.oracle, Box::cube(4, -1.0, 1.0), 3, Point::zeros(4)), UnsupportedDimension);
    const auto q2 = zoo::make_quadratic({1.0, 4.0});
    EXPECT_NEAR(conjugate_brute(q2.oracle, Box::cube(2, -3.0, 3.0), 601, Point{1.0, 2.0}), 0.5 * (1.0 + 1.0), 1e-12);
}

TEST(Llt, Examples) {
    const auto g = sample_grid(scaled_square(1.0), -10.0, 10.0, 4001);
    const auto r = llt_1d(g, {-1.0, 0.0, 1.0});
    EXPECT_NEAR(r.values[0], 0.5, 1e-12);
    EXPECT_NEAR(r.values[1], 0.0, 1e-12);
    EXPECT_NEAR(r.values[2], 0.5, 1e-12);

    const auto a = sample_grid(zoo::make_abs().oracle, -2.0, 2.0, 401);
    const auto ra = llt_1d(a, {0.5, 2.0});
    EXPECT_EQ(ra.values[0], conjugate_brute(a, 0.5));
    EXPECT_EQ(ra.values[1], conjugate_brute(a, 2.0));
    EXPECT_EQ(ra.values[0], 0.0);
    EXPECT_EQ(ra.values[1], 2.0);

    EXPECT_TRUE(llt_1d(g, {}).values.empty());
}

TEST(Llt, UnsortedSlopesRejected) {
    const auto g = sample_grid(scaled_square(1.0), -1.0, 1.0, 11);
    EXPECT_THROW(llt_1d(g, {1.0, 0.0}), ContractError);
    EXPECT_THROW(llt_1d(g, {1.0, 1.0}), ContractError);
}

TEST(Llt, EqualsBruteForceExactly) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng() % 3000;
        const auto g = random_piecewise(rng, n);
        const auto slopes = random_slopes(rng, 500, -20.0, 20.0);
        const auto r = llt_1d(g, slopes);
        for (std::size_t k = 0; k < slopes.size(); ++k)
            ASSERT_EQ(r.values[k], conjugate_brute(g, slopes[k])) << "trial " << trial << " slope " << slopes[k];
    }
}

TEST(Llt, ArgmaxMonotoneForConvexInput) {
    std::mt19937_64 rng(5);
    for (double mu : {0.3, 1.0, 7.0}) {
        const auto g = sample_grid(scaled_square(mu), -4.0, 4.0, 1001);
        const auto r = llt_1d(g, random_slopes(rng, 300, -40.0, 40.0));
        EXPECT_TRUE(std::is_sorted(r.argmax_index.begin(), r.argmax_index.end()));
        for (std::size_t k = 0; k < r.slopes.size(); ++k)
            EXPECT_EQ(r.values[k], r.slopes[k] * g.xs()[r.argmax_index[k]] - g.values()[r.argmax_index[k]]);
    }
}

TEST(Llt, OrderReversal) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_piecewise(rng, 500);
        std::vector<double> gv = f.values();
        for (auto& v : gv) v += bump(rng);
        const GridFunction g(f.xs(), gv);
        const auto slopes = random_slopes(rng, 200, -10.0, 10.0);
        const auto fs = llt_1d(f, slopes), gs = llt_1d(g, slopes);
        for (std::size_t k = 0; k < slopes.size(); ++k) EXPECT_GE(fs.values[k], gs.values[k]);
    }
}

TEST(Llt, ClosedFormWithinGridSpacing) {
    for (const auto& e : zoo::catalog()) {
        if (!e.conjugate || e.oracle.dimension() != 1) continue;
        const Box box = e.default_box;
        const std::size_t n = 4001;
        const auto g = sample_grid(e.oracle, box.lo()[0], box.hi()[0], n);
        const double h = (box.hi()[0] - box.lo()[0]) / static_cast<double>(n - 1);
        // interior slopes: argmax strictly inside the box
        const double smax = std::fabs(e.oracle.grad_select(box.shrunk(0.1).hi())[0]);
        const auto slopes = uniform_grid(-smax, smax, 101);
        const auto r = llt_1d(g, slopes);
        for (std::size_t k = 0; k < slopes.size(); ++k) {
            if (!e.in_conjugate_domain(Point{slopes[k]})) continue;
            EXPECT_LE(std::fabs(r.values[k] - e.conjugate->value(Point{slopes[k]})), smax * h + 1e-12)
                << e.name << " s=" << slopes[k];
        }
    }
}

TEST(Biconjugate, Gaps) {
    EXPECT_LE(biconjugate_gap(power4(), Box(Point{-1.0}, Point{1.0}), 4001), 1e-5);
    EXPECT_NEAR(biconjugate_gap(neg_square(), Box(Point{-1.0}, Point{1.0}), 4001), 1.0, 1e-12);
    EXPECT_LE(biconjugate_gap(scaled_square(1.0), Box(Point{-3.0}, Point{3.0}), 4001), 1e-9);
    EXPECT_THROW(biconjugate_gap(zoo::make_quadratic({1.0, 1.0}).oracle, Box::cube(2, -1.0, 1.0), 11),
                 UnsupportedDimension);
}

TEST(Biconjugate, ConvexHullOfNonconvexGrid) {
    // W shape: hull is flat between the two minima
    const GridFunction g({-2.0, -1.0, 0.0, 1.0, 2.0}, {3.0, 0.0, 1.0, 0.0, 3.0});
    const auto fss = biconjugate(g);
    EXPECT_EQ(fss, (std::vector<double>{3.0, 0.0, 0.0, 0.0, 3.0}));
}

TEST(ConjugateGradient, Examples) {
    const Box box1(Point{-10.0}, Point{10.0});
    EXPECT_NEAR(conjugate_gradient(scaled_square(2.0), Point{3.0}, box1).x[0], 1.5, 1e-10);

    const auto q = zoo::make_quadratic({1.0, 4.0});
    const auto r = conjugate_gradient(q.oracle, Point{1.0, 1.0}, Box::cube(2, -10.0, 10.0));
    EXPECT_NEAR(r.x[0], 1.0, 1e-10);
    EXPECT_NEAR(r.x[1], 0.25, 1e-10);
    EXPECT_FALSE(r.maybe_nonunique);
    EXPECT_FALSE(r.on_boundary);

    const auto lse = zoo::make_logsumexp(2);
    const auto rl = conjugate_gradient(lse.oracle, Point{0.5, 0.5}, Box::cube(2, -5.0, 5.0));
    EXPECT_LE(rl.residual, 1e-8);
    EXPECT_LE(norm(lse.oracle.grad_select(rl.x) - Point{0.5, 0.5}), 1e-8);
    EXPECT_TRUE(rl.maybe_nonunique);
}

TEST(ConjugateGradient, BoundaryAndKink) {
    const auto r = conjugate_gradient(scaled_square(1.0), Point{20.0}, Box(Point{-10.0}, Point{10.0}));
    EXPECT_EQ(r.x[0], 10.0);
    EXPECT_TRUE(r.on_boundary);
    const auto k = conjugate_gradient(zoo::make_quadratic_abs().oracle, Point{0.5}, Box(Point{-5.0}, Point{5.0}));
    EXPECT_NEAR(k.x[0], 0.0, 1e-12);
    EXPECT_THROW(conjugate_gradient(scaled_square(1.0), Point{1.0, 2.0}, Box(Point{-1.0}, Point{1.0})),
                 ContractError);
}

TEST(ConjugateGradient, FenchelYoungEqualityAtMaximizer) {
    std::mt19937_64 rng(4);
    for (const auto& e : zoo::catalog()) {
        if (!e.conjugate || !e.convex) continue;
        const std::size_t n = e.oracle.dimension();
        const Box box = e.default_box;
        for (const auto& t : sample_points({box.shrunk(0.2), 30, 1, 12, 1e-5})) {
            const Point s = e.oracle.grad_select(t.x);
            if (!e.in_conjugate_domain(s)) continue;
            const auto r = conjugate_gradient(e.oracle, s, box);
            const double lhs = e.oracle.value(r.x) + e.conjugate->value(s);
            EXPECT_NEAR(lhs, dot(s, r.x), 1e-7 * (1.0 + std::fabs(lhs))) << e.name << " n=" << n;
        }
    }
}

TEST(Csv, RoundTrip) {
    const GridFunction g({-1.0, 0.1, 1.0 / 3.0}, {2.0, -1e-300, 5.5e10});
    std::stringstream ss;
    write_csv(ss, g);
    EXPECT_EQ(ss.str().substr(0, 8), "x,value\n");
    const GridFunction back = read_grid_csv(ss);
    EXPECT_EQ(back.xs(), g.xs());
    EXPECT_EQ(back.values(), g.values());
}

TEST(Csv, MalformedInput) {
    std::stringstream bad_header("s,fstar\n1,2\n");
    EXPECT_THROW(read_grid_csv(bad_header), ContractError);
    std::stringstream bad_row("x,value\n1;2\n2,3\n");
    EXPECT_THROW(read_grid_csv(bad_row), ContractError);
    std::stringstream bad_num("x,value\n1,abc\n2,3\n");
    EXPECT_THROW(read_grid_csv(bad_num), ContractError);
}
