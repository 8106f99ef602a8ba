#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bcoint/errors.hpp"
#include "bcoint/series.hpp"
#include "oracles.hpp"

using namespace bcoint;

namespace {

SeriesPair random_pair(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> x(n), y(n);
    double xv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xv += z(rng);
        x[i] = xv;
        y[i] = 0.3 + 1.7 * xv + z(rng);
    }
    return SeriesPair(x, y);
}

}  // namespace

TEST(SeriesPair, RejectsShortMismatchedAndNonFinite) {
    EXPECT_THROW(SeriesPair({1, 2}, {1, 2}), InputError);
    EXPECT_THROW(SeriesPair({1, 2, 3}, {1, 2}), InputError);
    EXPECT_THROW(SeriesPair({1, 2, NAN}, {1, 2, 3}), InputError);
    EXPECT_THROW(SeriesPair({1, 2, 3}, {1, INFINITY, 3}), InputError);
    EXPECT_NO_THROW(SeriesPair({1, 2, 3}, {1, 2, 3}));
}

TEST(RegressionParams, RequiresPositiveVariance) {
    EXPECT_THROW((RegressionParams{0, 1, 0}.validate()), InputError);
    EXPECT_THROW((RegressionParams{0, 1, -1}.validate()), InputError);
    EXPECT_NO_THROW((RegressionParams{0, 1, 0.1}.validate()));
}

TEST(ComputeResiduals, ExactLinearFit) {
    const auto eps = compute_residuals(SeriesPair({0, 1, 2}, {1, 3, 5}), {1, 2, 1});
    for (double e : eps) EXPECT_EQ(e, 0.0);
}

TEST(ComputeResiduals, ZeroParamsGiveY) {
    const SeriesPair p({4, -2, 9, 1}, {0.5, 7, -3, 2});
    const auto eps = compute_residuals(p, {0, 0, 1});
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(eps[i], p.y()[i]);
}

TEST(ComputeResiduals, HandArithmetic) {
    const auto eps = compute_residuals(SeriesPair({1, 2, 4}, {2.5, 3.1, 7.0}), {0.5, 1.2, 1});
    EXPECT_NEAR(eps[0], 0.8, 1e-14);
    EXPECT_NEAR(eps[1], 0.2, 1e-14);
    EXPECT_NEAR(eps[2], 1.7, 1e-14);
}

TEST(ComputeResiduals, Affine) {
    const SeriesPair p = random_pair(20, 3);
    const double c = 2.5;
    std::vector<double> ys(p.y().begin(), p.y().end());
    for (auto& v : ys) v *= c;
    const auto a = compute_residuals(p, {0.3, 1.1, 1});
    const auto b = compute_residuals(SeriesPair({p.x().begin(), p.x().end()}, ys), {0.3 * c, 1.1 * c, 1});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], c * a[i], 1e-12);
}

TEST(OlsFit, ExactLineFlagsZeroResiduals) {
    const OlsFit f = ols_fit(SeriesPair({0, 1, 2, 3}, {1, 3, 5, 7}));
    EXPECT_NEAR(f.alpha, 1.0, 1e-14);
    EXPECT_NEAR(f.beta, 2.0, 1e-14);
    EXPECT_TRUE(f.zero_residuals);
    EXPECT_THROW(f.params(), DegenerateError);
}

TEST(OlsFit, ConstantY) {
    const OlsFit f = ols_fit(SeriesPair({0, 3, 1, 7}, {4, 4, 4, 4}));
    EXPECT_NEAR(f.alpha, 4.0, 1e-14);
    EXPECT_NEAR(f.beta, 0.0, 1e-14);
}

TEST(OlsFit, ConstantXIsDegenerate) {
    EXPECT_THROW(ols_fit(SeriesPair({2, 2, 2}, {1, 2, 3})), DegenerateError);
}

TEST(OlsFit, MatchesNormalEquationsOracle) {
    const SeriesPair p = random_pair(50, 11);
    const OlsFit f = ols_fit(p);
    const auto o = oracle::least_squares({p.x().begin(), p.x().end()}, {p.y().begin(), p.y().end()});
    EXPECT_NEAR(f.alpha, o.alpha, 1e-10 * std::abs(o.alpha));
    EXPECT_NEAR(f.beta, o.beta, 1e-10 * std::abs(o.beta));
    double ss = 0.0;
    for (double e : compute_residuals(p, {f.alpha, f.beta, 1})) ss += e * e;
    EXPECT_NEAR(f.sigma2, ss / 50.0, 1e-12 * ss);
}

TEST(OlsFit, PerturbationIncreasesSquaredError) {
    const SeriesPair p = random_pair(40, 5);
    const OlsFit f = ols_fit(p);
    auto sse = [&](double a, double b) {
        double s = 0.0;
        for (double e : compute_residuals(p, {a, b, 1})) s += e * e;
        return s;
    };
    const double base = sse(f.alpha, f.beta);
    for (int k = 0; k < 8; ++k) {
        const double ang = k * std::numbers::pi / 4.0;
        EXPECT_GT(sse(f.alpha + 1e-3 * std::cos(ang), f.beta + 1e-3 * std::sin(ang)), base);
    }
}

TEST(Ar1Loglik, ZeroResidualsUniform) {
    const std::vector<double> eps{0, 0, 0};
    EXPECT_NEAR(ar1_loglik(eps, 0.0, 1.0, EpsInit::UniformImproper, 1.0), -kLog2Pi, 1e-14);
}

TEST(Ar1Loglik, ZeroResidualsStationary) {
    const std::vector<double> eps{0, 0, 0};
    const double expect = -0.5 * std::log(2 * std::numbers::pi * 4.0 / 3.0) - kLog2Pi;
    EXPECT_NEAR(ar1_loglik(eps, 0.5, 1.0, EpsInit::Stationary), expect, 1e-14);
}

TEST(Ar1Loglik, MatchesDensityProduct) {
    const std::vector<double> eps{1, 0.4, 0.3, 0.5};
    EXPECT_NEAR(ar1_loglik(eps, 0.7, 0.25, EpsInit::Stationary),
                oracle::ar1_path_logpdf(eps, 0.7, 0.25, true), 1e-12);
    EXPECT_NEAR(ar1_loglik(eps, 0.7, 0.25, EpsInit::UniformImproper, 3.0),
                oracle::ar1_path_logpdf(eps, 0.7, 0.25, false, 3.0), 1e-12);
}

TEST(Ar1Loglik, DefaultWidthIsRange) {
    const std::vector<double> eps{1, -0.5, 2.0, 0.1};
    EXPECT_DOUBLE_EQ(default_width(eps), 2.5);
    EXPECT_DOUBLE_EQ(default_width(std::vector<double>{3, 3, 3}), 1.0);
    EXPECT_NEAR(ar1_loglik(eps, 0.2, 1.0, EpsInit::UniformImproper),
                oracle::ar1_path_logpdf(eps, 0.2, 1.0, false, 2.5), 1e-12);
}

TEST(Ar1Loglik, InvalidPhi) {
    const std::vector<double> eps{1, 0.4, 0.3};
    EXPECT_THROW(ar1_loglik(eps, 1.0, 1.0, EpsInit::Stationary), InputError);
    EXPECT_THROW(ar1_loglik(eps, 1.2, 1.0, EpsInit::UniformImproper, 1.0), InputError);
    EXPECT_NO_THROW(ar1_loglik(eps, 1.0, 1.0, EpsInit::UniformImproper, 1.0));
}

TEST(Ar1Loglik, PhiZeroUniformIsOlsObjective) {
    // At phi = 0 the uniform-init likelihood is Gaussian in eps_2..T, so its
    // maximiser over (alpha, beta) for fixed sigma2 is least squares on those points.
    const SeriesPair p = random_pair(30, 9);
    const std::vector<double> xs(p.x().begin() + 1, p.x().end()), ys(p.y().begin() + 1, p.y().end());
    const auto o = oracle::least_squares(xs, ys);
    auto ll = [&](double a, double b) {
        return ar1_loglik(compute_residuals(p, {a, b, 1}), 0.0, 1.0, EpsInit::UniformImproper, 1.0);
    };
    EXPECT_NEAR(oracle::central_diff([&](double a) { return ll(a, o.beta); }, o.alpha, 1e-5), 0.0, 1e-6);
    EXPECT_NEAR(oracle::central_diff([&](double b) { return ll(o.alpha, b); }, o.beta, 1e-5), 0.0, 1e-6);
}
