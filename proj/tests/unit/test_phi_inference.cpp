#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bcoint/errors.hpp"
#include "bcoint/phi_inference.hpp"
#include "bcoint/truncated_normal.hpp"
#include "oracles.hpp"

using namespace bcoint;

namespace {

std::vector<double> ar1_draw(std::size_t n, double phi, double s2, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> e(n);
    e[0] = std::abs(phi) < 1 ? z(rng) * std::sqrt(s2 / (1 - phi * phi)) : 0.0;
    for (std::size_t t = 1; t < n; ++t) e[t] = phi * e[t - 1] + std::sqrt(s2) * z(rng);
    return e;
}

}  // namespace

TEST(TruncatedNormal, UpperTailMatchesErfc) {
    for (double z : {-6.0, -2.0, -0.3, 0.0, 0.7, 3.0, 7.5}) {
        EXPECT_NEAR(log_normal_upper_tail(z), std::log(0.5 * std::erfc(z / std::sqrt(2.0))), 1e-12);
    }
}

TEST(TruncatedNormal, UpperTailAsymptotics) {
    // Mills ratio expansion: Q(z) ~ phi(z)/z (1 - 1/z^2 + 3/z^4 - 15/z^6).
    for (double z : {10.0, 20.0, 40.0}) {
        const double series = 1 - 1 / (z * z) + 3 / std::pow(z, 4) - 15 / std::pow(z, 6) + 105 / std::pow(z, 8);
        const double expect = -0.5 * z * z - 0.5 * std::log(2 * std::numbers::pi) - std::log(z) + std::log(series);
        EXPECT_NEAR(log_normal_upper_tail(z), expect, 1e-7);
    }
    EXPECT_NEAR(log_normal_upper_tail(-40.0), 0.0, 1e-300);
}

TEST(TruncatedNormal, MomentsMatchGrid) {
    for (auto [m, v] : {std::pair{0.0, 1.0}, {0.9, 0.01}, {3.0, 0.2}, {-5.0, 0.5}, {0.2, 1e-6}}) {
        const auto tn = truncated_unit_moments(m, v);
        const auto g = oracle::grid_integrate([&](double p) { return oracle::log_gauss(p, m, v); });
        EXPECT_NEAR(tn.log_mass, g.log_mass, 1e-7) << m << " " << v;
        EXPECT_NEAR(tn.m1, g.m1, 1e-8);
        EXPECT_NEAR(tn.m2, g.m2, 1e-8);
        EXPECT_NEAR(truncated_unit_log_mass(m, v), tn.log_mass, 1e-14);
    }
}

TEST(TruncatedNormal, FarTailStaysFinite) {
    const auto tn = truncated_unit_moments(60.0, 0.01);
    EXPECT_TRUE(std::isfinite(tn.log_mass));
    EXPECT_GT(tn.m1, 0.99);
    EXPECT_LE(tn.m1, 1.0);
    EXPECT_GE(tn.m2, tn.m1 * tn.m1);
}

TEST(PhiStats, Examples) {
    auto s = phi_stats(std::vector<double>{1, 1, 1, 1});
    EXPECT_EQ(s.e12, 3);
    EXPECT_EQ(s.e1, 2);
    s = phi_stats(std::vector<double>{0, 0, 0, 0});
    EXPECT_EQ(s.e12, 0);
    EXPECT_EQ(s.e1, 0);
    s = phi_stats(std::vector<double>{1, -1, 1, -1, 1});
    EXPECT_EQ(s.e12, -4);
    EXPECT_EQ(s.e1, 3);
}

TEST(BatchPosterior, AllOnes) {
    const auto p = batch_posterior(std::vector<double>{1, 1, 1, 1}, 2.0);
    EXPECT_DOUBLE_EQ(p.f, 1.5);
    EXPECT_DOUBLE_EQ(p.F, 1.0);
    EXPECT_EQ(p.prefactor, Prefactor::Semicircle);
}

TEST(BatchPosterior, ZeroCrossProductIsSymmetric) {
    const std::vector<double> eps{1, 0, 1, 0};
    const auto p = batch_posterior(eps, 1.0);
    EXPECT_EQ(p.f, 0.0);
    EXPECT_NEAR(posterior_moments(p).m1, 0.0, 1e-14);
}

TEST(BatchPosterior, Degenerate) {
    EXPECT_THROW(batch_posterior(std::vector<double>{0, 0, 0, 0}, 1.0), DegenerateError);
}

TEST(BatchPosterior, DensityMatchesGridOfExponent) {
    const auto eps = ar1_draw(200, 0.6, 0.8, 17);
    const auto post = batch_posterior(eps, 0.8);
    std::vector<double> diff;
    for (int i = 1; i < 1000; ++i) {
        const double phi = -1.0 + i * 0.002;
        diff.push_back(log_unnormalized_density(post, phi) - oracle::ar1_path_logpdf(eps, phi, 0.8, true));
    }
    // The two agree up to one global constant wherever the density is not negligible.
    const double c = diff[800];
    for (int i = 1; i < 1000; ++i) {
        const double phi = -1.0 + i * 0.002;
        if (oracle::ar1_path_logpdf(eps, phi, 0.8, true) - oracle::ar1_path_logpdf(eps, post.f, 0.8, true) < -30) {
            continue;
        }
        EXPECT_NEAR(std::expm1(diff[i - 1] - c), 0.0, 1e-8) << phi;
    }
}

TEST(SequentialFilter, HandRecursion) {
    const std::vector<double> eps{1, 0.5, 0.25};
    const auto p2 = sequential_filter(std::vector<double>{1, 0.5}, 1.0);
    EXPECT_DOUBLE_EQ(p2.f, 0.5);
    EXPECT_DOUBLE_EQ(p2.F, 1.0);
    const auto p3 = sequential_filter(eps, 1.0);
    EXPECT_NEAR(p3.f, 0.5, 1e-15);
    EXPECT_NEAR(p3.F, 0.8, 1e-15);
    EXPECT_EQ(p3.prefactor, Prefactor::None);
}

TEST(SequentialFilter, MatchesBatchUniform) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 3 + rng() % 300;
        const double s2 = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
        const auto eps = ar1_draw(n, std::uniform_real_distribution<double>(-1, 1)(rng), s2, rng());
        double num = 0, den = 0;
        for (std::size_t t = 1; t < n; ++t) {
            num += eps[t] * eps[t - 1];
            den += eps[t - 1] * eps[t - 1];
        }
        const auto p = sequential_filter(eps, s2);
        EXPECT_NEAR(p.f, num / den, 1e-10 * std::max(1.0, std::abs(num / den)));
        EXPECT_NEAR(p.F, s2 / den, 1e-10 * s2 / den);
        const auto b = uniform_batch_posterior(eps, s2);
        EXPECT_NEAR(b.f, num / den, 1e-12 * std::max(1.0, std::abs(num / den)));
    }
}

TEST(SequentialFilter, LeadingZerosDeferInitialisation) {
    const std::vector<double> eps{0, 0, 1, 2, 2.5, 3.1};
    const std::vector<double> suffix{1, 2, 2.5, 3.1};
    const auto a = sequential_filter(eps, 0.7);
    const auto b = sequential_filter(suffix, 0.7);
    EXPECT_NEAR(a.f, b.f, 1e-14);
    EXPECT_NEAR(a.F, b.F, 1e-14);
    const std::vector<double> mid{0.5, 0, 1, 0, 2};
    const auto m = sequential_filter(mid, 1.0);
    EXPECT_NEAR(m.f, (0 + 0 + 0 + 0) / (0.25 + 1), 1e-14);
    EXPECT_NEAR(m.F, 1.0 / 1.25, 1e-14);
}

TEST(SequentialFilter, AllZeroThrows) {
    EXPECT_THROW(sequential_filter(std::vector<double>{0, 0, 0}, 1.0), DegenerateError);
    EXPECT_THROW(sequential_filter(std::vector<double>{0, 0, 5}, 1.0), DegenerateError);
}

TEST(PosteriorMoments, FlatLimits) {
    const auto semi = posterior_moments({0.0, kFlatVariance, Prefactor::Semicircle});
    EXPECT_NEAR(semi.m1, 0.0, 1e-12);
    EXPECT_NEAR(semi.m2, 0.25, 1e-10);
    const auto uni = posterior_moments({0.0, kFlatVariance, Prefactor::None});
    EXPECT_NEAR(uni.m1, 0.0, 1e-12);
    EXPECT_NEAR(uni.m2, 1.0 / 3.0, 1e-10);
}

TEST(PosteriorMoments, PeakedNearBoundaryMatchesGrid) {
    const PhiPosterior post{0.9, 0.01, Prefactor::Semicircle};
    const auto m = posterior_moments(post);
    const auto g = oracle::grid_integrate([](double p) {
        return 0.5 * std::log1p(-p * p) + oracle::log_gauss(p, 0.9, 0.01);
    });
    EXPECT_NEAR(m.m1, g.m1, 1e-8);
    EXPECT_NEAR(m.m2, g.m2, 1e-8);
    const auto q = integrate_posterior_quadrature(post);
    EXPECT_NEAR(q.log_mass, g.log_mass, 1e-8);
}

TEST(PosteriorMoments, ClosedFormAgreesWithQuadrature) {
    for (auto [f, F] : {std::pair{0.3, 0.05}, {1.4, 0.02}, {-0.99, 1e-4}, {0.0, 10.0}}) {
        const PhiPosterior p{f, F, Prefactor::None};
        const auto c = integrate_posterior(p);
        const auto q = integrate_posterior_quadrature(p);
        EXPECT_EQ(c.nodes, 0);
        EXPECT_GT(q.nodes, 0);
        EXPECT_NEAR(c.log_mass, q.log_mass, 1e-9);
        EXPECT_NEAR(c.moments.m1, q.moments.m1, 1e-9);
        EXPECT_NEAR(c.moments.m2, q.moments.m2, 1e-9);
    }
}

TEST(PosteriorMoments, StableUnderTighterTolerance) {
    for (auto [f, F] : {std::pair{0.98, 1e-5}, {0.5, 0.3}, {-1.3, 0.01}}) {
        const PhiPosterior p{f, F, Prefactor::Semicircle};
        const auto a = integrate_posterior_quadrature(p, 1e-10);
        const auto b = integrate_posterior_quadrature(p, 1e-13);
        EXPECT_NEAR(a.log_mass, b.log_mass, 1e-8 * std::max(1.0, std::abs(b.log_mass)));
        EXPECT_NEAR(a.moments.m1, b.moments.m1, 1e-8);
        EXPECT_NEAR(a.moments.m2, b.moments.m2, 1e-8);
    }
}

TEST(PosteriorMoments, PositiveVariance) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 100; ++k) {
        const double f = std::uniform_real_distribution<double>(-2, 2)(rng);
        const double F = std::exp(std::uniform_real_distribution<double>(-12, 2)(rng));
        for (auto pre : {Prefactor::None, Prefactor::Semicircle}) {
            const auto m = posterior_moments({f, F, pre});
            EXPECT_GT(m.m2 - m.m1 * m.m1, 0.0);
            EXPECT_GT(m.m1, -1.0);
            EXPECT_LT(m.m1, 1.0);
        }
    }
}

TEST(PhiPosterior, StationaryEqualsUniformTimesEps1Term) {
    const auto eps = ar1_draw(40, 0.4, 1.3, 21);
    const double s2 = 1.3;
    const auto stat = batch_posterior(eps, s2);
    const auto uni = uniform_batch_posterior(eps, s2);
    const auto ls = integrate_posterior(stat).log_mass;
    const auto lu = integrate_posterior(uni).log_mass;
    // Normalising the tilted uniform posterior needs its own mass.
    auto tilted = [&](double p) {
        return log_unnormalized_density(uni, p) + 0.5 * std::log1p(-p * p) -
               eps[0] * eps[0] * (1 - p * p) / (2 * s2);
    };
    const auto g = oracle::grid_integrate(tilted, 200'000);
    for (double p : {-0.5, 0.0, 0.2, 0.4, 0.7, 0.95}) {
        const double a = log_unnormalized_density(stat, p) - ls;
        const double b = tilted(p) - g.log_mass;
        EXPECT_NEAR(a, b, 1e-8) << p;
    }
    (void)lu;
}

TEST(CointMarginal, ZeroResiduals) {
    const std::vector<double> eps(5, 0.0);
    // Four transition densities and the eps_1 density each contribute 1/sqrt(2 pi);
    // the remaining phi integral is ∫ (1/2) sqrt(1 - phi^2) = pi / 4.
    const double expect = -2.5 * kLog2Pi + std::log(std::numbers::pi / 4);
    EXPECT_NEAR(coint_marginal_loglik(eps, 1.0), expect, 1e-12);
    EXPECT_NEAR(oracle::direct_marginal(eps, 1.0, true).log_mass, expect, 1e-9);
}

TEST(CointMarginal, MatchesDirectQuadrature) {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 12; ++k) {
        const std::size_t n = 3 + rng() % 400;
        const double s2 = std::exp(std::uniform_real_distribution<double>(-2, 2)(rng));
        const double phi = std::uniform_real_distribution<double>(-1, 1.05)(rng);
        const auto eps = ar1_draw(n, std::min(phi, 1.0), s2, rng());
        const double lib = coint_marginal_loglik(eps, s2);
        const double ref = oracle::direct_marginal(eps, s2, true).log_mass;
        EXPECT_NEAR(lib, ref, 1e-7 * std::abs(ref)) << "n=" << n << " phi=" << phi;
        const double w = 2.7;
        const double lib_u = coint_marginal_loglik(eps, s2, EpsInit::UniformImproper, w);
        const double ref_u = oracle::direct_marginal(eps, s2, false, w).log_mass;
        EXPECT_NEAR(lib_u, ref_u, 1e-7 * std::abs(ref_u));
    }
}

TEST(CointMarginal, UniformDegenerateLags) {
    // Every lag zero: the phi integral is 1 and the transitions are N(eps_t | 0, s2).
    const std::vector<double> eps{0, 0, 0};
    EXPECT_NEAR(coint_marginal_loglik(eps, 1.0, EpsInit::UniformImproper, 2.0),
                -std::log(2.0) - kLog2Pi, 1e-12);
}

TEST(CointMarginal, PrefersOrderedOverShuffled) {
    std::mt19937_64 rng(5);
    int wins = 0;
    for (int k = 0; k < 200; ++k) {
        auto eps = ar1_draw(100, 0.5, 1.0, 1000 + k);
        const double a = coint_marginal_loglik(eps, 1.0);
        std::shuffle(eps.begin(), eps.end(), rng);
        if (a > coint_marginal_loglik(eps, 1.0)) ++wins;
    }
    EXPECT_GE(wins, 190);
}

TEST(CointInference, MomentsMatchPosterior) {
    const auto eps = ar1_draw(80, 0.8, 0.5, 3);
    const auto inf = coint_inference(eps, 0.5, EpsInit::Stationary);
    const auto g = oracle::direct_marginal(eps, 0.5, true);
    EXPECT_NEAR(inf.log_lik, g.log_mass, 1e-7 * std::abs(g.log_mass));
    EXPECT_NEAR(inf.moments.m1, g.m1, 1e-8);
    EXPECT_NEAR(inf.moments.m2, g.m2, 1e-8);
}

TEST(TruncatedNormal, WideVarianceMatchesGrid) {
    for (auto [m, v] : {std::pair{0.0, 1e12}, {3e4, 1e4}, {-2e6, 1e5}, {0.4, 9.9e3}, {0.4, 1.01e4}}) {
        const auto tn = truncated_unit_moments(m, v);
        const auto g = oracle::grid_integrate([&](double p) { return oracle::log_gauss(p, m, v); });
        EXPECT_NEAR(tn.log_mass, g.log_mass, 1e-9 * std::max(1.0, std::abs(g.log_mass))) << m << " " << v;
        EXPECT_NEAR(tn.m1, g.m1, 1e-9);
        EXPECT_NEAR(tn.m2, g.m2, 1e-9);
    }
}
