#pragma once

#include <optional>
#include <span>

#include "bcoint/series.hpp"

namespace bcoint {

// Stand-in for an infinitely wide Gaussian factor (flat posterior over phi).
inline constexpr double kFlatVariance = 1e12;

enum class Prefactor {
    None,        // uniform eps_1 prior: plain truncated Gaussian
    Semicircle,  // stationary eps_1 prior: extra sqrt(1 - phi^2) factor
};

// Posterior over the AR(1) coefficient phi on (-1, 1):
//   p(phi) ∝ [sqrt(1 - phi^2)] N(phi | f, F),  -1 < phi < 1.
struct PhiPosterior {
    double f = 0.0;
    double F = kFlatVariance;
    Prefactor prefactor = Prefactor::None;

    // Throws InputError unless f is finite and F is finite and positive.
    void validate() const;
};

// Lag sums of the residual series:
//   e12 = sum_{t=2..T} eps_t eps_{t-1},  e1 = sum_{t=3..T} eps_{t-1}^2.
struct PhiStats {
    double e12 = 0.0;
    double e1 = 0.0;
};

struct PhiMoments {
    double m1 = 0.0;  // <phi>
    double m2 = 0.0;  // <phi^2>
};

// Normalising mass and moments of a PhiPosterior.
struct PhiIntegral {
    double log_mass = 0.0;  // log of ∫_{-1}^{1} [sqrt(1-phi^2)] N(phi|f,F) dphi
    PhiMoments moments;
    int nodes = 0;          // quadrature nodes used (0 for closed form)
};

PhiStats phi_stats(std::span<const double> eps);

// Stationary eps_1 prior; throws DegenerateError when e1 == 0.
PhiPosterior batch_posterior(std::span<const double> eps, double sigma2);

// Uniform eps_1 prior in batch form: f = sum eps_t eps_{t-1} / sum eps_{t-1}^2,
// F = sigma2 / sum eps_{t-1}^2 over t = 2..T. Throws DegenerateError when every
// lagged residual is zero.
PhiPosterior uniform_batch_posterior(std::span<const double> eps, double sigma2);

// Kalman-style recursion over t, starting from the first non-zero lag.
// Produces the same posterior as uniform_batch_posterior.
PhiPosterior sequential_filter(std::span<const double> eps, double sigma2);

// log of [sqrt(1-phi^2)] N(phi | f, F); -inf outside (-1, 1).
double log_unnormalized_density(const PhiPosterior& post, double phi);

// Adaptive composite Gauss-Legendre after the substitution phi = sin(u), run
// in log space with a max shift. Throws QuadratureError when the tolerance is
// not met at 2^15 nodes.
PhiIntegral integrate_posterior_quadrature(const PhiPosterior& post, double rel_tol = 1e-10);

// Closed form for Prefactor::None, quadrature otherwise.
PhiIntegral integrate_posterior(const PhiPosterior& post);

PhiMoments posterior_moments(const PhiPosterior& post);

// log of ∫ U(phi | -1, 1) p(eps_{1:T} | phi) dphi. Stationary uses
// N(eps_1 | 0, sigma2/(1-phi^2)); UniformImproper uses 1/W for eps_1 with W
// defaulting to default_width(eps).
double coint_marginal_loglik(std::span<const double> eps, double sigma2,
                             EpsInit init = EpsInit::Stationary,
                             std::optional<double> width = std::nullopt);

// The marginal likelihood together with the posterior that produced it, so the
// EM loop does not integrate twice.
struct CointInference {
    double log_lik = 0.0;
    PhiPosterior posterior;
    PhiMoments moments;
};

CointInference coint_inference(std::span<const double> eps, double sigma2, EpsInit init,
                               std::optional<double> width = std::nullopt);

}  // namespace bcoint
