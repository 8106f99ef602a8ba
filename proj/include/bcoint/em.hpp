#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bcoint/phi_inference.hpp"
#include "bcoint/series.hpp"

namespace bcoint {

struct EmConfig {
    int max_iters = 500;
    double rel_tol = 1e-9;

    void validate() const;
};

struct EmTrace {
    std::vector<double> loglik_history;
    std::vector<RegressionParams> params_history;
    bool converged = false;
};

// Expected AR(1) quadratic energy with per-time weights:
//   Q = a_1 eps_1^2 + sum_{t>=2} [a_t eps_t^2 - 2 b_t eps_t eps_{t-1} + c_t eps_{t-1}^2]
// with `gaussian_terms` Gaussian factors contributing -1/2 log(2 pi sigma2) each.
// Index 0 only uses a[0].
struct Ar1EnergyWeights {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;
    double gaussian_terms = 0.0;

    // Weights of the static model with phi moments `mom`.
    static Ar1EnergyWeights from_moments(std::size_t length, const PhiMoments& mom,
                                         EpsInit init);
};

double weighted_quadratic(std::span<const double> eps, const Ar1EnergyWeights& w);

// -Q/(2 sigma2) - (gaussian_terms / 2) log(2 pi sigma2)
double weighted_energy(std::span<const double> eps, double sigma2, const Ar1EnergyWeights& w);

// Stationary point of the energy in (alpha, beta), then sigma2 = Q / gaussian_terms at
// the new coefficients. Throws DegenerateError on a singular 2x2 system or when
// the variance update collapses to zero. When the weights carry no information
// about alpha (pure random-walk weights), alpha stays at current_alpha.
RegressionParams solve_weighted_regression(const SeriesPair& pair, const Ar1EnergyWeights& w,
                                           double current_alpha = 0.0);

// Expected complete-data log-likelihood of the static model (up to a constant).
double expected_energy(const SeriesPair& pair, const RegressionParams& params,
                       const PhiMoments& mom, EpsInit init = EpsInit::Stationary);

RegressionParams m_step(const SeriesPair& pair, const PhiMoments& mom,
                        EpsInit init = EpsInit::Stationary, double current_alpha = 0.0);

struct EmResult {
    RegressionParams params;
    PhiPosterior posterior;
    PhiMoments moments;
    double log_lik = 0.0;  // marginal log-likelihood at `params`
    double width = 1.0;    // uniform eps_1 width (UniformImproper only)
    EmTrace trace;
};

// EM over (alpha, beta, sigma2) with phi latent, monitored on the marginal
// log-likelihood. For UniformImproper the width is fixed for the whole run and
// defaults to the range of the initial residuals.
EmResult em_fit(const SeriesPair& pair, const RegressionParams& init, const EmConfig& cfg,
                EpsInit eps_init = EpsInit::Stationary,
                std::optional<double> width = std::nullopt);

// |current - previous| <= rel_tol * |current|
bool relative_change_below(double previous, double current, double rel_tol);

}  // namespace bcoint
