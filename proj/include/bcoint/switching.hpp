#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bcoint/em.hpp"
#include "bcoint/phi_inference.hpp"
#include "bcoint/series.hpp"

namespace bcoint {

// Regime-switching ("reset") model for intermittent cointegration. Time indices
// below are 0-based: eps[0] is the first residual, regimes exist for t >= 1.
// i_t = 1 is a random-walk step (phi_t = 1); i_t = 0 is cointegrated with phi_t
// constant inside a segment and drawn afresh from U(-1, 1) when a segment
// starts. The first residual of a segment that follows a random-walk step has
// density 1/reset_width; eps[0] has density 1/reset_width as well.
struct SwitchConfig {
    double p_init_rw = 0.5;   // p(i_1 = 1)
    double p_rw_to_rw = 0.9;  // p(i_t = 1 | i_{t-1} = 1)
    double p_c_to_c = 0.9;    // p(i_t = 0 | i_{t-1} = 0)
    std::optional<double> reset_width;  // defaults to the range of eps

    // Drop components whose log-weight falls more than `prune_log_gap` below
    // the slice maximum. Inexact; off by default.
    bool prune = false;
    double prune_log_gap = 40.0;

    void validate() const;
};

// One cointegrated hypothesis in a filtered slice: the segment began at
// `run_start` and phi has posterior `post` (uniform prior, no prefactor).
struct MixtureComponent {
    std::size_t run_start = 0;
    std::size_t run_length = 0;  // t - run_start
    double log_weight = 0.0;     // log p(i_t = 0, start = run_start | eps_{0:t})
    bool flat = true;            // no data update yet: phi ~ U(-1, 1)
    PhiPosterior post;
    double log_mass = 0.0;       // log ∫_{-1}^{1} N(phi | f, F) dphi (0 when flat)
    PhiMoments moments;          // of the truncated posterior
};

struct FilteredSlice {
    std::size_t t = 0;
    double rw_prob = 0.0;  // p(i_t = 1 | eps_{0:t})
    double log_rw_prob = 0.0;
    std::vector<MixtureComponent> components;  // ordered by run_start
    double log_z = 0.0;    // log p(eps_t | eps_{0:t-1})
    double log_lik = 0.0;  // log p(eps_{0:t})
};

struct SwitchFilterResult {
    std::vector<FilteredSlice> slices;  // slices[k] is time t = k + 1
    double log_likelihood = 0.0;       // log p(eps_{0:T-1})
    double width = 1.0;
};

struct SmoothedComponent {
    std::size_t run_start = 0;
    std::size_t run_length = 0;
    double log_weight = 0.0;  // log p(i_t = 0, start = run_start | eps_{0:T-1})
    PhiMoments moments;       // of phi_t given that event and all data
};

struct SmoothedSlice {
    std::size_t t = 0;
    double rw_prob = 0.0;     // p(i_t = 1 | eps_{0:T-1})
    std::vector<SmoothedComponent> components;
    PhiMoments coint_moments;  // of phi_t given i_t = 0 and all data (0, 0 if impossible)
    double reset_prob = 0.0;   // p(a segment starts at t | all data)
    // Cointegrated steps whose emission depends on phi (i_t = 0, no reset):
    double continue_prob = 0.0;
    double continue_m1 = 0.0;  // sum over those events of prob * <phi_t>
    double continue_m2 = 0.0;  // sum over those events of prob * <phi_t^2>
};

struct SwitchSmoothResult {
    std::vector<SmoothedSlice> slices;  // slices[k] is time t = k + 1
};

SwitchFilterResult switch_filter(std::span<const double> eps, double sigma2,
                                 const SwitchConfig& cfg);

SwitchSmoothResult switch_smooth(const SwitchFilterResult& filtered, std::span<const double> eps,
                                 double sigma2, const SwitchConfig& cfg);

// Energy weights of the switching model for the EM M-step.
Ar1EnergyWeights switching_energy_weights(const SwitchSmoothResult& smoothed);

struct SwitchEmResult {
    RegressionParams params;
    SwitchFilterResult filtered;
    SwitchSmoothResult smoothed;
    double log_lik = 0.0;
    double width = 1.0;
    EmTrace trace;
};

// EM for (alpha, beta, sigma2) with regimes and phi latent. reset_width is
// resolved once from the initial residuals and held fixed.
SwitchEmResult switch_em(const SeriesPair& pair, const RegressionParams& init,
                         const SwitchConfig& cfg, const EmConfig& em_cfg);

// Maximum posterior marginal regimes for t = 1..T-1 (index k is time k + 1).
// Ties go to the cointegrated regime.
std::vector<int> map_regimes(const SwitchSmoothResult& smoothed);

inline constexpr double kPhiClampMargin = 1e-6;

struct PhiEstimates {
    std::vector<double> phi;  // phi[k] is time t = k + 1
    // (start, end) of cointegrated segments with no data update; phi is 0 there.
    std::vector<std::pair<std::size_t, std::size_t>> uninformative_segments;
};

// Piecewise-constant phi point estimates given regimes: 1 on random-walk steps,
// the clamped posterior mode within each cointegrated segment.
PhiEstimates map_phi(std::span<const double> eps, double sigma2, std::span<const int> regimes);

}  // namespace bcoint
