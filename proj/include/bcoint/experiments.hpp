#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bcoint/coint_test.hpp"
#include "bcoint/em.hpp"
#include "bcoint/series.hpp"
#include "bcoint/switching.hpp"

namespace bcoint {

enum class XProcess { RandomWalk, Supplied };

// One series from the generative model y_t = alpha + beta x_t + eps_t with
// eps_t = phi eps_{t-1} + eta_t. |phi| < 1 starts eps from its stationary law;
// otherwise eps_1 = 0. x is a standard Gaussian random walk unless supplied.
struct SimSpec {
    std::size_t t_len = 100;
    double alpha = 0.0;
    double beta = 1.0;
    double sigma2 = 1.0;
    double phi = 0.5;
    XProcess x_process = XProcess::RandomWalk;
    std::vector<double> x_supplied;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimulatedSeries {
    SeriesPair pair;
    Residuals eps;
};

SimulatedSeries simulate_with_truth(const SimSpec& spec);
SeriesPair simulate(const SimSpec& spec);

// Piecewise regimes: each segment has a length and a phi (1 = random walk).
// Cointegrated segments continue the AR(1) recursion from the previous value.
struct Segment {
    std::size_t length = 0;
    double phi = 0.5;
};

struct SegmentedSimSpec {
    std::vector<Segment> segments;
    double alpha = 0.0;
    double beta = 1.0;
    double sigma2 = 1.0;
    std::uint64_t seed = 0;

    std::size_t t_len() const;
    void validate() const;
};

struct SegmentedSeries {
    SeriesPair pair;
    Residuals eps;
    std::vector<int> regimes;            // regimes[k] is i_t for t = k + 1 (1 = random walk)
    std::vector<std::size_t> boundaries; // times t >= 2 where the regime changes
};

SegmentedSeries simulate_segmented(const SegmentedSimSpec& spec);

// Times t >= 2 at which regimes (indexed from t = 1) change value.
std::vector<std::size_t> regime_boundaries(const std::vector<int>& regimes);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    void add(bool truth_cointegrated, bool declared_cointegrated);
    // FP / true negatives and FN / true positives (0 when the class is empty).
    double fp_rate() const;
    double fn_rate() const;
};

Confusion tally(const std::vector<bool>& truth, const std::vector<bool>& declared);

struct RatesConfig {
    std::vector<std::size_t> lengths{20, 50, 100, 200};
    std::size_t n_per_length = 500;
    std::uint64_t base_seed = 1;
    double threshold_log_c = kDefaultLogThreshold;
    double significance = kDefaultSignificance;
    double alpha = 0.0;
    double beta = 1.0;
    double sigma2 = 1.0;
    EmConfig em;
    unsigned threads = 0;

    void validate() const;
};

struct RatesRow {
    std::string method;  // "bayes" or "classical"
    std::size_t t_len = 0;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    std::size_t n_true_neg = 0;
    std::size_t n_true_pos = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t failures = 0;  // series the method could not score (counted as "not cointegrated")
};

struct RatesReport {
    RatesConfig config;
    std::vector<RatesRow> rows;  // per length: bayes, then classical
};

// The first half of each length's series is cointegrated with phi ~ U(-1, 1), the
// second half is a random walk. Series k (over all lengths) uses seed base_seed + k.
RatesReport run_rates(const RatesConfig& cfg);

struct RocConfig {
    std::size_t t_len = 100;
    std::size_t n = 2000;
    std::uint64_t base_seed = 1;
    // Bayes decision thresholds log C; ±inf allowed. Empty selects a default sweep.
    std::vector<double> log_thresholds;
    // Classical significance levels in [0, 1]. Empty selects a default sweep.
    std::vector<double> significance_levels;
    double alpha = 0.0;
    double beta = 1.0;
    double sigma2 = 1.0;
    EmConfig em;
    unsigned threads = 0;

    void validate() const;
};

struct RocPoint {
    double threshold = 0.0;  // log C for bayes, significance level for classical
    double tpr = 0.0;
    double fpr = 0.0;
};

struct RocCurve {
    std::string method;
    std::vector<RocPoint> points;  // thresholds ascending
    double auc = 0.0;              // rank-based (Mann-Whitney) area
};

struct RocReport {
    RocConfig config;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::size_t failures = 0;
    RocCurve bayes;
    RocCurve classical;
};

RocReport run_roc(const RocConfig& cfg);

// Probability that a random positive outscores a random negative (ties count 1/2).
double rank_auc(const std::vector<double>& positive_scores,
                const std::vector<double>& negative_scores);

struct SegmentRecoveryConfig {
    std::vector<Segment> segments{{200, 0.5}, {200, 1.0}, {200, 0.5}};
    double alpha = 0.0;
    double beta = 1.0;
    double sigma2 = 1.0;
    SwitchConfig switching{0.5, 0.99, 0.99, std::nullopt};
    EmConfig em{100, 1e-7};
    std::size_t n = 100;
    std::uint64_t base_seed = 1;
    std::size_t tolerance = 5;  // boundary counted as found within this many steps
    unsigned threads = 0;

    void validate() const;
};

struct SegmentRun {
    std::uint64_t seed = 0;
    bool failed = false;
    double accuracy = 0.0;           // fraction of t >= 1 with the true regime
    double coint_fraction = 0.0;     // fraction of t >= 1 classified cointegrated
    std::vector<double> boundary_errors;  // per true boundary: distance to nearest detected one
    bool within_tolerance = false;   // every true boundary found within tolerance
    std::size_t em_iterations = 0;
};

struct SegmentRecoveryReport {
    SegmentRecoveryConfig config;
    std::vector<SegmentRun> runs;
    std::size_t failures = 0;
    double mean_accuracy = 0.0;
    double mean_coint_fraction = 0.0;
    double mean_boundary_error = 0.0;      // over all true boundaries of successful runs
    double frac_within_tolerance = 0.0;
};

SegmentRecoveryReport run_segment_recovery(const SegmentRecoveryConfig& cfg);

}  // namespace bcoint
