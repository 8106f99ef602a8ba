#include "bcoint/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bcoint/errors.hpp"
#include "bcoint/parallel.hpp"

namespace bcoint {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Decorrelates the phi draw from the series draws that share a seed.
constexpr std::uint64_t kPhiStream = 0xa5a5'5a5a'c3c3'3c3cULL;

std::vector<double> random_walk(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(n);
    x[0] = 0.0;
    for (std::size_t t = 1; t < n; ++t) x[t] = x[t - 1] + normal(rng);
    return x;
}

std::vector<double> default_log_thresholds() {
    std::vector<double> v{-kInf};
    for (int k = -200; k <= 200; ++k) v.push_back(static_cast<double>(k));
    v.push_back(kInf);
    return v;
}

std::vector<double> default_levels() {
    std::vector<double> v;
    for (int k = 0; k <= 100; ++k) v.push_back(k / 100.0);
    return v;
}

double cointegrated_phi(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ kPhiStream);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    return uniform(rng);
}

}  // namespace

void SimSpec::validate() const {
    if (t_len < SeriesPair::kMinLength) throw InputError("simulation needs t_len >= 3");
    if (!(sigma2 > 0.0)) throw InputError("simulation needs sigma2 > 0");
    if (!(std::abs(phi) <= 1.0)) throw InputError("simulation needs |phi| <= 1");
    if (x_process == XProcess::Supplied && x_supplied.size() != t_len) {
        throw InputError("supplied x must have t_len entries");
    }
}

SimulatedSeries simulate_with_truth(const SimSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<double> x = spec.x_process == XProcess::Supplied ? spec.x_supplied
                                                                  : random_walk(spec.t_len, rng);
    std::normal_distribution<double> noise(0.0, std::sqrt(spec.sigma2));
    Residuals eps(spec.t_len);
    if (std::abs(spec.phi) < 1.0) {
        eps[0] = noise(rng) / std::sqrt(1.0 - spec.phi * spec.phi);
    } else {
        eps[0] = 0.0;
    }
    for (std::size_t t = 1; t < spec.t_len; ++t) eps[t] = spec.phi * eps[t - 1] + noise(rng);

    std::vector<double> y(spec.t_len);
    for (std::size_t t = 0; t < spec.t_len; ++t) y[t] = spec.alpha + spec.beta * x[t] + eps[t];
    return SimulatedSeries{SeriesPair(std::move(x), std::move(y)), std::move(eps)};
}

SeriesPair simulate(const SimSpec& spec) { return simulate_with_truth(spec).pair; }

std::size_t SegmentedSimSpec::t_len() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.length;
    return n;
}

void SegmentedSimSpec::validate() const {
    if (segments.empty()) throw InputError("segmented simulation needs at least one segment");
    for (const auto& s : segments) {
        if (s.length == 0) throw InputError("segments must be non-empty");
        if (!(std::abs(s.phi) <= 1.0)) throw InputError("segment phi must satisfy |phi| <= 1");
    }
    if (t_len() < SeriesPair::kMinLength) throw InputError("segmented series needs T >= 3");
    if (!(sigma2 > 0.0)) throw InputError("simulation needs sigma2 > 0");
}

std::vector<std::size_t> regime_boundaries(const std::vector<int>& regimes) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k < regimes.size(); ++k) {
        if (regimes[k] != regimes[k - 1]) out.push_back(k + 1);
    }
    return out;
}

SegmentedSeries simulate_segmented(const SegmentedSimSpec& spec) {
    spec.validate();
    const std::size_t T = spec.t_len();
    std::mt19937_64 rng(spec.seed);
    std::vector<double> x = random_walk(T, rng);
    std::normal_distribution<double> noise(0.0, std::sqrt(spec.sigma2));

    std::vector<double> phi_t(T);
    {
        std::size_t t = 0;
        for (const auto& s : spec.segments) {
            for (std::size_t k = 0; k < s.length; ++k) phi_t[t++] = s.phi;
        }
    }

    Residuals eps(T);
    const double phi0 = phi_t[0];
    eps[0] = std::abs(phi0) < 1.0 ? noise(rng) / std::sqrt(1.0 - phi0 * phi0) : 0.0;
    for (std::size_t t = 1; t < T; ++t) eps[t] = phi_t[t] * eps[t - 1] + noise(rng);

    std::vector<double> y(T);
    for (std::size_t t = 0; t < T; ++t) y[t] = spec.alpha + spec.beta * x[t] + eps[t];

    std::vector<int> regimes(T - 1);
    for (std::size_t t = 1; t < T; ++t) regimes[t - 1] = std::abs(phi_t[t]) >= 1.0 ? 1 : 0;
    auto boundaries = regime_boundaries(regimes);
    return SegmentedSeries{SeriesPair(std::move(x), std::move(y)), std::move(eps),
                           std::move(regimes), std::move(boundaries)};
}

void Confusion::add(bool truth_cointegrated, bool declared_cointegrated) {
    if (truth_cointegrated) {
        declared_cointegrated ? ++tp : ++fn;
    } else {
        declared_cointegrated ? ++fp : ++tn;
    }
}

double Confusion::fp_rate() const {
    const std::size_t neg = fp + tn;
    return neg == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(neg);
}

double Confusion::fn_rate() const {
    const std::size_t pos = tp + fn;
    return pos == 0 ? 0.0 : static_cast<double>(fn) / static_cast<double>(pos);
}

Confusion tally(const std::vector<bool>& truth, const std::vector<bool>& declared) {
    if (truth.size() != declared.size()) throw InputError("tally needs equal-length vectors");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) c.add(truth[i], declared[i]);
    return c;
}

void RatesConfig::validate() const {
    if (lengths.empty()) throw InputError("rates experiment needs at least one length");
    for (auto T : lengths) {
        if (T < 10) throw InputError("rates experiment needs lengths >= 10");
    }
    if (n_per_length == 0 || n_per_length % 2 != 0) {
        throw InputError("n_per_length must be a positive even number");
    }
    if (!(significance > 0.0 && significance < 1.0)) {
        throw InputError("significance must lie in (0, 1)");
    }
    em.validate();
}

RatesReport run_rates(const RatesConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_per_length;
    const std::size_t total = cfg.lengths.size() * n;

    struct Outcome {
        bool truth = false;
        bool bayes = false;
        bool classical = false;
        bool bayes_failed = false;
        bool classical_failed = false;
    };
    std::vector<Outcome> outcomes(total);

    for (auto T : cfg.lengths) DfNullDistribution::cached(T);

    parallel_for(total, cfg.threads, [&](std::size_t k) {
        const std::size_t T = cfg.lengths[k / n];
        const std::size_t i = k % n;
        const std::uint64_t seed = cfg.base_seed + k;
        Outcome& o = outcomes[k];
        o.truth = i < n / 2;

        SimSpec spec;
        spec.t_len = T;
        spec.alpha = cfg.alpha;
        spec.beta = cfg.beta;
        spec.sigma2 = cfg.sigma2;
        spec.phi = o.truth ? cointegrated_phi(seed) : 1.0;
        spec.seed = seed;
        const SeriesPair pair = simulate(spec);

        try {
            o.bayes = bayes_test(pair, cfg.em, cfg.threshold_log_c).cointegrated;
        } catch (const Error&) {
            o.bayes_failed = true;
        }
        try {
            o.classical = classical_test(pair, cfg.significance).reject_unit_root;
        } catch (const Error&) {
            o.classical_failed = true;
        }
    });

    RatesReport report;
    report.config = cfg;
    for (std::size_t li = 0; li < cfg.lengths.size(); ++li) {
        Confusion bayes, classical;
        std::size_t bayes_fail = 0, classical_fail = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Outcome& o = outcomes[li * n + i];
            bayes.add(o.truth, o.bayes);
            classical.add(o.truth, o.classical);
            bayes_fail += o.bayes_failed;
            classical_fail += o.classical_failed;
        }
        auto row = [&](const char* method, const Confusion& c, std::size_t failures) {
            RatesRow r;
            r.method = method;
            r.t_len = cfg.lengths[li];
            r.fp_rate = c.fp_rate();
            r.fn_rate = c.fn_rate();
            r.n_true_neg = c.fp + c.tn;
            r.n_true_pos = c.tp + c.fn;
            r.fp = c.fp;
            r.fn = c.fn;
            r.failures = failures;
            return r;
        };
        report.rows.push_back(row("bayes", bayes, bayes_fail));
        report.rows.push_back(row("classical", classical, classical_fail));
    }
    return report;
}

void RocConfig::validate() const {
    if (t_len < 10) throw InputError("ROC experiment needs t_len >= 10");
    if (n == 0 || n % 2 != 0) throw InputError("ROC experiment needs a positive even n");
    for (double level : significance_levels) {
        if (!(level >= 0.0 && level <= 1.0)) throw InputError("significance levels must lie in [0, 1]");
    }
    for (double c : log_thresholds) {
        if (std::isnan(c)) throw InputError("log thresholds must not be NaN");
    }
    em.validate();
}

double rank_auc(const std::vector<double>& positive_scores,
                const std::vector<double>& negative_scores) {
    if (positive_scores.empty() || negative_scores.empty()) return 0.0;
    std::vector<double> neg = negative_scores;
    std::sort(neg.begin(), neg.end());
    double wins = 0.0;
    for (double s : positive_scores) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
        const auto hi = std::upper_bound(neg.begin(), neg.end(), s);
        wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return wins / (static_cast<double>(positive_scores.size()) *
                   static_cast<double>(negative_scores.size()));
}

RocReport run_roc(const RocConfig& cfg) {
    cfg.validate();
    std::vector<double> log_thresholds =
        cfg.log_thresholds.empty() ? default_log_thresholds() : cfg.log_thresholds;
    std::vector<double> levels =
        cfg.significance_levels.empty() ? default_levels() : cfg.significance_levels;
    std::sort(log_thresholds.begin(), log_thresholds.end());
    std::sort(levels.begin(), levels.end());

    struct Score {
        bool truth = false;
        bool bayes_ok = false;
        bool classical_ok = false;
        double log_bf = 0.0;
        double tau = 0.0;
    };
    std::vector<Score> scores(cfg.n);
    const auto null = DfNullDistribution::cached(cfg.t_len);

    parallel_for(cfg.n, cfg.threads, [&](std::size_t i) {
        const std::uint64_t seed = cfg.base_seed + i;
        Score& s = scores[i];
        s.truth = i < cfg.n / 2;
        SimSpec spec;
        spec.t_len = cfg.t_len;
        spec.alpha = cfg.alpha;
        spec.beta = cfg.beta;
        spec.sigma2 = cfg.sigma2;
        spec.phi = s.truth ? cointegrated_phi(seed) : 1.0;
        spec.seed = seed;
        const SeriesPair pair = simulate(spec);
        try {
            s.log_bf = bayes_test(pair, cfg.em).log_bayes_factor;
            s.bayes_ok = true;
        } catch (const Error&) {
        }
        try {
            s.tau = df_tau(compute_residuals(pair, ols_fit(pair).params()));
            s.classical_ok = true;
        } catch (const Error&) {
        }
    });

    RocReport report;
    report.config = cfg;
    report.config.log_thresholds = log_thresholds;
    report.config.significance_levels = levels;
    std::vector<double> bayes_pos, bayes_neg, df_pos, df_neg;
    for (const auto& s : scores) {
        (s.truth ? report.n_pos : report.n_neg)++;
        report.failures += !s.bayes_ok + !s.classical_ok;
        const double bayes_score = s.bayes_ok ? -s.log_bf : -kInf;
        const double df_score = s.classical_ok ? -s.tau : -kInf;
        (s.truth ? bayes_pos : bayes_neg).push_back(bayes_score);
        (s.truth ? df_pos : df_neg).push_back(df_score);
    }

    auto curve = [&](const char* method, const std::vector<double>& thresholds, auto declared) {
        RocCurve c;
        c.method = method;
        for (double th : thresholds) {
            Confusion conf;
            for (const auto& s : scores) conf.add(s.truth, declared(s, th));
            c.points.push_back(RocPoint{th, 1.0 - conf.fn_rate(), conf.fp_rate()});
        }
        return c;
    };
    report.bayes = curve("bayes", log_thresholds, [](const Score& s, double log_c) {
        return s.bayes_ok && s.log_bf < log_c;
    });
    report.classical = curve("classical", levels, [&](const Score& s, double level) {
        return s.classical_ok && s.tau < null->critical_value(level);
    });
    report.bayes.auc = rank_auc(bayes_pos, bayes_neg);
    report.classical.auc = rank_auc(df_pos, df_neg);
    return report;
}

void SegmentRecoveryConfig::validate() const {
    SegmentedSimSpec probe{segments, alpha, beta, sigma2, 0};
    probe.validate();
    switching.validate();
    em.validate();
    if (n == 0) throw InputError("segment recovery needs n >= 1");
}

SegmentRecoveryReport run_segment_recovery(const SegmentRecoveryConfig& cfg) {
    cfg.validate();
    SegmentRecoveryReport report;
    report.config = cfg;
    report.runs.resize(cfg.n);

    parallel_for(cfg.n, cfg.threads, [&](std::size_t i) {
        SegmentRun& run = report.runs[i];
        run.seed = cfg.base_seed + i;
        const SegmentedSeries sim = simulate_segmented(
            SegmentedSimSpec{cfg.segments, cfg.alpha, cfg.beta, cfg.sigma2, run.seed});
        try {
            const RegressionParams init = ols_fit(sim.pair).params();
            const SwitchEmResult em = switch_em(sim.pair, init, cfg.switching, cfg.em);
            const std::vector<int> found = map_regimes(em.smoothed);
            run.em_iterations = em.trace.loglik_history.size();

            std::size_t correct = 0, coint = 0;
            for (std::size_t k = 0; k < found.size(); ++k) {
                correct += found[k] == sim.regimes[k];
                coint += found[k] == 0;
            }
            run.accuracy = static_cast<double>(correct) / static_cast<double>(found.size());
            run.coint_fraction = static_cast<double>(coint) / static_cast<double>(found.size());

            const auto detected = regime_boundaries(found);
            run.within_tolerance = true;
            for (std::size_t b : sim.boundaries) {
                double best = static_cast<double>(sim.pair.size());
                for (std::size_t d : detected) {
                    best = std::min(best, std::abs(static_cast<double>(d) - static_cast<double>(b)));
                }
                run.boundary_errors.push_back(best);
                run.within_tolerance =
                    run.within_tolerance && best <= static_cast<double>(cfg.tolerance);
            }
        } catch (const Error&) {
            run.failed = true;
        }
    });

    std::size_t ok = 0, n_boundaries = 0, within = 0;
    double acc = 0.0, frac = 0.0, err = 0.0;
    for (const auto& run : report.runs) {
        if (run.failed) {
            ++report.failures;
            continue;
        }
        ++ok;
        acc += run.accuracy;
        frac += run.coint_fraction;
        within += run.within_tolerance;
        for (double e : run.boundary_errors) {
            err += e;
            ++n_boundaries;
        }
    }
    if (ok > 0) {
        report.mean_accuracy = acc / static_cast<double>(ok);
        report.mean_coint_fraction = frac / static_cast<double>(ok);
        report.frac_within_tolerance = static_cast<double>(within) / static_cast<double>(ok);
    }
    if (n_boundaries > 0) report.mean_boundary_error = err / static_cast<double>(n_boundaries);
    return report;
}

}  // namespace bcoint
