#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bcoint/coint_test.hpp"
#include "bcoint/em.hpp"
#include "bcoint/errors.hpp"
#include "bcoint/experiments.hpp"
#include "bcoint/format.hpp"
#include "bcoint/io.hpp"
#include "bcoint/switching.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// Sample sizes selected by --paper-scale.
constexpr std::size_t kPaperRatesN = 5000;
constexpr std::size_t kPaperRocN = 10000;

struct EmFlags {
    int max_iters = bcoint::EmConfig{}.max_iters;
    double rel_tol = bcoint::EmConfig{}.rel_tol;

    void add(CLI::App* cmd) {
        cmd->add_option("--max-iters", max_iters, "EM iteration cap")->capture_default_str();
        cmd->add_option("--rel-tol", rel_tol, "EM relative log-likelihood tolerance")
            ->capture_default_str();
    }
    bcoint::EmConfig config() const {
        bcoint::EmConfig c{max_iters, rel_tol};
        c.validate();
        return c;
    }
};

void print_json(const nlohmann::json& doc) { std::cout << doc.dump(2) << '\n'; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bcoint::InputError("cannot open output file: " + path);
    return out;
}

bcoint::SeriesPair load_pair(const std::string& path, bool skip_bad,
                             std::optional<std::vector<std::string>>* labels = nullptr) {
    bcoint::InputTable table = bcoint::read_input_table_file(path, skip_bad);
    if (table.dropped_rows > 0) {
        std::cerr << "bcoint: dropped " << table.dropped_rows << " malformed row(s)\n";
    }
    if (labels) *labels = table.t;
    return bcoint::SeriesPair(std::move(table.x), std::move(table.y));
}

int run_test(const std::string& path, bool skip_bad, double log_c, const EmFlags& em,
             bool classical, double significance) {
    const bcoint::SeriesPair pair = load_pair(path, skip_bad);
    const bcoint::TestResult result = bcoint::bayes_test(pair, em.config(), log_c);
    nlohmann::json doc = bcoint::to_json(result);
    doc["schema_version"] = bcoint::kSchemaVersion;
    doc["command"] = "test";
    doc["t_len"] = pair.size();
    if (classical) doc["classical"] = bcoint::to_json(bcoint::classical_test(pair, significance));
    print_json(doc);
    return 0;
}

int run_segment(const std::string& path, bool skip_bad, const bcoint::SwitchConfig& cfg,
                const EmFlags& em, const std::string& out_path) {
    std::optional<std::vector<std::string>> labels;
    const bcoint::SeriesPair pair = load_pair(path, skip_bad, &labels);
    cfg.validate();
    const bcoint::RegressionParams init = bcoint::ols_fit(pair).params();
    const bcoint::SwitchEmResult fit = bcoint::switch_em(pair, init, cfg, em.config());
    const bcoint::Residuals eps = bcoint::compute_residuals(pair, fit.params);
    const std::vector<int> regimes = bcoint::map_regimes(fit.smoothed);
    const bcoint::PhiEstimates phi = bcoint::map_phi(eps, fit.params.sigma2, regimes);

    std::vector<bcoint::SegmentationRow> rows;
    rows.reserve(regimes.size());
    for (std::size_t k = 0; k < regimes.size(); ++k) {
        const std::size_t t = k + 1;
        rows.push_back({labels ? (*labels)[t] : std::to_string(t), fit.filtered.slices[k].rw_prob,
                        fit.smoothed.slices[k].rw_prob, regimes[k], phi.phi[k]});
    }

    nlohmann::json doc{{"schema_version", bcoint::kSchemaVersion},
                       {"command", "segment"},
                       {"t_len", pair.size()},
                       {"params", bcoint::to_json(fit.params)},
                       {"log_likelihood", bcoint::json_number(fit.log_lik)},
                       {"reset_width", bcoint::json_number(fit.width)},
                       {"switching", {{"p_init_rw", cfg.p_init_rw},
                                      {"p_rw_to_rw", cfg.p_rw_to_rw},
                                      {"p_c_to_c", cfg.p_c_to_c}}},
                       {"em", {{"iterations", fit.trace.loglik_history.size()},
                               {"converged", fit.trace.converged}}}};
    if (out_path.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            arr.push_back({{"t", r.t},
                           {"filtered_rw_prob", bcoint::json_number(r.filtered_rw_prob)},
                           {"smoothed_rw_prob", bcoint::json_number(r.smoothed_rw_prob)},
                           {"regime", r.regime},
                           {"phi_hat", bcoint::json_number(r.phi_hat)}});
        }
        doc["rows"] = arr;
    } else {
        std::ofstream out = open_out(out_path);
        bcoint::write_segmentation_csv(out, rows);
        doc["rows_csv"] = out_path;
    }
    print_json(doc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian cointegration testing and segmentation"};
    app.require_subcommand(1);

    // test
    std::string test_input;
    bool skip_bad = false;
    double log_c = bcoint::kDefaultLogThreshold;
    double significance = bcoint::kDefaultSignificance;
    bool classical = false;
    EmFlags test_em;
    CLI::App* test = app.add_subcommand("test", "Bayes-factor cointegration test on a CSV with columns x,y");
    test->add_option("input", test_input, "CSV file")->required();
    test->add_option("--threshold-log-c", log_c, "declare cointegration when log l_RW - log l_C < this")
        ->capture_default_str();
    test->add_flag("--classical", classical, "also run the OLS / Dickey-Fuller baseline");
    test->add_option("--significance", significance, "Dickey-Fuller significance level")
        ->capture_default_str();
    test->add_flag("--skip-bad", skip_bad, "drop malformed rows instead of failing");
    test_em.add(test);

    // segment
    std::string seg_input, seg_out;
    bcoint::SwitchConfig sw;
    double reset_width = 0.0;
    bool seg_skip_bad = false;
    EmFlags seg_em;
    CLI::App* segment = app.add_subcommand("segment", "Switching-model segmentation of a CSV with columns x,y");
    segment->add_option("input", seg_input, "CSV file")->required();
    segment->add_option("--p-init-rw", sw.p_init_rw, "p(first step is random walk)")->required();
    segment->add_option("--p-rw-to-rw", sw.p_rw_to_rw, "p(random walk stays random walk)")->required();
    segment->add_option("--p-c-to-c", sw.p_c_to_c, "p(cointegrated stays cointegrated)")->required();
    CLI::Option* width_opt =
        segment->add_option("--reset-width", reset_width, "uniform reset density width (default: residual range)");
    segment->add_option("--out", seg_out, "write per-time rows as CSV here instead of into the JSON");
    segment->add_flag("--skip-bad", seg_skip_bad, "drop malformed rows instead of failing");
    seg_em.add(segment);

    // simulate
    bcoint::SimSpec sim;
    sim.seed = 1;
    std::string sim_out;
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate a series pair and write x,y CSV");
    simulate->add_option("--phi", sim.phi, "AR(1) coefficient of the residual (1 = random walk)")
        ->capture_default_str();
    simulate->add_option("--t", sim.t_len, "length")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    simulate->add_option("--alpha", sim.alpha)->capture_default_str();
    simulate->add_option("--beta", sim.beta)->capture_default_str();
    simulate->add_option("--sigma2", sim.sigma2)->capture_default_str();
    simulate->add_option("--out", sim_out, "output CSV (default: standard output)");

    // experiment
    CLI::App* experiment = app.add_subcommand("experiment", "Monte Carlo comparison experiments");
    experiment->require_subcommand(1);
    std::uint64_t exp_seed = 1;
    std::optional<std::size_t> exp_n;
    unsigned exp_threads = 0;
    bool paper_scale = false;
    bool desk = false;
    std::string exp_out;
    EmFlags exp_em;
    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", exp_seed, "base seed; series k uses seed + k")->capture_default_str();
        cmd->add_option("--n", exp_n, "number of series (per length for rates)");
        cmd->add_option("--threads", exp_threads, "worker threads (0: BCOINT_THREADS or all cores)");
        cmd->add_flag("--desk", desk, "desk-scale sample sizes (default)");
        cmd->add_flag("--paper-scale", paper_scale, "paper-scale sample sizes");
        cmd->add_option("--out", exp_out, "write the CSV report here");
        exp_em.add(cmd);
    };
    CLI::App* rates = experiment->add_subcommand("rates", "False positive / negative rates by length");
    common(rates);
    rates->add_option("--threshold-log-c", log_c)->capture_default_str();
    rates->add_option("--significance", significance)->capture_default_str();
    CLI::App* roc = experiment->add_subcommand("roc", "ROC curves and AUC at T = 100");
    common(roc);
    CLI::App* segs = experiment->add_subcommand("segments", "Three-segment recovery study");
    common(segs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (desk && paper_scale) throw bcoint::InputError("--desk and --paper-scale are exclusive");
        if (*test) return run_test(test_input, skip_bad, log_c, test_em, classical, significance);
        if (*segment) {
            if (*width_opt) sw.reset_width = reset_width;
            return run_segment(seg_input, seg_skip_bad, sw, seg_em, seg_out);
        }
        if (*simulate) {
            const bcoint::SeriesPair pair = bcoint::simulate(sim);
            if (sim_out.empty()) {
                bcoint::write_series_csv(std::cout, pair);
            } else {
                std::ofstream out = open_out(sim_out);
                bcoint::write_series_csv(out, pair);
            }
            return 0;
        }
        if (*rates) {
            bcoint::RatesConfig cfg;
            cfg.n_per_length = exp_n.value_or(paper_scale ? kPaperRatesN : cfg.n_per_length);
            cfg.base_seed = exp_seed;
            cfg.threshold_log_c = log_c;
            cfg.significance = significance;
            cfg.em = exp_em.config();
            cfg.threads = exp_threads;
            const bcoint::RatesReport report = bcoint::run_rates(cfg);
            if (!exp_out.empty()) {
                std::ofstream out = open_out(exp_out);
                bcoint::write_rates_csv(out, report);
            }
            print_json(bcoint::to_json(report));
            return 0;
        }
        if (*roc) {
            bcoint::RocConfig cfg;
            cfg.n = exp_n.value_or(paper_scale ? kPaperRocN : cfg.n);
            cfg.base_seed = exp_seed;
            cfg.em = exp_em.config();
            cfg.threads = exp_threads;
            const bcoint::RocReport report = bcoint::run_roc(cfg);
            if (!exp_out.empty()) {
                std::ofstream out = open_out(exp_out);
                bcoint::write_roc_csv(out, report);
            }
            print_json(bcoint::to_json(report));
            return 0;
        }
        if (*segs) {
            bcoint::SegmentRecoveryConfig cfg;
            if (exp_n) cfg.n = *exp_n;
            cfg.base_seed = exp_seed;
            if (exp_em.max_iters != bcoint::EmConfig{}.max_iters ||
                exp_em.rel_tol != bcoint::EmConfig{}.rel_tol) {
                cfg.em = exp_em.config();
            }
            cfg.threads = exp_threads;
            const bcoint::SegmentRecoveryReport report = bcoint::run_segment_recovery(cfg);
            if (!exp_out.empty()) {
                std::ofstream out = open_out(exp_out);
                bcoint::write_segments_csv(out, report);
            }
            print_json(bcoint::to_json(report));
            return 0;
        }
    } catch (const bcoint::InputError& e) {
        std::cerr << "bcoint: input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const bcoint::NumericalError& e) {
        std::cerr << "bcoint: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "bcoint: error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInput;
}
