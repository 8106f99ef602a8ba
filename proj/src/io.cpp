#include "bcoint/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "bcoint/errors.hpp"
#include "bcoint/format.hpp"

namespace bcoint {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\"");
    const auto e = s.find_last_not_of(" \t\"");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

}  // namespace

InputTable read_input_table(std::istream& in, bool skip_bad) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("input CSV is empty (a header row is required)");
    const auto header = split_fields(line);
    int col_x = -1, col_y = -1, col_t = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = trim(header[i]);
        if (name == "x") col_x = static_cast<int>(i);
        if (name == "y") col_y = static_cast<int>(i);
        if (name == "t") col_t = static_cast<int>(i);
    }
    if (col_x < 0 || col_y < 0) throw InputError("input CSV header must name columns x and y");

    InputTable table;
    if (col_t >= 0) table.t.emplace();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        double x = 0.0, y = 0.0;
        const bool ok = fields.size() == header.size() && parse_double(fields[col_x], x) &&
                        parse_double(fields[col_y], y);
        if (!ok) {
            if (!skip_bad) {
                throw InputError("malformed row at line " + std::to_string(line_no) +
                                 " (use --skip-bad to drop such rows)");
            }
            ++table.dropped_rows;
            continue;
        }
        table.x.push_back(x);
        table.y.push_back(y);
        if (table.t) table.t->push_back(trim(fields[col_t]));
    }
    if (table.x.size() < SeriesPair::kMinLength) {
        throw InputError("input has " + std::to_string(table.x.size()) +
                         " usable rows; need T >= 3");
    }
    return table;
}

InputTable read_input_table_file(const std::string& path, bool skip_bad) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path);
    return read_input_table(in, skip_bad);
}

void write_series_csv(std::ostream& out, const SeriesPair& pair) {
    out << "t,x,y\n";
    for (std::size_t t = 0; t < pair.size(); ++t) {
        out << t << ',' << format_double(pair.x()[t]) << ',' << format_double(pair.y()[t]) << '\n';
    }
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

nlohmann::json to_json(const RegressionParams& p) {
    return {{"alpha", json_number(p.alpha)},
            {"beta", json_number(p.beta)},
            {"sigma2", json_number(p.sigma2)}};
}

nlohmann::json to_json(const TestResult& r) {
    return {
        {"log_l_rw", json_number(r.log_l_rw)},
        {"log_l_c", json_number(r.log_l_c)},
        {"log_bayes_factor", json_number(r.log_bayes_factor)},
        {"threshold_log_c", json_number(r.threshold_log_c)},
        {"cointegrated", r.cointegrated},
        {"fitted", to_json(r.fitted)},
        {"rw_sigma2", json_number(r.rw_sigma2)},
        {"width", json_number(r.width)},
        {"phi_moments", {{"mean", json_number(r.phi_moments.m1)},
                         {"second_moment", json_number(r.phi_moments.m2)}}},
        {"phi_posterior", {{"f", json_number(r.phi_posterior.f)},
                           {"F", json_number(r.phi_posterior.F)},
                           {"prefactor", r.phi_posterior.prefactor == Prefactor::Semicircle
                                             ? "semicircle"
                                             : "none"}}},
        {"em", {{"iterations", r.trace.loglik_history.size()},
                {"converged", r.trace.converged}}},
    };
}

nlohmann::json to_json(const DfResult& r) {
    return {{"tau", json_number(r.tau)},
            {"critical_value", json_number(r.critical_value)},
            {"significance", json_number(r.significance)},
            {"reject_unit_root", r.reject_unit_root},
            {"cointegrated", r.reject_unit_root}};
}

void write_rates_csv(std::ostream& out, const RatesReport& report) {
    out << "method,t_len,fp_rate,fn_rate,n_true_neg,n_true_pos\n";
    for (const auto& r : report.rows) {
        out << r.method << ',' << r.t_len << ',' << format_double(r.fp_rate) << ','
            << format_double(r.fn_rate) << ',' << r.n_true_neg << ',' << r.n_true_pos << '\n';
    }
}

nlohmann::json to_json(const RatesReport& report) {
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& r : report.rows) {
        methods[r.method][std::to_string(r.t_len)] = {
            {"fp_rate", json_number(r.fp_rate)}, {"fn_rate", json_number(r.fn_rate)},
            {"n_true_neg", r.n_true_neg},        {"n_true_pos", r.n_true_pos},
            {"fp", r.fp},                        {"fn", r.fn},
            {"failures", r.failures}};
    }
    const auto& c = report.config;
    return {{"schema_version", kSchemaVersion},
            {"experiment", "rates"},
            {"config", {{"lengths", c.lengths},
                        {"n_per_length", c.n_per_length},
                        {"base_seed", c.base_seed},
                        {"threshold_log_c", json_number(c.threshold_log_c)},
                        {"significance", json_number(c.significance)},
                        {"alpha", json_number(c.alpha)},
                        {"beta", json_number(c.beta)},
                        {"sigma2", json_number(c.sigma2)},
                        {"max_iters", c.em.max_iters},
                        {"rel_tol", json_number(c.em.rel_tol)}}},
            {"methods", methods}};
}

void write_roc_csv(std::ostream& out, const RocReport& report) {
    out << "kind,method,threshold,fpr,tpr,auc\n";
    for (const RocCurve* c : {&report.bayes, &report.classical}) {
        for (const auto& p : c->points) {
            out << "point," << c->method << ',' << format_double(p.threshold) << ','
                << format_double(p.fpr) << ',' << format_double(p.tpr) << ",\n";
        }
    }
    for (const RocCurve* c : {&report.bayes, &report.classical}) {
        out << "summary," << c->method << ",,,," << format_double(c->auc) << '\n';
    }
}

nlohmann::json to_json(const RocReport& report) {
    auto curve = [](const RocCurve& c) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : c.points) {
            pts.push_back({{"threshold", json_number(p.threshold)},
                           {"fpr", json_number(p.fpr)},
                           {"tpr", json_number(p.tpr)}});
        }
        return nlohmann::json{{"auc", json_number(c.auc)}, {"points", pts}};
    };
    const auto& c = report.config;
    return {{"schema_version", kSchemaVersion},
            {"experiment", "roc"},
            {"config", {{"t_len", c.t_len},
                        {"n", c.n},
                        {"base_seed", c.base_seed},
                        {"max_iters", c.em.max_iters},
                        {"rel_tol", json_number(c.em.rel_tol)}}},
            {"n_pos", report.n_pos},
            {"n_neg", report.n_neg},
            {"failures", report.failures},
            {"methods", {{"bayes", curve(report.bayes)}, {"classical", curve(report.classical)}}}};
}

void write_segments_csv(std::ostream& out, const SegmentRecoveryReport& report) {
    out << "seed,failed,accuracy,coint_fraction,mean_boundary_error,within_tolerance,em_iterations\n";
    for (const auto& r : report.runs) {
        double mean_err = 0.0;
        for (double e : r.boundary_errors) mean_err += e;
        if (!r.boundary_errors.empty()) mean_err /= static_cast<double>(r.boundary_errors.size());
        out << r.seed << ',' << (r.failed ? 1 : 0) << ',' << format_double(r.accuracy) << ','
            << format_double(r.coint_fraction) << ',' << format_double(mean_err) << ','
            << (r.within_tolerance ? 1 : 0) << ',' << r.em_iterations << '\n';
    }
}

nlohmann::json to_json(const SegmentRecoveryReport& report) {
    const auto& c = report.config;
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& s : c.segments) {
        segments.push_back({{"length", s.length}, {"phi", json_number(s.phi)}});
    }
    return {{"schema_version", kSchemaVersion},
            {"experiment", "segments"},
            {"config", {{"segments", segments},
                        {"n", c.n},
                        {"base_seed", c.base_seed},
                        {"p_init_rw", json_number(c.switching.p_init_rw)},
                        {"p_rw_to_rw", json_number(c.switching.p_rw_to_rw)},
                        {"p_c_to_c", json_number(c.switching.p_c_to_c)},
                        {"tolerance", c.tolerance},
                        {"max_iters", c.em.max_iters},
                        {"rel_tol", json_number(c.em.rel_tol)}}},
            {"failures", report.failures},
            {"mean_accuracy", json_number(report.mean_accuracy)},
            {"mean_coint_fraction", json_number(report.mean_coint_fraction)},
            {"mean_boundary_error", json_number(report.mean_boundary_error)},
            {"frac_within_tolerance", json_number(report.frac_within_tolerance)}};
}

void write_segmentation_csv(std::ostream& out, const std::vector<SegmentationRow>& rows) {
    out << "t,filtered_rw_prob,smoothed_rw_prob,regime,phi_hat\n";
    for (const auto& r : rows) {
        out << r.t << ',' << format_double(r.filtered_rw_prob) << ','
            << format_double(r.smoothed_rw_prob) << ',' << r.regime << ','
            << format_double(r.phi_hat) << '\n';
    }
}

}  // namespace bcoint
