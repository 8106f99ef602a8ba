#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcoint/coint_test.hpp"
#include "bcoint/experiments.hpp"
#include "bcoint/switching.hpp"

#include <json.hpp>

namespace bcoint {

inline constexpr int kSchemaVersion = 1;

// Comma-separated table with a mandatory header naming columns x and y; an
// optional column t is carried through as text.
struct InputTable {
    std::vector<double> x;
    std::vector<double> y;
    std::optional<std::vector<std::string>> t;
    std::size_t dropped_rows = 0;
};

// Throws InputError on a missing header or columns, on malformed rows (unless
// skip_bad), and when fewer than 3 rows remain.
InputTable read_input_table(std::istream& in, bool skip_bad = false);
InputTable read_input_table_file(const std::string& path, bool skip_bad = false);

// Writes t,x,y with t the 0-based index and 17 significant digits.
void write_series_csv(std::ostream& out, const SeriesPair& pair);

nlohmann::json to_json(const RegressionParams& p);
nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const DfResult& r);

// Numbers, with "inf"/"-inf"/"nan" strings for non-finite values.
nlohmann::json json_number(double v);

// CSV columns: method,t_len,fp_rate,fn_rate,n_true_neg,n_true_pos
void write_rates_csv(std::ostream& out, const RatesReport& report);
nlohmann::json to_json(const RatesReport& report);

// CSV columns: kind,method,threshold,fpr,tpr,auc. kind is "point" for curve
// points and "summary" for the per-method AUC row.
void write_roc_csv(std::ostream& out, const RocReport& report);
nlohmann::json to_json(const RocReport& report);

// CSV columns: seed,failed,accuracy,coint_fraction,mean_boundary_error,within_tolerance,em_iterations
void write_segments_csv(std::ostream& out, const SegmentRecoveryReport& report);
nlohmann::json to_json(const SegmentRecoveryReport& report);

struct SegmentationRow {
    std::string t;  // echoed time label, or the 0-based index
    double filtered_rw_prob = 0.0;
    double smoothed_rw_prob = 0.0;
    int regime = 0;
    double phi_hat = 0.0;
};

// CSV columns: t,filtered_rw_prob,smoothed_rw_prob,regime,phi_hat
void write_segmentation_csv(std::ostream& out, const std::vector<SegmentationRow>& rows);

}  // namespace bcoint
