#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bcoint {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Aligned observation pair x_{1:T}, y_{1:T}. Construction validates length and
// finiteness; the object is immutable afterwards.
class SeriesPair {
public:
    static constexpr std::size_t kMinLength = 3;

    SeriesPair(std::vector<double> x, std::vector<double> y);

    std::span<const double> x() const { return x_; }
    std::span<const double> y() const { return y_; }
    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

struct RegressionParams {
    double alpha = 0.0;
    double beta = 0.0;
    double sigma2 = 1.0;

    // Throws InputError unless sigma2 is finite and positive.
    void validate() const;
};

// eps_t = y_t - alpha - beta * x_t
using Residuals = std::vector<double>;

// How the first residual is scored.
enum class EpsInit {
    Stationary,       // N(eps_1 | 0, sigma2 / (1 - phi^2))
    UniformImproper,  // constant density 1/W
};

Residuals compute_residuals(const SeriesPair& pair, const RegressionParams& params);

struct OlsFit {
    double alpha = 0.0;
    double beta = 0.0;
    double sigma2 = 0.0;  // mean squared residual over all T points
    // Every residual is exactly zero, so sigma2 == 0 cannot seed a likelihood.
    bool zero_residuals = false;

    // Throws DegenerateError when zero_residuals is set.
    RegressionParams params() const;
};

// Throws DegenerateError when x has zero variance.
OlsFit ols_fit(const SeriesPair& pair);

// Width of the improper-uniform density used for eps_1 (and segment starts):
// the observed range of eps, or 1 when the range is zero.
double default_width(std::span<const double> eps);

double log_normal_pdf(double x, double mean, double var);

// Conditional AR(1) log-likelihood of eps given phi and sigma2. `width` is only
// consulted for UniformImproper and defaults to default_width(eps).
double ar1_loglik(std::span<const double> eps, double phi, double sigma2, EpsInit init,
                  std::optional<double> width = std::nullopt);

}  // namespace bcoint
