#include "bcoint/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcoint/errors.hpp"

namespace bcoint {

SeriesPair::SeriesPair(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) {
        throw InputError("series length mismatch: x has " + std::to_string(x_.size()) +
                         " points, y has " + std::to_string(y_.size()));
    }
    if (x_.size() < kMinLength) {
        throw InputError("series too short: T = " + std::to_string(x_.size()) +
                         ", need T >= 3");
    }
    for (std::size_t t = 0; t < x_.size(); ++t) {
        if (!std::isfinite(x_[t]) || !std::isfinite(y_[t])) {
            throw InputError("non-finite observation at index " + std::to_string(t));
        }
    }
}

void RegressionParams::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw InputError("regression coefficients must be finite");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw InputError("sigma2 must be finite and positive");
    }
}

Residuals compute_residuals(const SeriesPair& pair, const RegressionParams& params) {
    const auto x = pair.x();
    const auto y = pair.y();
    Residuals eps(pair.size());
    for (std::size_t t = 0; t < eps.size(); ++t) {
        eps[t] = y[t] - params.alpha - params.beta * x[t];
    }
    return eps;
}

RegressionParams OlsFit::params() const {
    if (zero_residuals) {
        throw DegenerateError("OLS residuals are identically zero; sigma2 would be 0");
    }
    return RegressionParams{alpha, beta, sigma2};
}

OlsFit ols_fit(const SeriesPair& pair) {
    const auto x = pair.x();
    const auto y = pair.y();
    const double n = static_cast<double>(pair.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < pair.size(); ++t) {
        mx += x[t];
        my += y[t];
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < pair.size(); ++t) {
        const double dx = x[t] - mx;
        sxx += dx * dx;
        sxy += dx * (y[t] - my);
    }
    if (!(sxx > 0.0)) {
        throw DegenerateError("regressor x has zero variance");
    }

    OlsFit fit;
    fit.beta = sxy / sxx;
    fit.alpha = my - fit.beta * mx;

    double ss = 0.0;
    bool all_zero = true;
    for (std::size_t t = 0; t < pair.size(); ++t) {
        const double e = y[t] - fit.alpha - fit.beta * x[t];
        ss += e * e;
        all_zero = all_zero && e == 0.0;
    }
    fit.sigma2 = ss / n;
    fit.zero_residuals = all_zero || !(fit.sigma2 > 0.0);
    return fit;
}

double default_width(std::span<const double> eps) {
    if (eps.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
    const double range = *hi - *lo;
    return range > 0.0 ? range : 1.0;
}

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double ar1_loglik(std::span<const double> eps, double phi, double sigma2, EpsInit init,
                  std::optional<double> width) {
    if (eps.size() < 2) throw InputError("ar1_loglik needs at least two residuals");
    if (!(sigma2 > 0.0)) throw InputError("sigma2 must be positive");
    if (!(std::abs(phi) <= 1.0)) throw InputError("phi must satisfy |phi| <= 1");

    double first = 0.0;
    if (init == EpsInit::Stationary) {
        if (!(std::abs(phi) < 1.0)) {
            throw InputError("stationary initialisation requires |phi| < 1");
        }
        first = log_normal_pdf(eps[0], 0.0, sigma2 / (1.0 - phi * phi));
    } else {
        const double w = width.value_or(default_width(eps));
        if (!(w > 0.0)) throw InputError("uniform width must be positive");
        first = -std::log(w);
    }

    double ss = 0.0;
    for (std::size_t t = 1; t < eps.size(); ++t) {
        const double d = eps[t] - phi * eps[t - 1];
        ss += d * d;
    }
    const double n = static_cast<double>(eps.size() - 1);
    return first - 0.5 * ss / sigma2 - 0.5 * n * (kLog2Pi + std::log(sigma2));
}

}  // namespace bcoint
