#include "bcoint/em.hpp"

#include <cmath>
#include <string>

#include "bcoint/errors.hpp"

namespace bcoint {

void EmConfig::validate() const {
    if (max_iters < 1) throw InputError("max_iters must be at least 1");
    if (!(rel_tol > 0.0)) throw InputError("rel_tol must be positive");
}

Ar1EnergyWeights Ar1EnergyWeights::from_moments(std::size_t length, const PhiMoments& mom,
                                                EpsInit init) {
    Ar1EnergyWeights w;
    w.a.assign(length, 1.0);
    w.b.assign(length, mom.m1);
    w.c.assign(length, mom.m2);
    w.b[0] = w.c[0] = 0.0;
    if (init == EpsInit::Stationary) {
        w.a[0] = 1.0 - mom.m2;
        w.gaussian_terms = static_cast<double>(length);
    } else {
        w.a[0] = 0.0;
        w.gaussian_terms = static_cast<double>(length - 1);
    }
    return w;
}

double weighted_quadratic(std::span<const double> eps, const Ar1EnergyWeights& w) {
    double q = w.a[0] * eps[0] * eps[0];
    for (std::size_t t = 1; t < eps.size(); ++t) {
        q += w.a[t] * eps[t] * eps[t] - 2.0 * w.b[t] * eps[t] * eps[t - 1] +
             w.c[t] * eps[t - 1] * eps[t - 1];
    }
    return q;
}

double weighted_energy(std::span<const double> eps, double sigma2, const Ar1EnergyWeights& w) {
    return -0.5 * weighted_quadratic(eps, w) / sigma2 -
           0.5 * w.gaussian_terms * (kLog2Pi + std::log(sigma2));
}

RegressionParams solve_weighted_regression(const SeriesPair& pair, const Ar1EnergyWeights& w,
                                           double current_alpha) {
    const auto x = pair.x();
    const auto y = pair.y();

    // Normal equations H [alpha, beta]^T = g, with eps_t = y_t - z_t . theta and
    // z_t = (1, x_t).
    double h00 = w.a[0], h01 = w.a[0] * x[0], h11 = w.a[0] * x[0] * x[0];
    double g0 = w.a[0] * y[0], g1 = w.a[0] * y[0] * x[0];
    double total = w.a[0];
    for (std::size_t t = 1; t < pair.size(); ++t) {
        const double a = w.a[t], b = w.b[t], c = w.c[t];
        const double xt = x[t], xs = x[t - 1];
        total += a;
        h00 += a - 2.0 * b + c;
        h01 += a * xt - b * (xt + xs) + c * xs;
        h11 += a * xt * xt - 2.0 * b * xt * xs + c * xs * xs;
        g0 += a * y[t] - b * (y[t] + y[t - 1]) + c * y[t - 1];
        g1 += a * y[t] * xt - b * (y[t] * xs + y[t - 1] * xt) + c * y[t - 1] * xs;
    }
    RegressionParams out;
    // Pure random-walk weights difference alpha away; the energy is then flat
    // in alpha, so it is held and only beta is solved for.
    if (h00 <= 1e-10 * total) {
        if (!(h11 > 0.0) || !std::isfinite(h11)) {
            throw DegenerateError("regression system is singular (is x constant?)");
        }
        out.alpha = current_alpha;
        out.beta = (g1 - h01 * current_alpha) / h11;
    } else {
        const double det = h00 * h11 - h01 * h01;
        if (!(std::abs(det) > 1e-12 * std::abs(h00 * h11)) || !std::isfinite(det)) {
            throw DegenerateError("regression system is singular (is x constant?)");
        }
        out.alpha = (h11 * g0 - h01 * g1) / det;
        out.beta = (h00 * g1 - h01 * g0) / det;
    }
    const Residuals eps = compute_residuals(pair, RegressionParams{out.alpha, out.beta, 1.0});
    out.sigma2 = weighted_quadratic(eps, w) / w.gaussian_terms;
    if (!(out.sigma2 > 0.0)) {
        throw DegenerateError("variance update collapsed to zero");
    }
    return out;
}

double expected_energy(const SeriesPair& pair, const RegressionParams& params,
                       const PhiMoments& mom, EpsInit init) {
    const Residuals eps = compute_residuals(pair, params);
    return weighted_energy(eps, params.sigma2,
                           Ar1EnergyWeights::from_moments(pair.size(), mom, init));
}

RegressionParams m_step(const SeriesPair& pair, const PhiMoments& mom, EpsInit init,
                        double current_alpha) {
    return solve_weighted_regression(pair, Ar1EnergyWeights::from_moments(pair.size(), mom, init),
                                     current_alpha);
}

bool relative_change_below(double previous, double current, double rel_tol) {
    return std::abs(current - previous) <= rel_tol * std::abs(current);
}

EmResult em_fit(const SeriesPair& pair, const RegressionParams& init, const EmConfig& cfg,
                EpsInit eps_init, std::optional<double> width) {
    cfg.validate();
    init.validate();

    EmResult out;
    if (eps_init == EpsInit::UniformImproper) {
        out.width = width.value_or(default_width(compute_residuals(pair, init)));
        if (!(out.width > 0.0)) throw InputError("uniform width must be positive");
    }

    RegressionParams params = init;
    for (int iter = 1;; ++iter) {
        const Residuals eps = compute_residuals(pair, params);
        const CointInference inf = coint_inference(eps, params.sigma2, eps_init, out.width);

        const bool converged = !out.trace.loglik_history.empty() &&
                               relative_change_below(out.trace.loglik_history.back(),
                                                     inf.log_lik, cfg.rel_tol);
        out.trace.loglik_history.push_back(inf.log_lik);
        out.trace.params_history.push_back(params);
        out.params = params;
        out.posterior = inf.posterior;
        out.moments = inf.moments;
        out.log_lik = inf.log_lik;
        if (converged) {
            out.trace.converged = true;
            break;
        }
        if (iter >= cfg.max_iters) break;
        params = m_step(pair, inf.moments, eps_init, params.alpha);
    }
    return out;
}

}  // namespace bcoint
