#include "bcoint/phi_inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "bcoint/errors.hpp"
#include "bcoint/truncated_normal.hpp"

namespace bcoint {

namespace {

constexpr int kRulePoints = 16;
constexpr int kMaxNodes = 1 << 15;
// Region where the Gaussian factor is within exp(-750) of its maximum on [-1, 1].
constexpr double kTailExponent = 750.0;
constexpr double kLogPiOver4 = -0.24156447527049044469;

struct Rule {
    std::array<double, kRulePoints> nodes{};
    std::array<double, kRulePoints> weights{};
};

const Rule& gauss_legendre_rule() {
    static const Rule rule = [] {
        using Gauss = boost::math::quadrature::gauss<double, kRulePoints>;
        const auto& x = Gauss::abscissa();
        const auto& w = Gauss::weights();
        Rule r;
        const int half = kRulePoints / 2;
        for (int i = 0; i < half; ++i) {
            r.nodes[half - 1 - i] = -x[i];
            r.weights[half - 1 - i] = w[i];
            r.nodes[half + i] = x[i];
            r.weights[half + i] = w[i];
        }
        return r;
    }();
    return rule;
}

struct Level {
    double log_mass = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
};

Level evaluate_level(const PhiPosterior& post, double ua, double ub, int panels,
                     std::vector<double>& log_g, std::vector<double>& w, std::vector<double>& phi) {
    const Rule& rule = gauss_legendre_rule();
    const int n = panels * kRulePoints;
    log_g.resize(n);
    w.resize(n);
    phi.resize(n);

    const double cos_power = post.prefactor == Prefactor::Semicircle ? 2.0 : 1.0;
    const double log_norm = -0.5 * (kLog2Pi + std::log(post.F));
    const double width = (ub - ua) / panels;
    double shift = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < panels; ++p) {
        const double mid = ua + (p + 0.5) * width;
        for (int k = 0; k < kRulePoints; ++k) {
            const int i = p * kRulePoints + k;
            const double u = mid + 0.5 * width * rule.nodes[k];
            const double v = std::sin(u);
            const double d = v - post.f;
            phi[i] = v;
            w[i] = 0.5 * width * rule.weights[k];
            log_g[i] = log_norm - 0.5 * d * d / post.F + cos_power * std::log(std::cos(u));
            shift = std::max(shift, log_g[i]);
        }
    }

    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = w[i] * std::exp(log_g[i] - shift);
        s0 += g;
        s1 += g * phi[i];
        s2 += g * phi[i] * phi[i];
    }
    return Level{shift + std::log(s0), s1 / s0, s2 / s0};
}

void require_positive(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw InputError("sigma2 must be finite and positive");
    }
}

}  // namespace

void PhiPosterior::validate() const {
    if (!std::isfinite(f)) throw InputError("posterior mean parameter must be finite");
    if (!(F > 0.0) || !std::isfinite(F)) {
        throw InputError("posterior variance parameter must be finite and positive");
    }
}

PhiStats phi_stats(std::span<const double> eps) {
    PhiStats s;
    for (std::size_t t = 1; t < eps.size(); ++t) s.e12 += eps[t] * eps[t - 1];
    for (std::size_t t = 2; t < eps.size(); ++t) s.e1 += eps[t - 1] * eps[t - 1];
    return s;
}

PhiPosterior batch_posterior(std::span<const double> eps, double sigma2) {
    require_positive(sigma2);
    const PhiStats s = phi_stats(eps);
    if (!(s.e1 > 0.0)) {
        throw DegenerateError("interior residuals are all zero; phi posterior is undefined");
    }
    return PhiPosterior{s.e12 / s.e1, sigma2 / s.e1, Prefactor::Semicircle};
}

PhiPosterior uniform_batch_posterior(std::span<const double> eps, double sigma2) {
    require_positive(sigma2);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 1; t < eps.size(); ++t) {
        num += eps[t] * eps[t - 1];
        den += eps[t - 1] * eps[t - 1];
    }
    if (!(den > 0.0)) {
        throw DegenerateError("lagged residuals are all zero; phi posterior is undefined");
    }
    return PhiPosterior{num / den, sigma2 / den, Prefactor::None};
}

PhiPosterior sequential_filter(std::span<const double> eps, double sigma2) {
    require_positive(sigma2);
    std::size_t t = 1;
    while (t < eps.size() && eps[t - 1] == 0.0) ++t;
    if (t >= eps.size()) {
        throw DegenerateError("lagged residuals are all zero; phi posterior is undefined");
    }

    double f = eps[t] / eps[t - 1];
    double F = sigma2 / (eps[t - 1] * eps[t - 1]);
    for (++t; t < eps.size(); ++t) {
        const double lag = eps[t - 1];
        if (lag == 0.0) continue;
        const double denom = sigma2 + lag * lag * F;
        f = (f * sigma2 + eps[t] * lag * F) / denom;
        F = sigma2 * F / denom;
    }
    return PhiPosterior{f, F, Prefactor::None};
}

double log_unnormalized_density(const PhiPosterior& post, double phi) {
    if (!(phi > -1.0 && phi < 1.0)) return -std::numeric_limits<double>::infinity();
    double v = log_normal_pdf(phi, post.f, post.F);
    if (post.prefactor == Prefactor::Semicircle) v += 0.5 * std::log1p(-phi * phi);
    return v;
}

PhiIntegral integrate_posterior_quadrature(const PhiPosterior& post, double rel_tol) {
    post.validate();
    const double nearest = std::clamp(post.f, -1.0, 1.0);
    const double gap = post.f - nearest;
    const double reach = std::sqrt(gap * gap + 2.0 * post.F * kTailExponent);
    const double a = std::max(-1.0, post.f - reach);
    const double b = std::min(1.0, post.f + reach);
    const double ua = std::asin(a);
    const double ub = std::asin(b);

    std::vector<double> log_g, w, phi;
    int panels = 2;
    Level prev = evaluate_level(post, ua, ub, panels, log_g, w, phi);
    for (panels *= 2; panels * kRulePoints <= kMaxNodes; panels *= 2) {
        const Level cur = evaluate_level(post, ua, ub, panels, log_g, w, phi);
        const bool done = std::abs(cur.log_mass - prev.log_mass) < rel_tol &&
                          std::abs(cur.m1 - prev.m1) < rel_tol &&
                          std::abs(cur.m2 - prev.m2) < rel_tol;
        if (done) {
            return PhiIntegral{cur.log_mass, PhiMoments{cur.m1, cur.m2}, panels * kRulePoints};
        }
        prev = cur;
    }
    throw QuadratureError("phi quadrature did not reach tolerance at 2^15 nodes (f = " +
                          std::to_string(post.f) + ", F = " + std::to_string(post.F) + ")");
}

PhiIntegral integrate_posterior(const PhiPosterior& post) {
    if (post.prefactor == Prefactor::Semicircle) return integrate_posterior_quadrature(post);
    post.validate();
    const TruncatedNormalOnUnit tn = truncated_unit_moments(post.f, post.F);
    return PhiIntegral{tn.log_mass, PhiMoments{tn.m1, tn.m2}, 0};
}

PhiMoments posterior_moments(const PhiPosterior& post) {
    return integrate_posterior(post).moments;
}

CointInference coint_inference(std::span<const double> eps, double sigma2, EpsInit init,
                               std::optional<double> width) {
    require_positive(sigma2);
    if (eps.size() < SeriesPair::kMinLength) throw InputError("need T >= 3 residuals");
    const double n = static_cast<double>(eps.size());
    const double log_2pi_s2 = kLog2Pi + std::log(sigma2);

    CointInference out;
    if (init == EpsInit::Stationary) {
        const PhiStats s = phi_stats(eps);
        double sum_sq = 0.0;
        for (double e : eps) sum_sq += e * e;
        if (!(s.e1 > 0.0)) {
            // Only the sqrt(1 - phi^2) factor depends on phi: semicircle posterior.
            out.posterior = PhiPosterior{0.0, kFlatVariance, Prefactor::Semicircle};
            out.moments = PhiMoments{0.0, 0.25};
            out.log_lik = -0.5 * n * log_2pi_s2 - 0.5 * sum_sq / sigma2 + kLogPiOver4;
            return out;
        }
        out.posterior = PhiPosterior{s.e12 / s.e1, sigma2 / s.e1, Prefactor::Semicircle};
        const PhiIntegral integral = integrate_posterior(out.posterior);
        out.moments = integral.moments;
        out.log_lik = 0.5 * (1.0 - n) * log_2pi_s2 -
                      0.5 * (sum_sq - s.e12 * s.e12 / s.e1) / sigma2 - 0.5 * std::log(s.e1) +
                      std::log(0.5) + integral.log_mass;
        return out;
    }

    const double w = width.value_or(default_width(eps));
    if (!(w > 0.0)) throw InputError("uniform width must be positive");
    double num = 0.0, den = 0.0, sum_sq = 0.0;
    for (std::size_t t = 1; t < eps.size(); ++t) {
        num += eps[t] * eps[t - 1];
        den += eps[t - 1] * eps[t - 1];
        sum_sq += eps[t] * eps[t];
    }
    if (!(den > 0.0)) {
        out.posterior = PhiPosterior{0.0, kFlatVariance, Prefactor::None};
        out.moments = PhiMoments{0.0, 1.0 / 3.0};
        out.log_lik = -std::log(w) - 0.5 * (n - 1.0) * log_2pi_s2 - 0.5 * sum_sq / sigma2;
        return out;
    }
    out.posterior = PhiPosterior{num / den, sigma2 / den, Prefactor::None};
    const PhiIntegral integral = integrate_posterior(out.posterior);
    out.moments = integral.moments;
    out.log_lik = -std::log(w) - 0.5 * (n - 2.0) * log_2pi_s2 - 0.5 * std::log(den) -
                  0.5 * (sum_sq - num * num / den) / sigma2 + std::log(0.5) + integral.log_mass;
    return out;
}

double coint_marginal_loglik(std::span<const double> eps, double sigma2, EpsInit init,
                             std::optional<double> width) {
    return coint_inference(eps, sigma2, init, width).log_lik;
}

}  // namespace bcoint
