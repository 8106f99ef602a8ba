#include "bcoint/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bcoint/errors.hpp"
#include "bcoint/truncated_normal.hpp"

namespace bcoint {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2 = 0.69314718055994530942;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

struct LogTransitions {
    double init_rw, init_c, rr, rc, cc, cr;

    explicit LogTransitions(const SwitchConfig& cfg)
        : init_rw(safe_log(cfg.p_init_rw)),
          init_c(safe_log(1.0 - cfg.p_init_rw)),
          rr(safe_log(cfg.p_rw_to_rw)),
          rc(safe_log(1.0 - cfg.p_rw_to_rw)),
          cc(safe_log(cfg.p_c_to_c)),
          cr(safe_log(1.0 - cfg.p_c_to_c)) {}
};

void make_flat(MixtureComponent& c) {
    c.flat = true;
    c.post = PhiPosterior{0.0, kFlatVariance, Prefactor::None};
    c.log_mass = 0.0;
    c.moments = PhiMoments{0.0, 1.0 / 3.0};
}

// Multiplies the component's phi density by N(value | phi * lag, sigma2) and
// returns the log of the resulting change in ∫ U(phi) (...) dphi.
double absorb(MixtureComponent& c, double lag, double value, double sigma2) {
    if (lag == 0.0) return log_normal_pdf(value, 0.0, sigma2);
    double increment = 0.0, f = 0.0, F = 0.0;
    if (c.flat) {
        // U(phi) N(value | phi lag, s2) = (1 / 2|lag|) N(phi | value/lag, s2/lag^2)
        f = value / lag;
        F = sigma2 / (lag * lag);
        increment = -kLog2 - std::log(std::abs(lag));
    } else {
        const double pred_var = sigma2 + lag * lag * c.post.F;
        increment = log_normal_pdf(value, c.post.f * lag, pred_var) - c.log_mass;
        f = (c.post.f * sigma2 + value * lag * c.post.F) / pred_var;
        F = sigma2 * c.post.F / pred_var;
    }
    const TruncatedNormalOnUnit tn = truncated_unit_moments(f, F);
    c.flat = false;
    c.post = PhiPosterior{f, F, Prefactor::None};
    c.log_mass = tn.log_mass;
    c.moments = PhiMoments{tn.m1, tn.m2};
    return increment + tn.log_mass;
}

double resolve_width(const SwitchConfig& cfg, std::span<const double> eps) {
    const double w = cfg.reset_width.value_or(default_width(eps));
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("reset_width must be positive");
    return w;
}

}  // namespace

void SwitchConfig::validate() const {
    auto check = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InputError(std::string(name) + " must be a probability in [0, 1]");
        }
    };
    check(p_init_rw, "p_init_rw");
    check(p_rw_to_rw, "p_rw_to_rw");
    check(p_c_to_c, "p_c_to_c");
    if (reset_width && !(*reset_width > 0.0)) throw InputError("reset_width must be positive");
    if (prune && !(prune_log_gap > 0.0)) throw InputError("prune_log_gap must be positive");
}

SwitchFilterResult switch_filter(std::span<const double> eps, double sigma2,
                                 const SwitchConfig& cfg) {
    cfg.validate();
    if (eps.size() < SeriesPair::kMinLength) throw InputError("switching model needs T >= 3");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InputError("sigma2 must be positive");

    const LogTransitions lt(cfg);
    SwitchFilterResult out;
    out.width = resolve_width(cfg, eps);
    const double log_width = std::log(out.width);
    out.slices.reserve(eps.size() - 1);

    double cum = -log_width;  // log p(eps_0)
    for (std::size_t t = 1; t < eps.size(); ++t) {
        const double lag = eps[t - 1];
        const double value = eps[t];
        const double rw_emit = log_normal_pdf(value, lag, sigma2);

        FilteredSlice slice;
        slice.t = t;
        double log_rw = kNegInf;
        auto& comps = slice.components;

        if (t == 1) {
            log_rw = lt.init_rw + rw_emit;
            if (lt.init_c > kNegInf) {
                MixtureComponent c;
                c.run_start = 0;
                make_flat(c);
                c.log_weight = lt.init_c + absorb(c, lag, value, sigma2);
                comps.push_back(c);
            }
        } else {
            const FilteredSlice& prev = out.slices.back();
            double coint_mass = kNegInf;
            for (const auto& c : prev.components) coint_mass = log_add(coint_mass, c.log_weight);
            log_rw = log_add(prev.log_rw_prob + lt.rr, coint_mass + lt.cr) + rw_emit;

            comps.reserve(prev.components.size() + 1);
            if (lt.cc > kNegInf) {
                for (const auto& c : prev.components) {
                    MixtureComponent next = c;
                    next.log_weight = c.log_weight + lt.cc + absorb(next, lag, value, sigma2);
                    if (next.log_weight > kNegInf) comps.push_back(next);
                }
            }
            const double fresh = prev.log_rw_prob + lt.rc - log_width;
            if (fresh > kNegInf) {
                MixtureComponent c;
                c.run_start = t;
                make_flat(c);
                c.log_weight = fresh;
                comps.push_back(c);
            }
        }

        double log_z = log_rw;
        for (const auto& c : comps) log_z = log_add(log_z, c.log_weight);
        if (!std::isfinite(log_z)) {
            throw NumericalError("switching filter normaliser is not finite at t = " +
                                 std::to_string(t));
        }
        log_rw -= log_z;
        for (auto& c : comps) {
            c.log_weight -= log_z;
            c.run_length = t - c.run_start;
        }

        if (cfg.prune && !comps.empty()) {
            double top = log_rw;
            for (const auto& c : comps) top = std::max(top, c.log_weight);
            std::erase_if(comps, [&](const MixtureComponent& c) {
                return c.log_weight < top - cfg.prune_log_gap;
            });
            double kept = log_rw;
            for (const auto& c : comps) kept = log_add(kept, c.log_weight);
            log_rw -= kept;
            for (auto& c : comps) c.log_weight -= kept;
        }

        cum += log_z;
        slice.log_rw_prob = log_rw;
        slice.rw_prob = std::exp(log_rw);
        slice.log_z = log_z;
        slice.log_lik = cum;
        out.slices.push_back(std::move(slice));
    }
    out.log_likelihood = cum;
    return out;
}

SwitchSmoothResult switch_smooth(const SwitchFilterResult& filtered, std::span<const double> eps,
                                 double sigma2, const SwitchConfig& cfg) {
    cfg.validate();
    const std::size_t T = eps.size();
    if (filtered.slices.size() + 1 != T) {
        throw InputError("filtered slices do not match the residual series length");
    }
    const LogTransitions lt(cfg);
    const double log_width = std::log(filtered.width);
    const double total = filtered.log_likelihood;

    // future[t]: log p(eps_{t+1:T-1} | i_t = 1, eps_{0:t}).
    // start_acc[s]: log sum over segment ends e of p(eps_{0:e}, segment from s to e)
    //               * p(eps_{e+1:T-1} | segment ends at e).
    // seg_p*[s]: sums over ends e >= current t of the segment posterior and its
    //            phi moments.
    std::vector<double> future(T, 0.0);
    std::vector<double> start_acc(T, kNegInf);
    std::vector<double> seg_p0(T, 0.0), seg_p1(T, 0.0), seg_p2(T, 0.0);

    SwitchSmoothResult out;
    out.slices.resize(T - 1);
    for (std::size_t t = T - 1; t >= 1; --t) {
        const FilteredSlice& fs = filtered.slices[t - 1];
        const bool last = t == T - 1;

        double tail = 0.0;  // log p(i_{t+1} = 1, eps_{t+1:T-1} | segment ends at t)
        if (!last) {
            const double rw_next = log_normal_pdf(eps[t + 1], eps[t], sigma2);
            double fresh_future = kNegInf;
            const FilteredSlice& next = filtered.slices[t];
            if (!next.components.empty() && next.components.back().run_start == t + 1 &&
                start_acc[t + 1] > kNegInf) {
                fresh_future =
                    start_acc[t + 1] - (next.log_lik + next.components.back().log_weight);
            }
            future[t] = log_add(lt.rr + rw_next + future[t + 1], lt.rc - log_width + fresh_future);
            tail = lt.cr + rw_next + future[t + 1];
        }

        SmoothedSlice& ss = out.slices[t - 1];
        ss.t = t;
        ss.components.reserve(fs.components.size());
        const double offset = fs.log_lik - total;
        double mass = 0.0, mix1 = 0.0, mix2 = 0.0;
        for (const auto& c : fs.components) {
            const std::size_t s = c.run_start;
            start_acc[s] = log_add(start_acc[s], fs.log_lik + c.log_weight + tail);
            const double p = last ? std::exp(c.log_weight) : std::exp(c.log_weight + offset + tail);
            seg_p0[s] += p;
            seg_p1[s] += p * c.moments.m1;
            seg_p2[s] += p * c.moments.m2;

            SmoothedComponent sc;
            sc.run_start = s;
            sc.run_length = c.run_length;
            if (last) {
                sc.log_weight = c.log_weight;
                sc.moments = c.moments;
            } else if (seg_p0[s] > 0.0) {
                sc.log_weight = std::log(seg_p0[s]);
                sc.moments = PhiMoments{seg_p1[s] / seg_p0[s], seg_p2[s] / seg_p0[s]};
            } else {
                sc.log_weight = kNegInf;
                sc.moments = c.moments;
            }
            ss.components.push_back(sc);

            mass += seg_p0[s];
            mix1 += seg_p1[s];
            mix2 += seg_p2[s];
            if (s < t) {
                ss.continue_prob += seg_p0[s];
                ss.continue_m1 += seg_p1[s];
                ss.continue_m2 += seg_p2[s];
            } else {
                ss.reset_prob = seg_p0[s];
            }
        }
        ss.rw_prob = last ? fs.rw_prob : std::exp(fs.log_rw_prob + offset + future[t]);
        if (mass > 0.0) ss.coint_moments = PhiMoments{mix1 / mass, mix2 / mass};
        if (!last) {
            // The exact slice sums to one; remove accumulated rounding.
            const double norm = ss.rw_prob + mass;
            ss.rw_prob /= norm;
            ss.reset_prob /= norm;
            ss.continue_prob /= norm;
            ss.continue_m1 /= norm;
            ss.continue_m2 /= norm;
            const double log_norm = std::log(norm);
            for (auto& sc : ss.components) sc.log_weight -= log_norm;
        }
    }
    return out;
}

Ar1EnergyWeights switching_energy_weights(const SwitchSmoothResult& smoothed) {
    const std::size_t T = smoothed.slices.size() + 1;
    Ar1EnergyWeights w;
    w.a.assign(T, 0.0);
    w.b.assign(T, 0.0);
    w.c.assign(T, 0.0);
    for (const auto& s : smoothed.slices) {
        const double r = s.rw_prob;
        w.a[s.t] = r + s.continue_prob;
        w.b[s.t] = r + s.continue_m1;
        w.c[s.t] = r + s.continue_m2;
        w.gaussian_terms += w.a[s.t];
    }
    return w;
}

SwitchEmResult switch_em(const SeriesPair& pair, const RegressionParams& init,
                         const SwitchConfig& cfg, const EmConfig& em_cfg) {
    cfg.validate();
    em_cfg.validate();
    init.validate();

    SwitchConfig fixed = cfg;
    fixed.reset_width = resolve_width(cfg, compute_residuals(pair, init));

    SwitchEmResult out;
    out.width = *fixed.reset_width;
    RegressionParams params = init;
    for (int iter = 1;; ++iter) {
        const Residuals eps = compute_residuals(pair, params);
        SwitchFilterResult filt = switch_filter(eps, params.sigma2, fixed);
        const double ll = filt.log_likelihood;
        const bool converged = !out.trace.loglik_history.empty() &&
                               relative_change_below(out.trace.loglik_history.back(), ll,
                                                     em_cfg.rel_tol);
        out.trace.loglik_history.push_back(ll);
        out.trace.params_history.push_back(params);

        out.smoothed = switch_smooth(filt, eps, params.sigma2, fixed);
        out.filtered = std::move(filt);
        out.params = params;
        out.log_lik = ll;
        if (converged) {
            out.trace.converged = true;
            break;
        }
        if (iter >= em_cfg.max_iters) break;
        params = solve_weighted_regression(pair, switching_energy_weights(out.smoothed), params.alpha);
    }
    return out;
}

std::vector<int> map_regimes(const SwitchSmoothResult& smoothed) {
    std::vector<int> regimes;
    regimes.reserve(smoothed.slices.size());
    for (const auto& s : smoothed.slices) regimes.push_back(s.rw_prob > 0.5 ? 1 : 0);
    return regimes;
}

PhiEstimates map_phi(std::span<const double> eps, double sigma2, std::span<const int> regimes) {
    if (regimes.size() + 1 != eps.size()) {
        throw InputError("regime sequence must have one entry per time t >= 1");
    }
    if (!(sigma2 > 0.0)) throw InputError("sigma2 must be positive");

    PhiEstimates out;
    out.phi.assign(regimes.size(), 1.0);
    std::size_t k = 0;
    while (k < regimes.size()) {
        if (regimes[k] != 0) {
            if (regimes[k] != 1) throw InputError("regimes must be 0 or 1");
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end + 1 < regimes.size() && regimes[end + 1] == 0) ++end;

        // Times k+1..end+1. A segment at t = 1 conditions on eps[0]; later
        // segments open with a reset, so their first residual carries no phi
        // information.
        const std::size_t first_t = k + 1;
        const std::size_t last_t = end + 1;
        const std::size_t data_begin = first_t == 1 ? 0 : first_t;
        const auto data = eps.subspan(data_begin, last_t - data_begin + 1);

        double estimate = 0.0;
        bool informative = false;
        if (data.size() >= 2) {
            try {
                const PhiPosterior post = sequential_filter(data, sigma2);
                estimate = std::clamp(post.f, -1.0 + kPhiClampMargin, 1.0 - kPhiClampMargin);
                informative = true;
            } catch (const DegenerateError&) {
            }
        }
        if (!informative) out.uninformative_segments.emplace_back(first_t, last_t);
        for (std::size_t j = k; j <= end; ++j) out.phi[j] = estimate;
        k = end + 1;
    }
    return out;
}

}  // namespace bcoint
