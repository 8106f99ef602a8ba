#include "bcoint/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

namespace bcoint {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

double log_std_normal_pdf(double z) { return -0.5 * z * z - kHalfLog2Pi; }

// log(1 - exp(x)) for x <= 0.
double log1mexp(double x) {
    if (x > -0.6931471805599453) return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

// Mills ratio (1 - Phi(z)) / phi(z) by backward evaluation of the continued
// fraction 1/(z + 1/(z + 2/(z + 3/(z + ...)))). Used only where erfc underflows.
double mills_ratio(double z) {
    double tail = z;
    for (int k = 80; k >= 1; --k) tail = z + k / tail;
    return 1.0 / tail;
}

// Above this variance the closed-form moments lose most of their digits to
// cancellation (the truncated variance is far below var), so the nearly flat
// density is integrated directly instead.
constexpr double kWideVariance = 1e4;
constexpr int kMaxWidePanels = 1024;

int wide_panels(double mean, double var) {
    if (var < kWideVariance) return 0;
    // Log-density slope is at most (|mean| + 1) / var on the interval; keep its
    // variation under 4 per panel.
    const double slope = (std::abs(mean) + 1.0) / var;
    const double panels = std::ceil(slope / 2.0) + 1.0;
    return panels > kMaxWidePanels ? 0 : static_cast<int>(panels);
}

TruncatedNormalOnUnit wide_moments(double mean, double var, int panels) {
    using Rule = boost::math::quadrature::gauss<double, 16>;
    const double c = std::clamp(mean, -1.0, 1.0);
    // exp(-((phi - mean)^2 - (c - mean)^2) / (2 var)), written to avoid cancellation.
    auto w = [&](double phi) { return std::exp(-(phi - c) * (phi + c - 2.0 * mean) / (2.0 * var)); };
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    const double h = 2.0 / panels;
    for (int k = 0; k < panels; ++k) {
        const double a = -1.0 + k * h;
        const double b = (k + 1 == panels) ? 1.0 : a + h;
        s0 += Rule::integrate(w, a, b);
        s1 += Rule::integrate([&](double p) { return p * w(p); }, a, b);
        s2 += Rule::integrate([&](double p) { return p * p * w(p); }, a, b);
    }
    TruncatedNormalOnUnit out;
    out.log_mass = std::log(s0) - (c - mean) * (c - mean) / (2.0 * var) - kHalfLog2Pi - 0.5 * std::log(var);
    out.m1 = std::clamp(s1 / s0, -1.0, 1.0);
    out.m2 = std::max(s2 / s0, out.m1 * out.m1);
    return out;
}

// erfc(z / sqrt(2)) stays a normal double below this.
constexpr double kErfcLimit = 37.0;

double normal_upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

}  // namespace

double log_normal_upper_tail(double z) {
    if (z >= kErfcLimit) return log_std_normal_pdf(z) + std::log(mills_ratio(z));
    if (z > -8.0) return std::log(normal_upper_tail(z));
    // 1 - Phi(z) is within 1e-15 of one; keep the small correction.
    return std::log1p(-0.5 * std::erfc(-z * kInvSqrt2));
}

double truncated_unit_log_mass(double mean, double var) {
    if (const int panels = wide_panels(mean, var)) return wide_moments(mean, var, panels).log_mass;
    const double sd = std::sqrt(var);
    const double lo = (-1.0 - mean) / sd;
    const double hi = (1.0 - mean) / sd;
    if (lo >= 0.0) {
        const double a = log_normal_upper_tail(lo);
        return a + log1mexp(log_normal_upper_tail(hi) - a);
    }
    if (hi <= 0.0) {
        const double a = log_normal_upper_tail(-hi);
        return a + log1mexp(log_normal_upper_tail(-lo) - a);
    }
    return std::log1p(-(normal_upper_tail(-lo) + normal_upper_tail(hi)));
}

TruncatedNormalOnUnit truncated_unit_moments(double mean, double var) {
    if (const int panels = wide_panels(mean, var)) return wide_moments(mean, var, panels);
    const double sd = std::sqrt(var);
    const double lo = (-1.0 - mean) / sd;
    const double hi = (1.0 - mean) / sd;

    TruncatedNormalOnUnit out;
    out.log_mass = truncated_unit_log_mass(mean, var);

    const double r_lo = std::exp(log_std_normal_pdf(lo) - out.log_mass);
    const double r_hi = std::exp(log_std_normal_pdf(hi) - out.log_mass);
    const double shift = r_lo - r_hi;
    double std_var = 1.0 + (lo * r_lo - hi * r_hi) - shift * shift;
    std_var = std::max(std_var, 0.0);

    out.m1 = std::clamp(mean + sd * shift, -1.0, 1.0);
    out.m2 = var * std_var + out.m1 * out.m1;
    return out;
}

}  // namespace bcoint
