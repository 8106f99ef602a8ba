#pragma once

namespace bcoint {

// log of the upper tail probability 1 - Phi(z), accurate deep into both tails.
double log_normal_upper_tail(double z);

// Closed-form quantities for N(mean, var) restricted to the open interval (-1, 1).
struct TruncatedNormalOnUnit {
    double log_mass = 0.0;  // log P(-1 < X < 1) for X ~ N(mean, var)
    double m1 = 0.0;        // E[X | -1 < X < 1]
    double m2 = 0.0;        // E[X^2 | -1 < X < 1]
};

double truncated_unit_log_mass(double mean, double var);
TruncatedNormalOnUnit truncated_unit_moments(double mean, double var);

}  // namespace bcoint
