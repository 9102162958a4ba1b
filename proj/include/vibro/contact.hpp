#pragma once

// Hunt-Crossley type vibro-impact contact: penetration, nonlinear contact force
// with penetration-dependent structural damping, restitution, and (p, f) maps.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "vibro/model.hpp"

namespace vibro {

/// Interference depth beyond the impact position; zero on the free side.
template <typename Scalar>
Scalar penetration(Scalar x2, Scalar x_c) {
    const Scalar d = x2 - x_c;
    return Scalar(0.5) * Scalar(1 + sgn(d)) * d;
}

/// Unclamped k p^n (1 + 1.5 alpha p_dot). Negative during fast withdrawal.
template <typename Scalar>
Scalar raw_contact_force(Scalar p, Scalar p_dot, Scalar k, Scalar alpha, Scalar n) {
    if (p < Scalar(0)) throw std::invalid_argument("contact force: negative penetration");
    if (p == Scalar(0)) return Scalar(0);
    return k * std::pow(p, n) * (Scalar(1) + Scalar(1.5) * alpha * p_dot);
}

/// Contact force, clamped at zero so the wall never pulls.
template <typename Scalar>
Scalar contact_force(Scalar p, Scalar p_dot, Scalar k, Scalar alpha, Scalar n) {
    return std::max(raw_contact_force(p, p_dot, k, alpha, n), Scalar(0));
}

inline double raw_contact_force(double p, double p_dot, const SystemParams& params) {
    return raw_contact_force(p, p_dot, params.k, params.alpha, params.n);
}

inline double contact_force(double p, double p_dot, const SystemParams& params) {
    return contact_force(p, p_dot, params.k, params.alpha, params.n);
}

/// Velocity-dependent restitution e = 1 - alpha v_in, clamped to [0, 1].
double restitution_coefficient(double v_in, double alpha);

/// Elastic energy stored at penetration p: k p^(n+1) / (n+1).
double elastic_energy(double p, const SystemParams& params);

struct ContactSample {
    double p = 0.0;
    double p_dot = 0.0;
    double f = 0.0;
};

/// Evaluates the contact force along a prescribed penetration profile.
/// p_dot is taken by central differences (one-sided at the ends).
std::vector<ContactSample> hysteresis_trace(const Eigen::VectorXd& p_profile, double dt,
                                            const SystemParams& params);

/// Closed-loop work of the contact force, the trapezoidal sum of f dp.
/// Throws if the trace does not return to its starting penetration.
double loop_energy(const std::vector<ContactSample>& trace);

/// Half-wave rectified, exponentially decaying sinusoid:
///   p(t) = amplitude * exp(-decay t) * max(sin(2 pi freq t), 0)
/// sampled at dt over `cycles` full periods, so it starts and ends at p = 0.
Eigen::VectorXd decaying_cycle_profile(double amplitude, double freq, double decay, int cycles,
                                       int samples_per_cycle);

}  // namespace vibro
