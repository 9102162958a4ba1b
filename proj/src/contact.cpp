#include "vibro/contact.hpp"

#include <numbers>

namespace vibro {

double restitution_coefficient(double v_in, double alpha) {
    if (v_in < 0) throw std::invalid_argument("restitution_coefficient: v_in must be >= 0");
    return std::clamp(1.0 - alpha * v_in, 0.0, 1.0);
}

double elastic_energy(double p, const SystemParams& params) {
    if (p <= 0) return 0.0;
    return params.k * std::pow(p, params.n + 1.0) / (params.n + 1.0);
}

std::vector<ContactSample> hysteresis_trace(const Eigen::VectorXd& p_profile, double dt,
                                            const SystemParams& params) {
    if (!(dt > 0)) throw std::invalid_argument("hysteresis_trace: dt must be positive");
    const Eigen::Index n = p_profile.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(p_profile[i] >= 0))
            throw std::invalid_argument("hysteresis_trace: negative penetration at index " +
                                        std::to_string(i));
    }

    std::vector<ContactSample> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double p_dot = 0.0;
        if (n >= 2) {
            if (i == 0) {
                p_dot = (p_profile[1] - p_profile[0]) / dt;
            } else if (i == n - 1) {
                p_dot = (p_profile[n - 1] - p_profile[n - 2]) / dt;
            } else {
                p_dot = (p_profile[i + 1] - p_profile[i - 1]) / (2 * dt);
            }
        }
        const double p = p_profile[i];
        out[static_cast<std::size_t>(i)] = {p, p_dot, contact_force(p, p_dot, params)};
    }
    return out;
}

double loop_energy(const std::vector<ContactSample>& trace) {
    if (trace.size() < 2) throw std::invalid_argument("loop_energy: trace too short");
    double p_max = 0.0;
    for (const auto& s : trace) p_max = std::max(p_max, std::abs(s.p));
    const double closure = std::abs(trace.back().p - trace.front().p);
    if (closure > 1e-12 + 1e-6 * p_max)
        throw std::invalid_argument("loop_energy: penetration cycle is not closed");

    double work = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        work += 0.5 * (trace[i].f + trace[i - 1].f) * (trace[i].p - trace[i - 1].p);
    }
    return work;
}

Eigen::VectorXd decaying_cycle_profile(double amplitude, double freq, double decay, int cycles,
                                       int samples_per_cycle) {
    if (cycles < 1 || samples_per_cycle < 4 || !(freq > 0) || !(amplitude >= 0))
        throw std::invalid_argument("decaying_cycle_profile: bad shape arguments");
    const int n = cycles * samples_per_cycle + 1;
    const double dt = 1.0 / (freq * samples_per_cycle);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
        // Zero exactly on the rectified half and at whole-period nodes.
        const int phase = i % samples_per_cycle;
        if (2 * phase >= samples_per_cycle || phase == 0) {
            p[i] = 0.0;
            continue;
        }
        const double t = i * dt;
        p[i] = amplitude * std::exp(-decay * t) * std::sin(2 * std::numbers::pi * freq * t);
    }
    return p;
}

}  // namespace vibro
