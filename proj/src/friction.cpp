#include "vibro/friction.hpp"

#include <cmath>
#include <stdexcept>

namespace vibro {

namespace {

double feedback_force(const SimState& s, const SystemParams& p, double u) {
    return u - p.a1 * s.v1 - p.a2 * s.x1;
}

double active_input(const CouplingMode& coupling, double t) {
    return std::visit([t](const auto& c) { return c(t); }, coupling);
}

Accelerations slip_branch(const SimState& s, const SystemParams& p, const CouplingMode& coupling,
                          int dir, double contact_force) {
    const double friction = p.b * dir;
    Accelerations a;
    a.passive = (friction - contact_force) / p.m2;
    if (std::holds_alternative<FullFeedback>(coupling)) {
        a.active = (feedback_force(s, p, active_input(coupling, s.t)) - friction) / p.m1;
    } else {
        a.active = active_input(coupling, s.t);
    }
    return a;
}

}  // namespace

bool stiction_holds(double required_accel, const SystemParams& params) {
    return std::abs(required_accel) <= params.stiction_accel();
}

Accelerations coupled_accelerations(const SimState& state, const SystemParams& params, double u) {
    require_valid(params);
    int dir = 0;
    if (!is_stick(state.mode)) dir = state.slip_dir != 0 ? state.slip_dir : sgn(state.z_dot());

    const double drive = feedback_force(state, params, u);
    if (dir == 0) {
        const double a = drive / (params.m1 + params.m2);
        if (stiction_holds(a, params)) return {a, a};
        dir = sgn(a);
    }
    const double friction = params.b * dir;
    return {(drive - friction) / params.m1, friction / params.m2};
}

double passive_acceleration(const SimState& state, const SystemParams& params, double contact_force,
                            double active_accel, double eps_v) {
    if (contact_force < 0) throw std::invalid_argument("passive_acceleration: negative contact force");
    const int dir = sgn_banded(state.z_dot(), eps_v);
    if (dir != 0) return (params.b * dir - contact_force) / params.m2;

    const double required = params.m2 * active_accel + contact_force;
    if (stiction_holds(required / params.m2, params)) return active_accel;
    return (params.b * sgn(required) - contact_force) / params.m2;
}

double stick_acceleration(const SimState& state, const SystemParams& params,
                          const CouplingMode& coupling, double contact_force) {
    if (std::holds_alternative<FullFeedback>(coupling)) {
        const double drive = feedback_force(state, params, active_input(coupling, state.t));
        return (drive - contact_force) / (params.m1 + params.m2);
    }
    return active_input(coupling, state.t);
}

double required_friction(const SimState& state, const SystemParams& params,
                         const CouplingMode& coupling, double contact_force) {
    return params.m2 * stick_acceleration(state, params, coupling, contact_force) + contact_force;
}

Accelerations mode_accelerations(const SimState& state, const SystemParams& params,
                                 const CouplingMode& coupling, double contact_force) {
    if (is_stick(state.mode)) {
        const double a = stick_acceleration(state, params, coupling, contact_force);
        return {a, a};
    }
    return slip_branch(state, params, coupling, state.slip_dir, contact_force);
}

}  // namespace vibro
