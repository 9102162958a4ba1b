#pragma once

// Coulomb friction coupling between the active platform and the passive body.

#include <functional>
#include <variant>

#include "vibro/model.hpp"

namespace vibro {

/// Default stick band on the relative velocity [m/s].
inline constexpr double kDefaultStickBand = 1e-4;

/// The active body follows a prescribed acceleration profile and does not feel
/// the friction reaction. A default-constructed profile is zero (constant
/// platform velocity).
struct RobustControlled {
    std::function<double(double)> accel;

    [[nodiscard]] double operator()(double t) const { return accel ? accel(t) : 0.0; }
};

/// The active body is driven by u(t) through gains a1, a2 and feels the
/// friction reaction of the passive body.
struct FullFeedback {
    std::function<double(double)> u;

    [[nodiscard]] double operator()(double t) const { return u ? u(t) : 0.0; }
};

using CouplingMode = std::variant<RobustControlled, FullFeedback>;

struct Accelerations {
    double active = 0.0;
    double passive = 0.0;
};

/// True iff static friction can supply required_accel to the passive body,
/// i.e. |required_accel| <= b/m2. The boundary counts as holding.
bool stiction_holds(double required_accel, const SystemParams& params);

/// Feedback-coupled accelerations of both bodies for exogenous input u, no
/// contact force. Stick modes use the combined mass m1 + m2 and fall back to the
/// slip branch when stiction cannot hold; breakaway direction is the sign of the
/// unbalanced tangential force.
Accelerations coupled_accelerations(const SimState& state, const SystemParams& params, double u);

/// Passive body acceleration under friction and a (non-negative) contact force.
///
/// The friction direction is sgn_banded(v1 - v2, eps_v). Inside the band the
/// body follows active_accel as long as stiction can hold, otherwise it breaks
/// away with friction saturated at b.
double passive_acceleration(const SimState& state, const SystemParams& params, double contact_force,
                            double active_accel = 0.0, double eps_v = kDefaultStickBand);

/// Acceleration shared by both bodies while they stick, given the contact force
/// acting on the passive body.
double stick_acceleration(const SimState& state, const SystemParams& params,
                          const CouplingMode& coupling, double contact_force);

/// Friction force the platform must transmit to keep the passive body stuck.
double required_friction(const SimState& state, const SystemParams& params,
                         const CouplingMode& coupling, double contact_force);

/// Mode-aware accelerations used by the integrator. Stick modes move both
/// bodies together; slip modes use state.slip_dir for the friction direction.
Accelerations mode_accelerations(const SimState& state, const SystemParams& params,
                                 const CouplingMode& coupling, double contact_force);

}  // namespace vibro
