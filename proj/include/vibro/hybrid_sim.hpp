#pragma once

// Event-driven integration of the friction/impact hybrid system.
//
// Within a mode the vector field is smooth and is advanced with classical RK4.
// Mode changes happen only at localized guard crossings:
//   free modes     x2 - x_c                  crosses up      -> Impact
//   contact modes  raw contact force         crosses down    -> Separation
//   slip modes     slip_dir * (v1 - v2)      crosses down    -> StickOnset
//   stick modes    b - |required friction|   becomes < 0     -> SlipOnset
// The state is continuous across every event; restitution emerges from the
// contact phase rather than from a velocity jump.

#include <optional>
#include <stdexcept>
#include <string>

#include "vibro/contact.hpp"
#include "vibro/friction.hpp"
#include "vibro/model.hpp"

namespace vibro {

/// Raised when more than max_events events are found inside one base step.
class ChatteringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the state leaves the finite range.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
    double dt = 2e-5;                   ///< base RK4 step [s]
    double tol_event = 1e-9;            ///< bisection width for event times [s]
    double eps_v = kDefaultStickBand;   ///< stick band on v1 - v2 [m/s]
    double eps_x = 1e-6;                ///< admissible contact-side slack on x2 - x_c [m]
    int max_events = 8;                 ///< per base step

    bool operator==(const IntegratorConfig&) const = default;
};

void require_valid(const IntegratorConfig& cfg);

enum class ScenarioKind { IdleImpulse, ConstantDrag };

std::string_view to_string(ScenarioKind k) noexcept;

struct Scenario {
    ScenarioKind kind = ScenarioKind::IdleImpulse;
    SimState initial;
    SystemParams params;
    double t_end = 0.4;                      ///< horizon [s]
    double dt = 1.0 / kPresetSampleRate;     ///< export sample interval [s]
    CouplingMode coupling = RobustControlled{};
};

/// Idle platform, passive body launched at the wall with velocity v2(0) from
/// `gap` metres in front of x_c.
Scenario make_idle_impulse(SystemParams params, double v2_initial, double gap = 5e-3,
                           double t_end = 0.4);

/// Platform at constant params.v_platform carrying the passive body (stuck)
/// toward the wall from `gap` metres away.
Scenario make_constant_drag(SystemParams params, double gap = 2e-3, double t_end = 5.0);

/// Throws std::invalid_argument when the scenario breaks its kind's invariants.
void require_valid(const Scenario& scenario);

/// Contact force acting in the given state (zero in free modes).
double state_contact_force(const SimState& state, const SystemParams& params);

/// Penetration as tracked by the hybrid state (zero in free modes).
double state_penetration(const SimState& state, const SystemParams& params);

/// Picks the discrete mode matching a continuous state.
SimState classify(SimState state, const SystemParams& params, const IntegratorConfig& cfg,
                  const CouplingMode& coupling = RobustControlled{});

/// Throws std::invalid_argument if the continuous state contradicts its mode.
void require_consistent(const SimState& state, const SystemParams& params,
                        const IntegratorConfig& cfg);

/// One RK4 step of size h on the current mode's vector field. No guard checks.
SimState rk4_step(const SimState& state, double h, const SystemParams& params,
                  const CouplingMode& coupling = RobustControlled{});

/// One base step of size cfg.dt from a mode-consistent state.
SimState step(const SimState& state, const SystemParams& params, const IntegratorConfig& cfg,
              const CouplingMode& coupling = RobustControlled{});

/// Checks every guard of prev's mode across [prev.t, next.t] and returns the
/// earliest crossing, localized by bisection to cfg.tol_event. The reported
/// state is the integrated state just past the crossing, still in prev's mode.
std::optional<Event> detect_and_locate(const SimState& prev, const SimState& next,
                                       const SystemParams& params, const IntegratorConfig& cfg,
                                       const CouplingMode& coupling = RobustControlled{});

/// Mode transition for a localized event. Continuous state is kept, except
/// StickOnset which sets v2 := v1 exactly.
SimState apply_event(const Event& event, const SystemParams& params,
                     const CouplingMode& coupling = RobustControlled{});

Trajectory simulate(const Scenario& scenario, const IntegratorConfig& cfg = {});

/// Kinetic energy of the passive body plus elastic energy stored in the contact.
double mechanical_energy(const SimState& state, const SystemParams& params);

}  // namespace vibro
