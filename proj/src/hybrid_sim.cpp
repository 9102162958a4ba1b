#include "vibro/hybrid_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace vibro {

namespace {

constexpr std::array<EventKind, 4> kAllKinds = {EventKind::Impact, EventKind::Separation,
                                                 EventKind::StickOnset, EventKind::SlipOnset};

bool applies(EventKind kind, Mode mode) {
    switch (kind) {
        case EventKind::Impact: return !is_contact(mode);
        case EventKind::Separation: return is_contact(mode);
        case EventKind::StickOnset: return !is_stick(mode);
        case EventKind::SlipOnset: return is_stick(mode);
    }
    return false;
}

/// Only the sign of a guard matters; units differ between guards.
double guard_value(EventKind kind, const SimState& s, const SystemParams& p,
                   const CouplingMode& coupling) {
    switch (kind) {
        case EventKind::Impact: return s.x2 - p.x_c;
        case EventKind::Separation: {
            const double d = s.x2 - p.x_c;
            if (d <= 0) return d;
            return raw_contact_force(d, s.v2, p);
        }
        case EventKind::StickOnset: return s.slip_dir * (s.v1 - s.v2);
        case EventKind::SlipOnset: {
            const double f = state_contact_force(s, p);
            return p.b - std::abs(required_friction(s, p, coupling, f));
        }
    }
    return 0.0;
}

/// Whether the guard value lies on the post-transition side.
bool past_guard(EventKind kind, double g) {
    switch (kind) {
        case EventKind::Impact: return g >= 0;
        case EventKind::Separation:
        case EventKind::StickOnset: return g <= 0;
        case EventKind::SlipOnset: return g < 0;
    }
    return false;
}

Vector4 derivative(const SimState& s, const SystemParams& p, const CouplingMode& coupling) {
    const Accelerations a = mode_accelerations(s, p, coupling, state_contact_force(s, p));
    return Vector4(s.v1, a.active, s.v2, a.passive);
}

bool finite(const SimState& s) { return s.vec().allFinite() && std::isfinite(s.t); }

}  // namespace

void require_valid(const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0) || !std::isfinite(cfg.dt))
        throw std::invalid_argument("integrator: dt must be positive");
    if (!(cfg.tol_event > 0) || !(cfg.tol_event < cfg.dt))
        throw std::invalid_argument("integrator: tol_event must lie in (0, dt)");
    if (!(cfg.eps_v > 0)) throw std::invalid_argument("integrator: eps_v must be positive");
    if (!(cfg.eps_x >= 0)) throw std::invalid_argument("integrator: eps_x must be >= 0");
    if (cfg.max_events < 1) throw std::invalid_argument("integrator: max_events must be >= 1");
}

std::string_view to_string(ScenarioKind k) noexcept {
    return k == ScenarioKind::IdleImpulse ? "idle-impulse" : "constant-drag";
}

Scenario make_idle_impulse(SystemParams params, double v2_initial, double gap, double t_end) {
    params.v_platform = 0.0;
    Scenario sc;
    sc.kind = ScenarioKind::IdleImpulse;
    sc.params = params;
    sc.initial.x2 = params.x_c - gap;
    sc.initial.v2 = v2_initial;
    sc.t_end = t_end;
    return sc;
}

Scenario make_constant_drag(SystemParams params, double gap, double t_end) {
    Scenario sc;
    sc.kind = ScenarioKind::ConstantDrag;
    sc.params = params;
    sc.initial.v1 = params.v_platform;
    sc.initial.x2 = params.x_c - gap;
    sc.initial.v2 = params.v_platform;
    sc.t_end = t_end;
    return sc;
}

void require_valid(const Scenario& sc) {
    require_valid(sc.params);
    if (!(sc.dt > 0) || !std::isfinite(sc.dt))
        throw std::invalid_argument("scenario: dt must be positive");
    if (!(sc.t_end >= 0) || !std::isfinite(sc.t_end))
        throw std::invalid_argument("scenario: t_end must be >= 0");
    if (!finite(sc.initial)) throw std::invalid_argument("scenario: non-finite initial state");
    switch (sc.kind) {
        case ScenarioKind::IdleImpulse:
            if (sc.params.v_platform != 0.0 || sc.initial.v1 != 0.0)
                throw std::invalid_argument("idle-impulse scenario requires a resting platform");
            break;
        case ScenarioKind::ConstantDrag:
            if (sc.initial.v1 != sc.params.v_platform)
                throw std::invalid_argument("constant-drag scenario: v1(0) must equal v_platform");
            break;
    }
}

double state_penetration(const SimState& state, const SystemParams& params) {
    if (!is_contact(state.mode)) return 0.0;
    return std::max(state.x2 - params.x_c, 0.0);
}

double state_contact_force(const SimState& state, const SystemParams& params) {
    if (!is_contact(state.mode)) return 0.0;
    return contact_force(state_penetration(state, params), state.v2, params);
}

SimState classify(SimState s, const SystemParams& params, const IntegratorConfig& cfg,
                  const CouplingMode& coupling) {
    const bool contact = s.x2 >= params.x_c;
    s.mode = make_mode(false, contact);
    const int rel = sgn_banded(s.z_dot(), cfg.eps_v);
    if (rel != 0) {
        s.slip_dir = rel;
        return s;
    }
    s.v2 = s.v1;
    s.mode = make_mode(true, contact);
    s.slip_dir = 0;
    const double f_req = required_friction(s, params, coupling, state_contact_force(s, params));
    if (std::abs(f_req) <= params.b) return s;
    s.mode = make_mode(false, contact);
    s.slip_dir = sgn(f_req);
    return s;
}

void require_consistent(const SimState& s, const SystemParams& params, const IntegratorConfig& cfg) {
    if (!finite(s)) throw NumericalError("non-finite state at t = " + std::to_string(s.t));
    if (is_stick(s.mode) && std::abs(s.z_dot()) > cfg.eps_v)
        throw std::invalid_argument("stick mode with relative velocity outside the stick band");
    if (!is_stick(s.mode) && s.slip_dir != 1 && s.slip_dir != -1)
        throw std::invalid_argument("slip mode without a slip direction");
    if (is_contact(s.mode) && s.x2 < params.x_c - cfg.eps_x)
        throw std::invalid_argument("contact mode on the free side of the wall");
}

SimState rk4_step(const SimState& s, double h, const SystemParams& params,
                  const CouplingMode& coupling) {
    auto at = [&](double dt, const Vector4& y) {
        SimState tmp = s;
        tmp.t = s.t + dt;
        tmp.set_vec(y);
        return tmp;
    };
    const Vector4 y0 = s.vec();
    const Vector4 k1 = derivative(s, params, coupling);
    const Vector4 k2 = derivative(at(0.5 * h, y0 + 0.5 * h * k1), params, coupling);
    const Vector4 k3 = derivative(at(0.5 * h, y0 + 0.5 * h * k2), params, coupling);
    const Vector4 k4 = derivative(at(h, y0 + h * k3), params, coupling);

    SimState out = at(h, y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (is_stick(out.mode)) out.v2 = out.v1;
    return out;
}

SimState step(const SimState& state, const SystemParams& params, const IntegratorConfig& cfg,
              const CouplingMode& coupling) {
    require_valid(cfg);
    require_consistent(state, params, cfg);
    return rk4_step(state, cfg.dt, params, coupling);
}

std::optional<Event> detect_and_locate(const SimState& prev, const SimState& next,
                                       const SystemParams& params, const IntegratorConfig& cfg,
                                       const CouplingMode& coupling) {
    const double h = next.t - prev.t;
    std::optional<Event> best;
    for (EventKind kind : kAllKinds) {
        if (!applies(kind, prev.mode)) continue;
        if (past_guard(kind, guard_value(kind, prev, params, coupling))) continue;
        if (!past_guard(kind, guard_value(kind, next, params, coupling))) continue;

        double lo = 0.0;
        double hi = h;
        while (hi - lo > cfg.tol_event) {
            const double mid = 0.5 * (lo + hi);
            const SimState s = rk4_step(prev, mid, params, coupling);
            if (past_guard(kind, guard_value(kind, s, params, coupling))) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Event ev;
        ev.kind = kind;
        ev.state_at_event = hi == h ? next : rk4_step(prev, hi, params, coupling);
        ev.t_event = ev.state_at_event.t;
        if (kind == EventKind::Impact) ev.v_in = ev.state_at_event.v2;

        // Kinds are visited in priority order, so a later kind must be
        // strictly earlier by more than the localization width to win.
        if (!best || ev.t_event < best->t_event - cfg.tol_event) best = ev;
    }
    return best;
}

SimState apply_event(const Event& event, const SystemParams& params, const CouplingMode& coupling) {
    SimState s = event.state_at_event;
    const bool stick = is_stick(s.mode);
    const bool contact = is_contact(s.mode);
    auto inadmissible = [&]() {
        std::ostringstream os;
        os << "inadmissible transition: " << to_string(event.kind) << " in mode " << to_string(s.mode);
        return std::invalid_argument(os.str());
    };
    // Tries to stick at the current state, otherwise slips in the direction of
    // the unbalanced force.
    auto settle_friction = [&](bool in_contact) {
        s.v2 = s.v1;
        s.mode = make_mode(true, in_contact);
        s.slip_dir = 0;
        const double f_req = required_friction(s, params, coupling, state_contact_force(s, params));
        if (std::abs(f_req) > params.b) {
            s.mode = make_mode(false, in_contact);
            s.slip_dir = sgn(f_req);
        }
    };

    switch (event.kind) {
        case EventKind::Impact:
            if (contact) throw inadmissible();
            s.mode = make_mode(stick, true);
            break;
        case EventKind::Separation:
            if (!contact) throw inadmissible();
            if (stick) {
                settle_friction(false);
            } else {
                s.mode = Mode::SlipFree;
            }
            break;
        case EventKind::StickOnset:
            if (stick) throw inadmissible();
            settle_friction(contact);
            break;
        case EventKind::SlipOnset: {
            if (!stick) throw inadmissible();
            const double f_req =
                required_friction(s, params, coupling, state_contact_force(s, params));
            s.mode = make_mode(false, contact);
            s.slip_dir = f_req >= 0 ? 1 : -1;
            break;
        }
    }
    return s;
}

Trajectory simulate(const Scenario& sc, const IntegratorConfig& cfg) {
    require_valid(sc);
    require_valid(cfg);
    const SystemParams& params = sc.params;

    Trajectory traj;
    traj.dt = sc.dt;
    const long long n_samples = std::llround(sc.t_end / sc.dt);
    if (n_samples == 0) return traj;
    const int substeps = std::max(1, static_cast<int>(std::ceil(sc.dt / cfg.dt - 1e-9)));

    SimState s = sc.initial;
    s.t = 0.0;
    s = classify(s, params, cfg, sc.coupling);
    traj.samples.reserve(static_cast<std::size_t>(n_samples) + 1);

    auto record = [&](const SimState& st) {
        traj.samples.push_back({st, state_penetration(st, params), state_contact_force(st, params)});
    };
    auto advance_to = [&](double t1) {
        int events = 0;
        while (true) {
            const double h = t1 - s.t;
            if (h <= 1e-3 * cfg.tol_event) {
                s.t = t1;
                return;
            }
            SimState next = rk4_step(s, h, params, sc.coupling);
            if (!finite(next)) throw NumericalError("non-finite state near t = " + std::to_string(s.t));
            const auto ev = detect_and_locate(s, next, params, cfg, sc.coupling);
            if (!ev) {
                s = next;
                s.t = t1;
                return;
            }
            if (++events > cfg.max_events) {
                throw ChatteringError("more than " + std::to_string(cfg.max_events) +
                                      " events in one step near t = " + std::to_string(s.t));
            }
            if (ev->kind == EventKind::Impact && ev->v_in > params.omega_max) {
                traj.warnings.push_back("impact speed " + std::to_string(ev->v_in) +
                                        " m/s exceeds omega_max at t = " + std::to_string(ev->t_event));
            }
            s = apply_event(*ev, params, sc.coupling);
            // A stick attempt that cannot hold only reverses the friction
            // direction; it is not a mode change and is not reported.
            if (s.mode != ev->state_at_event.mode) traj.events.push_back(*ev);
        }
    };

    record(s);
    for (long long k = 1; k <= n_samples; ++k) {
        const double t0 = static_cast<double>(k - 1) * sc.dt;
        for (int j = 1; j <= substeps; ++j) {
            const double t1 = j == substeps ? static_cast<double>(k) * sc.dt
                                            : t0 + j * (sc.dt / substeps);
            advance_to(t1);
        }
        record(s);
    }
    return traj;
}

double mechanical_energy(const SimState& state, const SystemParams& params) {
    return 0.5 * params.m2 * state.v2 * state.v2 +
           elastic_energy(state_penetration(state, params), params);
}

}  // namespace vibro
