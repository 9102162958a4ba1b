#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "vibro/hybrid_sim.hpp"

using namespace vibro;

namespace {

SimState slip_contact(double p, double v2, const SystemParams& params, double v1 = 0.0) {
    SimState s;
    s.v1 = v1;
    s.x2 = params.x_c + p;
    s.v2 = v2;
    s.mode = Mode::SlipContact;
    s.slip_dir = sgn(s.v1 - s.v2);
    return s;
}

// Drives a state with rk4_step until the first localized event.
std::optional<Event> run_until_event(SimState s, const SystemParams& p, const IntegratorConfig& cfg,
                                     int max_steps) {
    for (int i = 0; i < max_steps; ++i) {
        const SimState next = rk4_step(s, cfg.dt, p);
        if (auto ev = detect_and_locate(s, next, p, cfg)) return ev;
        s = next;
    }
    return std::nullopt;
}

double final_x2(const Scenario& sc, double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    return simulate(sc, cfg).samples.back().state.x2;
}

}  // namespace

TEST_SUITE("hybrid_sim") {

TEST_CASE("integrator config validation") {
    IntegratorConfig cfg;
    CHECK_NOTHROW(require_valid(cfg));
    cfg.tol_event = cfg.dt;
    CHECK_THROWS_AS(require_valid(cfg), std::invalid_argument);
    cfg = {};
    cfg.dt = 0;
    CHECK_THROWS_AS(require_valid(cfg), std::invalid_argument);
    cfg = {};
    cfg.eps_v = 0;
    CHECK_THROWS_AS(require_valid(cfg), std::invalid_argument);
}

TEST_CASE("scenario invariants") {
    auto sc = make_idle_impulse(steel_preset(), 1.0);
    CHECK(sc.params.v_platform == 0.0);
    CHECK(sc.initial.x2 < sc.params.x_c);
    CHECK_NOTHROW(require_valid(sc));
    sc.params.v_platform = 0.1;
    CHECK_THROWS_AS(require_valid(sc), std::invalid_argument);

    auto drag = make_constant_drag(aluminium_preset());
    CHECK(drag.params.v_platform == 0.1);
    CHECK(drag.initial.v1 == 0.1);
    CHECK_NOTHROW(require_valid(drag));
    drag.initial.v1 = 0.0;
    CHECK_THROWS_AS(require_valid(drag), std::invalid_argument);
}

TEST_CASE("stick on a constant-velocity platform advances exactly") {
    const auto p = aluminium_preset();
    SimState s;
    s.x2 = -0.1;
    s.v1 = s.v2 = p.v_platform;
    s.mode = Mode::StickFree;
    IntegratorConfig cfg;
    const SimState n = step(s, p, cfg);
    CHECK(n.x2 - s.x2 == doctest::Approx(p.v_platform * cfg.dt).epsilon(1e-12));
    CHECK(n.v2 == p.v_platform);
    CHECK(n.mode == Mode::StickFree);
}

TEST_CASE("uniform Coulomb deceleration is integrated exactly") {
    const auto p = steel_preset();
    SimState s;
    s.x2 = -0.5;
    s.v2 = 0.8;
    s.mode = Mode::SlipFree;
    s.slip_dir = -1;
    IntegratorConfig cfg;
    const SimState n = step(s, p, cfg);
    const double a = -p.b / p.m2;
    CHECK(std::abs((n.v2 - s.v2) - a * cfg.dt) < 1e-15);
    CHECK(std::abs((n.x2 - s.x2) - (s.v2 * cfg.dt + 0.5 * a * cfg.dt * cfg.dt)) < 1e-15);
}

TEST_CASE("a contact step agrees with a ten times finer integration to fourth order") {
    const auto p = steel_preset();
    const SimState s = slip_contact(5e-4, 0.3, p);
    const double h = 2e-5;
    const SimState coarse = rk4_step(s, h, p);
    SimState fine = s;
    for (int i = 0; i < 10; ++i) fine = rk4_step(fine, h / 10, p);
    // local error of RK4 is O(h^5) with h^5 * omega^5 * amplitude ~ 1e-13 here
    CHECK(std::abs(coarse.x2 - fine.x2) < 1e-12);
    CHECK(std::abs(coarse.v2 - fine.v2) < 1e-9);
}

TEST_CASE("step rejects a state inconsistent with its mode") {
    const auto p = steel_preset();
    IntegratorConfig cfg;
    SimState s;
    s.v2 = 0.5;
    s.mode = Mode::StickFree;
    CHECK_THROWS_AS(step(s, p, cfg), std::invalid_argument);

    SimState c;
    c.x2 = p.x_c - 1e-3;
    c.mode = Mode::SlipContact;
    c.slip_dir = 1;
    CHECK_THROWS_AS(step(c, p, cfg), std::invalid_argument);

    SimState nan;
    nan.x2 = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step(nan, p, cfg), NumericalError);
}

TEST_CASE("classify picks the mode from the continuous state") {
    const auto p = steel_preset();
    IntegratorConfig cfg;
    SimState s;
    s.x2 = -1e-3;
    CHECK(classify(s, p, cfg).mode == Mode::StickFree);
    s.v2 = 1.0;
    auto c = classify(s, p, cfg);
    CHECK(c.mode == Mode::SlipFree);
    CHECK(c.slip_dir == -1);
    s.x2 = 1e-4;
    s.v2 = 0.0;
    // the wall pushes harder than stiction can hold, so the body slides back
    // and the platform moves forward relative to it
    c = classify(s, p, cfg);
    CHECK(c.mode == Mode::SlipContact);
    CHECK(c.slip_dir == 1);
}

TEST_CASE("impact event lies on the wall") {
    auto p = steel_preset();
    p.x_c = 0.25;
    IntegratorConfig cfg;
    for (double v : {0.05, 0.3, 1.0, 1.9}) {
        SimState s;
        s.x2 = p.x_c - 1e-4;
        s.v2 = v;
        s.mode = Mode::SlipFree;
        s.slip_dir = -1;
        const auto ev = run_until_event(s, p, cfg, 100000);
        REQUIRE(ev);
        CHECK(ev->kind == EventKind::Impact);
        CHECK(std::abs(ev->state_at_event.x2 - p.x_c) <= 1e-7);
        CHECK(ev->v_in == ev->state_at_event.v2);
        CHECK(ev->v_in > 0);
    }
}

TEST_CASE("fast withdrawal separates at the raw-force zero before p reaches 0") {
    // A platform retreating faster than the body drags it off the wall; the
    // friction pull drives 1 + 1.5 alpha p_dot through zero while p > 0.
    auto p = steel_preset();
    p.alpha = 1.0;
    const double p0 = 5e-3;
    const double v0 = -0.65;
    const double v1 = -2.0;
    IntegratorConfig cfg;
    const auto ev = run_until_event(slip_contact(p0, v0, p, v1), p, cfg, 100000);
    REQUIRE(ev);
    CHECK(ev->kind == EventKind::Separation);
    CHECK(ev->state_at_event.x2 - p.x_c > 1e-5);

    // Dense oracle: fine fixed-step integration of m2 x'' = -b - k p (1 + 1.5 alpha x'),
    // root of 1 + 1.5 alpha v by linear interpolation.
    auto rhs = [&](double x, double v) { return (-p.b - p.k * x * (1.0 + 1.5 * p.alpha * v)) / p.m2; };
    double x = p0;
    double v = v0;
    double t = 0;
    const double h = 1e-8;
    double t_root = -1;
    while (t < 0.05 && x > 0) {
        const double g0 = 1.0 + 1.5 * p.alpha * v;
        const double k1x = v, k1v = rhs(x, v);
        const double k2x = v + 0.5 * h * k1v, k2v = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        const double k3x = v + 0.5 * h * k2v, k3v = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        const double k4x = v + h * k3v, k4v = rhs(x + h * k3x, v + h * k3v);
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        t += h;
        const double g1 = 1.0 + 1.5 * p.alpha * v;
        if (g0 > 0 && g1 <= 0) {
            t_root = t - h * g1 / (g1 - g0);
            break;
        }
    }
    REQUIRE(t_root > 0);
    CHECK(x > 0);
    CHECK(std::abs(ev->t_event - t_root) < 1e-8);

    const SimState after = apply_event(*ev, p);
    CHECK(after.mode == Mode::SlipFree);
    CHECK(after.vec() == ev->state_at_event.vec());
}

TEST_CASE("a freely rebounding body keeps a non-negative raw force until p = 0") {
    auto p = steel_preset();
    p.alpha = 1.0;
    IntegratorConfig cfg;
    const auto ev = run_until_event(slip_contact(1e-3, -0.6, p), p, cfg, 100000);
    REQUIRE(ev);
    CHECK(ev->kind == EventKind::Separation);
    CHECK(std::abs(ev->state_at_event.x2 - p.x_c) < 1e-7);
}

TEST_CASE("slip on a moving platform sticks at the closed-form time") {
    auto p = aluminium_preset();
    p.x_c = 10.0;
    Scenario sc = make_constant_drag(p, 1.0, 0.05);
    sc.initial.v2 = 0.0;
    const auto traj = simulate(sc);
    REQUIRE(traj.count(EventKind::StickOnset) == 1);
    const auto& ev = traj.events.front();
    CHECK(ev.kind == EventKind::StickOnset);
    CHECK(std::abs(ev.t_event - p.v_platform * p.m2 / p.b) < 1e-8);
    CHECK(traj.samples.back().state.mode == Mode::StickFree);
    CHECK(traj.samples.back().state.v2 == p.v_platform);
}

TEST_CASE("apply_event transitions") {
    const auto p = steel_preset();

    Event impact;
    impact.kind = EventKind::Impact;
    impact.state_at_event.x2 = p.x_c;
    impact.state_at_event.v2 = 0.7;
    impact.state_at_event.mode = Mode::SlipFree;
    impact.state_at_event.slip_dir = -1;
    const SimState a = apply_event(impact, p);
    CHECK(a.mode == Mode::SlipContact);
    CHECK(a.vec() == impact.state_at_event.vec());

    Event stick;
    stick.kind = EventKind::StickOnset;
    stick.state_at_event.x2 = -0.2;
    stick.state_at_event.v1 = 0.1;
    stick.state_at_event.v2 = 0.1 - 3e-12;
    stick.state_at_event.mode = Mode::SlipFree;
    stick.state_at_event.slip_dir = 1;
    const SimState b = apply_event(stick, p);
    CHECK(b.mode == Mode::StickFree);
    CHECK(b.z_dot() == 0.0);

    Event sep;
    sep.kind = EventKind::Separation;
    sep.state_at_event.x2 = p.x_c;
    sep.state_at_event.mode = Mode::StickContact;
    const SimState c = apply_event(sep, p);
    CHECK(c.mode == Mode::StickFree);

    Event bad;
    bad.kind = EventKind::Separation;
    bad.state_at_event.mode = Mode::SlipFree;
    bad.state_at_event.slip_dir = 1;
    CHECK_THROWS_AS(apply_event(bad, p), std::invalid_argument);
    bad.kind = EventKind::SlipOnset;
    CHECK_THROWS_AS(apply_event(bad, p), std::invalid_argument);
    bad.kind = EventKind::Impact;
    bad.state_at_event.mode = Mode::StickContact;
    CHECK_THROWS_AS(apply_event(bad, p), std::invalid_argument);
}

TEST_CASE("idle impulse: one impact, rebound and Coulomb stop") {
    const auto traj = simulate(make_idle_impulse(steel_preset(), 1.0));
    CHECK(traj.count(EventKind::Impact) == 1);
    CHECK(traj.count(EventKind::Separation) == 1);
    CHECK(traj.events.front().kind == EventKind::Impact);
    CHECK(traj.events.front().v_in == doctest::Approx(0.979).epsilon(1e-3));
    const auto& last = traj.samples.back().state;
    CHECK(last.mode == Mode::StickFree);
    CHECK(last.v2 == 0.0);
    CHECK(last.x2 < 0.0);
    CHECK(traj.warnings.empty());
}

TEST_CASE("idle impulse with the body at rest stays at rest") {
    const auto sc = make_idle_impulse(steel_preset(), 0.0);
    const auto traj = simulate(sc);
    CHECK(traj.events.empty());
    for (const auto& s : traj.samples) {
        CHECK(s.state.x2 == sc.initial.x2);
        CHECK(s.state.v2 == 0.0);
        CHECK(s.f == 0.0);
    }
}

TEST_CASE("constant drag: series of impacts with shrinking rebounds") {
    const auto traj = simulate(make_constant_drag(aluminium_preset()));
    CHECK(traj.count(EventKind::Impact) >= 2);
    const auto& last = traj.samples.back().state;
    CHECK(is_contact(last.mode));
    CHECK(std::abs(last.v2) < 1e-4);
    CHECK(last.x2 - aluminium_preset().x_c > 0.0);
    CHECK(last.x2 - aluminium_preset().x_c < 1e-4);
}

TEST_CASE("samples form a uniform grid") {
    const auto traj = simulate(make_constant_drag(aluminium_preset(), 2e-3, 0.3));
    REQUIRE(traj.samples.size() == 1501);
    for (std::size_t i = 0; i < traj.samples.size(); ++i)
        CHECK(traj.samples[i].state.t == static_cast<double>(i) * traj.dt);
}

TEST_CASE("zero horizon gives an empty trajectory") {
    const auto traj = simulate(make_idle_impulse(steel_preset(), 1.0, 5e-3, 0.0));
    CHECK(traj.samples.empty());
    CHECK(traj.events.empty());
}

TEST_CASE("mechanical energy") {
    auto p = steel_preset();
    SimState s;
    CHECK(mechanical_energy(s, p) == 0.0);
    s.v2 = 1.0;
    CHECK(mechanical_energy(s, p) == doctest::Approx(0.026));
    p.k = 1e4;
    p.n = 1.0;
    const SimState c = slip_contact(0.001, 0.0, p);
    CHECK(mechanical_energy(c, p) == doctest::Approx(0.005));
}

TEST_CASE("mechanical energy never grows in idle impulses") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        auto p = trial % 2 ? steel_preset() : aluminium_preset();
        p.alpha = 0.05 + 1.5 * u(rng);
        p.n = u(rng) < 0.5 ? 1.0 : 1.5;
        p.k = p.n == 1.0 ? 1e4 : 3e5;
        const auto traj = simulate(make_idle_impulse(p, 0.2 + 1.5 * u(rng), 2e-3, 0.3));
        double prev = mechanical_energy(traj.samples.front().state, p);
        for (const auto& s : traj.samples) {
            const double e = mechanical_energy(s.state, p);
            CHECK(e <= prev * (1.0 + 1e-6) + 1e-15);
            prev = e;
        }
    }
}

TEST_CASE("step halving shows fourth-order convergence away from events") {
    // Smooth slip interval: free deceleration, then a contact arc with no event.
    auto p = steel_preset();
    Scenario sc;
    sc.params = p;
    sc.params.v_platform = 0.0;
    sc.initial = slip_contact(4e-4, 0.05, p);
    sc.t_end = 1e-3;
    sc.dt = 1e-3;
    std::vector<double> x;
    for (double dt : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) x.push_back(final_x2(sc, dt));
    const double r1 = std::abs(x[0] - x[1]) / std::abs(x[1] - x[2]);
    const double r2 = std::abs(x[1] - x[2]) / std::abs(x[2] - x[3]);
    CHECK(r1 > 12.0);
    CHECK(r2 > 12.0);
}

TEST_CASE("step halving converges at least linearly through events") {
    auto sc = make_idle_impulse(steel_preset(), 1.0, 5e-3, 0.02);
    std::vector<double> x;
    for (double dt : {1e-4, 5e-5, 2.5e-5}) x.push_back(final_x2(sc, dt));
    CHECK(std::abs(x[1] - x[2]) <= 0.5 * std::abs(x[0] - x[1]) + 1e-12);
}

TEST_CASE("simulation is deterministic") {
    const auto sc = make_constant_drag(aluminium_preset(), 2e-3, 1.0);
    const auto a = simulate(sc);
    const auto b = simulate(sc);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].state == b.samples[i].state);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) CHECK(a.events[i].t_event == b.events[i].t_event);
}

TEST_CASE("too many events in one step raise a chattering error") {
    auto sc = make_idle_impulse(steel_preset(), 1.0, 1e-3, 0.05);
    sc.dt = 0.02;
    IntegratorConfig cfg;
    cfg.dt = 0.02;
    cfg.max_events = 1;
    CHECK_THROWS_AS(simulate(sc, cfg), ChatteringError);
}

TEST_CASE("non-finite dynamics raise a numerical error") {
    auto p = aluminium_preset();
    p.x_c = 10.0;
    Scenario sc = make_constant_drag(p, 1.0, 0.01);
    sc.coupling = RobustControlled{[](double t) { return t > 0.005 ? std::nan("") : 0.0; }};
    CHECK_THROWS_AS(simulate(sc), NumericalError);
}

TEST_CASE("impacts above omega_max are flagged") {
    const auto traj = simulate(make_idle_impulse(steel_preset(), 2.5, 5e-3, 0.05));
    CHECK(traj.count(EventKind::Impact) >= 1);
    CHECK_FALSE(traj.warnings.empty());
}

}
