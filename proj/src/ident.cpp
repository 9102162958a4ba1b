#include "vibro/ident.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "vibro/simplex.hpp"

namespace vibro {

namespace {

/// Weighted mismatch of one simulated scenario against the trace.
double mismatch(const Scenario& sc, const FitProblem& problem, const Eigen::VectorXd* v_meas) {
    try {
        const Trajectory traj = simulate(sc, problem.integrator);
        const auto n = static_cast<std::size_t>(problem.trace.size());
        if (traj.samples.size() != n) return kObjectivePenalty;
        double ex = 0.0;
        double ev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = traj.samples[i].state.x2 - problem.trace.x2[static_cast<Eigen::Index>(i)];
            ex += dx * dx;
            if (v_meas) {
                const double dv = traj.samples[i].state.v2 - (*v_meas)[static_cast<Eigen::Index>(i)];
                ev += dv * dv;
            }
        }
        const double value =
            std::sqrt((problem.weights.position * ex + problem.weights.velocity * ev) / static_cast<double>(n));
        return std::isfinite(value) ? std::min(value, kObjectivePenalty) : kObjectivePenalty;
    } catch (const std::exception&) {
        return kObjectivePenalty;
    }
}

std::optional<Eigen::VectorXd> measured_velocity(const FitProblem& problem) {
    if (problem.weights.velocity <= 0) return std::nullopt;
    return estimate_velocity(problem.trace.x2, problem.trace.fs, problem.weights.fc);
}

Scenario aligned(Scenario sc, const MeasuredTrace& trace) {
    sc.dt = 1.0 / trace.fs;
    sc.t_end = static_cast<double>(trace.size() - 1) * sc.dt;
    return sc;
}

bool in_bounds(const Eigen::VectorXd& x, const FitProblem& problem) {
    if (x.size() != static_cast<Eigen::Index>(problem.free.size())) return false;
    for (std::size_t j = 0; j < problem.free.size(); ++j) {
        const double v = x[static_cast<Eigen::Index>(j)];
        if (!(v >= problem.free[j].lower && v <= problem.free[j].upper)) return false;
    }
    return true;
}

}  // namespace

std::string_view to_string(FitParam p) noexcept {
    switch (p) {
        case FitParam::K: return "k";
        case FitParam::Alpha: return "alpha";
        case FitParam::Xc: return "xc";
        case FitParam::B: return "b";
        case FitParam::N: return "n";
    }
    return "?";
}

std::optional<FitParam> fit_param_from_string(std::string_view s) {
    for (FitParam p : {FitParam::K, FitParam::Alpha, FitParam::Xc, FitParam::B, FitParam::N}) {
        if (to_string(p) == s) return p;
    }
    if (s == "x_c") return FitParam::Xc;
    return std::nullopt;
}

double get_param(const SystemParams& params, FitParam which) {
    switch (which) {
        case FitParam::K: return params.k;
        case FitParam::Alpha: return params.alpha;
        case FitParam::Xc: return params.x_c;
        case FitParam::B: return params.b;
        case FitParam::N: return params.n;
    }
    return 0.0;
}

void set_param(SystemParams& params, FitParam which, double value) {
    switch (which) {
        case FitParam::K: params.k = value; break;
        case FitParam::Alpha: params.alpha = value; break;
        case FitParam::Xc: params.x_c = value; break;
        case FitParam::B: params.b = value; break;
        case FitParam::N: params.n = value; break;
    }
}

void require_valid(const FitProblem& problem) {
    if (problem.free.empty()) throw std::invalid_argument("fit: at least one free parameter is required");
    for (std::size_t i = 0; i < problem.free.size(); ++i) {
        const auto& fp = problem.free[i];
        if (!std::isfinite(fp.lower) || !std::isfinite(fp.upper) || !(fp.lower < fp.upper))
            throw std::invalid_argument("fit: bounds of " + std::string(to_string(fp.which)) +
                                        " must be finite and ordered");
        for (std::size_t j = 0; j < i; ++j) {
            if (problem.free[j].which == fp.which)
                throw std::invalid_argument("fit: duplicate free parameter " + std::string(to_string(fp.which)));
        }
    }
    if (problem.trace.size() < 3) throw std::invalid_argument("fit: trace too short");
    if (!(problem.weights.position >= 0) || !(problem.weights.velocity >= 0) ||
        problem.weights.position + problem.weights.velocity <= 0)
        throw std::invalid_argument("fit: weights must be non-negative and not all zero");
    require_valid(problem.integrator);
}

Scenario candidate_scenario(const Eigen::VectorXd& candidate, const FitProblem& problem) {
    Scenario sc = aligned(problem.scenario, problem.trace);
    for (std::size_t j = 0; j < problem.free.size(); ++j)
        set_param(sc.params, problem.free[j].which, candidate[static_cast<Eigen::Index>(j)]);
    return sc;
}

double position_rmse(const Trajectory& traj, const MeasuredTrace& trace) {
    const auto n = static_cast<std::size_t>(trace.size());
    if (traj.samples.size() != n || n == 0) throw std::invalid_argument("position_rmse: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = traj.samples[i].state.x2 - trace.x2[static_cast<Eigen::Index>(i)];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double objective(const Eigen::VectorXd& candidate, const FitProblem& problem) {
    if (!in_bounds(candidate, problem)) return kObjectivePenalty;
    const auto v_meas = measured_velocity(problem);
    return mismatch(candidate_scenario(candidate, problem), problem, v_meas ? &*v_meas : nullptr);
}

FitResult fit(const FitProblem& problem, const Eigen::VectorXd& init, const FitConfig& cfg) {
    require_valid(problem);
    if (!in_bounds(init, problem)) throw std::invalid_argument("fit: initial point outside the bounds");
    if (cfg.n_starts < 1 || cfg.max_evals < 1) throw std::invalid_argument("fit: bad budget");

    const auto d = static_cast<Eigen::Index>(problem.free.size());
    Eigen::VectorXd lo(d), span(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        lo[j] = problem.free[static_cast<std::size_t>(j)].lower;
        span[j] = problem.free[static_cast<std::size_t>(j)].upper - lo[j];
    }
    auto to_physical = [&](const Eigen::VectorXd& u) {
        return Eigen::VectorXd((lo + u.cwiseProduct(span)).cwiseMin(lo + span).cwiseMax(lo));
    };

    const auto v_meas = measured_velocity(problem);
    const Eigen::VectorXd* v_ptr = v_meas ? &*v_meas : nullptr;
    FitResult out;
    auto eval_physical = [&](const Eigen::VectorXd& x) {
        ++out.n_evals;
        return mismatch(candidate_scenario(x, problem), problem, v_ptr);
    };

    const int reserve = cfg.check_identifiability ? 2 * static_cast<int>(d) : 0;
    const int per_start = std::max(1, (cfg.max_evals - reserve) / cfg.n_starts);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SimplexOptions opt;
    opt.tol = cfg.tol;
    opt.initial_step = cfg.initial_step;
    opt.max_evals = per_start;

    std::optional<SimplexResult> best;
    for (int s = 0; s < cfg.n_starts; ++s) {
        Eigen::VectorXd u0(d);
        if (s == 0) {
            u0 = (init - lo).cwiseQuotient(span);
        } else {
            for (Eigen::Index j = 0; j < d; ++j) u0[j] = unit(rng);
        }
        SimplexResult r = nelder_mead_box<double>(
            [&](const Eigen::VectorXd& u) { return eval_physical(to_physical(u)); },
            u0, opt);
        if (!best || r.value < best->value) best = std::move(r);
    }

    out.params_hat = to_physical(best->x);
    out.objective = best->value;
    out.converged = best->converged;
    const Scenario sc = candidate_scenario(out.params_hat, problem);
    out.params = sc.params;
    try {
        out.trace_hat = simulate(sc, problem.integrator);
        out.rmse = position_rmse(out.trace_hat, problem.trace);
    } catch (const std::exception&) {
        out.rmse = kObjectivePenalty;
    }

    if (cfg.check_identifiability) {
        for (Eigen::Index j = 0; j < d; ++j) {
            Eigen::VectorXd a = out.params_hat;
            Eigen::VectorXd b = out.params_hat;
            a[j] = problem.free[static_cast<std::size_t>(j)].lower;
            b[j] = problem.free[static_cast<std::size_t>(j)].upper;
            const double fa = eval_physical(a);
            const double fb = eval_physical(b);
            const double scale = std::max({std::abs(out.objective), std::abs(fa), std::abs(fb), 1e-300});
            if (std::max({fa, fb, out.objective}) - std::min({fa, fb, out.objective}) <= 1e-12 * scale)
                out.unidentifiable.push_back(problem.free[static_cast<std::size_t>(j)].which);
        }
    }
    return out;
}

Eigen::MatrixXd profile_coupling(const FitProblem& problem, const std::vector<double>& k_grid,
                                 const std::vector<double>& alpha_grid) {
    for (const auto& fp : problem.free) {
        const std::vector<double>* grid = fp.which == FitParam::K       ? &k_grid
                                          : fp.which == FitParam::Alpha ? &alpha_grid
                                                                        : nullptr;
        if (!grid) continue;
        for (double v : *grid) {
            if (v < fp.lower || v > fp.upper)
                throw std::invalid_argument("profile_coupling: grid value outside the bounds");
        }
    }
    const auto rows = static_cast<Eigen::Index>(k_grid.size());
    const auto cols = static_cast<Eigen::Index>(alpha_grid.size());
    Eigen::MatrixXd surface(rows, cols);
    const auto v_meas = measured_velocity(problem);
    const Eigen::VectorXd* v_ptr = v_meas ? &*v_meas : nullptr;

    const Scenario base = aligned(problem.scenario, problem.trace);
    const Eigen::Index cells = rows * cols;
    auto work = [&](Eigen::Index first, Eigen::Index stride) {
        for (Eigen::Index c = first; c < cells; c += stride) {
            Scenario sc = base;
            sc.params.k = k_grid[static_cast<std::size_t>(c / cols)];
            sc.params.alpha = alpha_grid[static_cast<std::size_t>(c % cols)];
            surface(c / cols, c % cols) = mismatch(sc, problem, v_ptr);
        }
    };
    const auto workers = static_cast<Eigen::Index>(
        std::clamp<unsigned>(std::thread::hardware_concurrency(), 1u, 16u));
    if (workers <= 1 || cells < 2) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (Eigen::Index w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }
    return surface;
}

MeasuredTrace synthesize_trace(const Scenario& scenario, const IntegratorConfig& cfg, double noise_std,
                               std::uint64_t seed) {
    const Trajectory traj = simulate(scenario, cfg);
    const auto n = static_cast<Eigen::Index>(traj.samples.size());
    Eigen::VectorXd t(n), x1(n), x2(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = traj.samples[static_cast<std::size_t>(i)].state;
        t[i] = static_cast<double>(i) * traj.dt;
        x1[i] = s.x1;
        x2[i] = s.x2 + (noise_std > 0 ? noise_std * noise(rng) : 0.0);
    }
    return make_trace(std::move(t), std::move(x2), std::move(x1));
}

}  // namespace vibro
