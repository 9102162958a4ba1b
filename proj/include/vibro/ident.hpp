#pragma once

// Identification of contact parameters (k, alpha, x_c, optionally b and n)
// from a measured or synthetic position trace by trajectory matching.
//
// k and alpha enter the contact force mostly through their product, so the
// objective has a long shallow valley along that direction; profile_coupling
// exposes it.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vibro/hybrid_sim.hpp"
#include "vibro/signal_io.hpp"

namespace vibro {

enum class FitParam { K, Alpha, Xc, B, N };

std::string_view to_string(FitParam p) noexcept;
std::optional<FitParam> fit_param_from_string(std::string_view s);

double get_param(const SystemParams& params, FitParam which);
void set_param(SystemParams& params, FitParam which, double value);

struct FreeParam {
    FitParam which;
    double lower;
    double upper;
};

struct FitWeights {
    double position = 1.0;
    double velocity = 0.0;          ///< [s^2], weight of the filtered-velocity residual
    double fc = kDefaultCutoff;     ///< cutoff used for the measured velocity estimate
};

/// Window half-width around a user estimate of x_c [m].
inline constexpr double kDefaultXcWindow = 1e-3;

/// Objective value for candidates whose simulation fails [m].
inline constexpr double kObjectivePenalty = 1e3;

struct FitProblem {
    MeasuredTrace trace;
    Scenario scenario;  ///< template; t_end and dt are taken from the trace
    std::vector<FreeParam> free;
    FitWeights weights;
    IntegratorConfig integrator;
};

/// Throws std::invalid_argument on empty/ill-ordered bounds or a bad template.
void require_valid(const FitProblem& problem);

struct FitConfig {
    int max_evals = 2000;          ///< total budget over all starts
    int n_starts = 5;              ///< first start is the init, the rest are seeded draws in the box
    std::uint64_t seed = 0;
    double tol = 1e-6;             ///< simplex diameter in bound-normalized units
    double initial_step = 0.1;     ///< normalized
    bool check_identifiability = true;
};

struct FitResult {
    Eigen::VectorXd params_hat;  ///< in the order of FitProblem::free
    SystemParams params;         ///< template params with params_hat applied
    double objective = 0.0;
    double rmse = 0.0;           ///< position residual [m]
    int n_evals = 0;
    bool converged = false;
    Trajectory trace_hat;
    std::vector<FitParam> unidentifiable;  ///< free parameters with a flat objective
};

/// Scenario used to simulate a candidate, aligned to the trace time grid.
Scenario candidate_scenario(const Eigen::VectorXd& candidate, const FitProblem& problem);

/// Root-mean-square position residual between a trajectory and the trace [m].
double position_rmse(const Trajectory& traj, const MeasuredTrace& trace);

/// Weighted RMS trajectory mismatch, sqrt(w_x mean(e_x^2) + w_v mean(e_v^2)).
/// Out-of-bound or failed candidates return kObjectivePenalty.
double objective(const Eigen::VectorXd& candidate, const FitProblem& problem);

FitResult fit(const FitProblem& problem, const Eigen::VectorXd& init, const FitConfig& cfg = {});

/// Objective over a k x alpha grid (rows follow k_grid, columns alpha_grid).
/// Cells are evaluated concurrently; the result does not depend on scheduling.
Eigen::MatrixXd profile_coupling(const FitProblem& problem, const std::vector<double>& k_grid,
                                 const std::vector<double>& alpha_grid);

/// Simulated trace of a scenario with additive Gaussian position noise.
MeasuredTrace synthesize_trace(const Scenario& scenario, const IntegratorConfig& cfg,
                               double noise_std = 0.0, std::uint64_t seed = 0);

}  // namespace vibro
