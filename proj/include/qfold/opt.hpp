#pragma once

#include "qfold/hamiltonian.hpp"
#include "qfold/sim.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qfold::opt {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---- derivative-free minimizer -------------------------------------------

struct LinearTrustRegionOptions {
    double rho_begin = 0.5;
    double rho_end = 1e-3;
    int max_evaluations = 1000;
};

struct MinimizeResult {
    std::vector<double> x;
    double f = 0.0;
    int evaluations = 0;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// COBYLA-style minimization without constraints: a linear model interpolated
/// on a simplex of n + 1 points, steps of length rho along the negative model
/// gradient, geometry repair, and rho halved down to rho_end.
MinimizeResult minimize_linear_tr(const ScalarFunction& f, std::vector<double> x0,
                                  const LinearTrustRegionOptions& options = {});

// ---- traces ----------------------------------------------------------------

struct TraceEntry {
    int run = 0;
    int restart = 0;
    int iteration = 0;
    double objective = 0.0;
    double best = 0.0;
    double lagrangian = 0.0;
    double violation = 0.0;
    std::vector<double> duals;
    std::vector<double> params;  // filled every `snapshot_every` iterations
};

struct OptTrace {
    int snapshot_every = 0;  // 0: no parameter snapshots
    std::vector<TraceEntry> entries;
};

void write_trace_jsonl(std::ostream& out, const OptTrace& trace);

// ---- CVaR-VQE ----------------------------------------------------------------

struct CvarVqeConfig {
    double alpha = 0.1;
    int max_iterations = 600;  // objective evaluations per restart
    int restarts = 20;
    double init_lo = 1.5 * std::numbers::pi;
    double init_hi = kTwoPi;
    bool sweep_windows = false;  // restart r draws from quarter-window r mod 4
    std::uint64_t seed = 0;
    double rho_begin = 0.5;
    double rho_end = 1e-3;
    int workers = 1;
    int snapshot_every = 0;
    double time_limit_s = 0.0;
};

struct RestartResult {
    int restart = 0;
    std::vector<double> params;
    double objective = 0.0;
    int evaluations = 0;
};

struct VqeResult {
    std::vector<double> best_params;
    double best_objective = 0.0;
    int best_restart = 0;
    std::vector<RestartResult> restarts;
    OptTrace trace;
};

/// Initial angles for a restart, uniform on [lo, hi).
std::vector<double> initial_params(int count, std::uint64_t seed, int restart, double lo, double hi);

VqeResult run_cvar_vqe(const ham::ProblemInstance& instance, const sim::Ansatz& ansatz, const CvarVqeConfig& cfg);

// ---- VQEC primal-dual perturbation -------------------------------------------

enum class GradientMethod { ParameterShift, Adjoint };

GradientMethod gradient_from_string(const std::string& name);

struct VqecConfig {
    double nu = 0.1;
    double mu = 1.0;
    std::vector<double> nu_grid{0.01, 0.05, 0.1, 0.2, 0.5};
    std::vector<double> mu_grid{0.1, 0.5, 1.0, 2.0, 5.0};
    int restarts = 20;
    int max_iterations = 100;
    double init_lo = 1.5 * std::numbers::pi;
    double init_hi = kTwoPi;
    std::uint64_t seed = 0;
    double divergence_ceiling = 1e5;
    GradientMethod gradient = GradientMethod::ParameterShift;
    int workers = 1;
    int snapshot_every = 0;
    double time_limit_s = 0.0;
};

/// Operators of a VQEC instance: index 0 is the objective, 1..M the
/// constraints 2 - D_mn.
struct VqecOperators {
    std::vector<sim::DiagonalOperator> ops;

    explicit VqecOperators(const ham::ProblemInstance& instance);
    std::vector<const sim::DiagonalOperator*> pointers() const;
};

struct PdpState {
    std::vector<double> theta;
    std::vector<double> duals;  // lambda_1..lambda_M; lambda_0 = 1 is implicit
};

struct PdpStepInfo {
    std::vector<double> values;  // F_0..F_M at theta
    double lagrangian = 0.0;
    double violation = 0.0;
};

/// One perturb-then-update iteration with constant steps nu and mu.
PdpStepInfo pdp_step(const sim::Ansatz& ansatz, const VqecOperators& ops, PdpState& state, double nu, double mu,
                     GradientMethod gradient);

struct VqecRun {
    double nu = 0.0;
    double mu = 0.0;
    int restart = 0;
    std::vector<double> params;
    std::vector<double> duals;
    double objective = 0.0;   // F_0 at the final parameters
    double lagrangian = 0.0;  // with the final duals
    double violation = 0.0;   // sum of positive constraint values
    double ground_probability = 0.0;
    bool diverged = false;
};

/// Ground-state indicator used to score runs; optional.
struct RunContext {
    const sim::DiagonalOperator* ground = nullptr;
    int run_id = 0;
};

/// Runs one restart at (cfg.nu, cfg.mu). Throws Divergence when the
/// Lagrangian leaves [-ceiling, ceiling].
VqecRun run_vqec_pdp(const ham::ProblemInstance& instance, const VqecOperators& ops, const sim::Ansatz& ansatz,
                     const VqecConfig& cfg, int restart, OptTrace* trace = nullptr, const RunContext& ctx = {});

enum class GridRanking { Lagrangian, GroundProbability };

struct GridReport {
    GridRanking ranking = GridRanking::Lagrangian;
    std::vector<VqecRun> runs;  // best first
    OptTrace trace;
};

/// Every (nu, mu) pair times cfg.restarts runs. Ranked by (Lagrangian,
/// violation, -ground probability) or, with GroundProbability ranking,
/// (-ground probability, violation, Lagrangian). Diverged runs sort last.
GridReport grid_search(const ham::ProblemInstance& instance, const sim::Ansatz& ansatz, const VqecConfig& cfg,
                       const sim::DiagonalOperator* ground = nullptr, GridRanking ranking = GridRanking::Lagrangian);

void write_grid_jsonl(std::ostream& out, const GridReport& report);

}  // namespace qfold::opt
