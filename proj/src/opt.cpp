#include "qfold/opt.hpp"

#include "qfold/error.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>
#include <tuple>

namespace qfold::opt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs task(i) for i in [0, count) on up to `workers` threads; the first
// exception is rethrown after all threads stop.
template <typename Task>
void parallel_for(int count, int workers, Task&& task) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

nlohmann::json entry_json(const TraceEntry& e) {
    nlohmann::json j{{"run", e.run},
                     {"restart", e.restart},
                     {"iteration", e.iteration},
                     {"objective", e.objective},
                     {"best", e.best}};
    if (!e.duals.empty()) {
        j["lagrangian"] = e.lagrangian;
        j["violation"] = e.violation;
        j["duals"] = e.duals;
    }
    if (!e.params.empty()) j["params"] = e.params;
    return j;
}

}  // namespace

// ---- minimizer ---------------------------------------------------------------

MinimizeResult minimize_linear_tr(const ScalarFunction& f, std::vector<double> x0,
                                  const LinearTrustRegionOptions& options) {
    if (!(options.rho_begin > 0.0) || !(options.rho_end > 0.0) || options.rho_end > options.rho_begin)
        throw Error(ErrorCode::InvalidArgument, "need 0 < rho_end <= rho_begin");
    const int n = static_cast<int>(x0.size());
    MinimizeResult res;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++res.evaluations;
        return f(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    };
    Eigen::VectorXd start = Eigen::Map<Eigen::VectorXd>(x0.data(), n);
    if (n == 0) {
        res.f = eval(start);
        return res;
    }

    double rho = options.rho_begin;
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> fv(static_cast<std::size_t>(n + 1));
    auto reset_simplex = [&](int pivot) {
        const Eigen::VectorXd base = pts[static_cast<std::size_t>(pivot)];
        const double fb = fv[static_cast<std::size_t>(pivot)];
        pts[0] = base;
        fv[0] = fb;
        for (int i = 1; i <= n && res.evaluations < options.max_evaluations; ++i) {
            pts[static_cast<std::size_t>(i)] = base;
            pts[static_cast<std::size_t>(i)](i - 1) += rho;
            fv[static_cast<std::size_t>(i)] = eval(pts[static_cast<std::size_t>(i)]);
        }
    };
    fv[0] = eval(start);
    reset_simplex(0);

    auto best_index = [&] {
        return static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    };

    while (res.evaluations < options.max_evaluations) {
        const int b = best_index();
        const Eigen::VectorXd& xb = pts[static_cast<std::size_t>(b)];
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd r(n);
        std::vector<int> rows;
        for (int i = 0, row = 0; i <= n; ++i) {
            if (i == b) continue;
            A.row(row) = (pts[static_cast<std::size_t>(i)] - xb).transpose();
            r(row) = fv[static_cast<std::size_t>(i)] - fv[static_cast<std::size_t>(b)];
            rows.push_back(i);
            ++row;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) {
            reset_simplex(b);
            continue;
        }
        const Eigen::MatrixXd inv = lu.inverse();
        const Eigen::VectorXd g = inv * r;

        // Geometry: far vertices, or a vertex nearly in the span of the others
        // (large column of the inverse).
        int far = -1;
        double far_dist = 0.0;
        int flat = -1;
        double flat_measure = 0.0;
        for (int row = 0; row < n; ++row) {
            const double d = A.row(row).norm();
            if (d > far_dist) far_dist = d, far = row;
            const double c = inv.col(row).norm() * rho;
            if (c > flat_measure) flat_measure = c, flat = row;
        }
        const bool bad_geometry = far_dist > 2.0 * rho || flat_measure > 10.0;

        const double gnorm = g.norm();
        bool improved = false;
        if (gnorm > 0.0 && std::isfinite(gnorm)) {
            const Eigen::VectorXd xt = xb - (rho / gnorm) * g;
            const double ft = eval(xt);
            if (ft < fv[static_cast<std::size_t>(b)]) {
                improved = true;
                // Replace the vertex whose removal keeps the largest volume.
                const Eigen::VectorXd c = inv.transpose() * (xt - xb);
                int drop = b;
                double weight = std::abs(1.0 - c.sum());
                for (int row = 0; row < n; ++row)
                    if (std::abs(c(row)) > weight) weight = std::abs(c(row)), drop = rows[static_cast<std::size_t>(row)];
                pts[static_cast<std::size_t>(drop)] = xt;
                fv[static_cast<std::size_t>(drop)] = ft;
            }
        }
        if (improved) continue;
        if (res.evaluations >= options.max_evaluations) break;
        if (bad_geometry) {
            const int row = far_dist > 2.0 * rho ? far : flat;
            Eigen::VectorXd dir = inv.col(row);
            dir /= dir.norm();
            if (dir.dot(A.row(row).transpose()) < 0.0) dir = -dir;
            const int j = rows[static_cast<std::size_t>(row)];
            pts[static_cast<std::size_t>(j)] = xb + rho * dir;
            fv[static_cast<std::size_t>(j)] = eval(pts[static_cast<std::size_t>(j)]);
            continue;
        }
        if (rho <= options.rho_end) break;
        rho = rho <= 3.0 * options.rho_end ? options.rho_end : 0.5 * rho;
    }
    const int b = best_index();
    res.x.assign(pts[static_cast<std::size_t>(b)].data(), pts[static_cast<std::size_t>(b)].data() + n);
    res.f = fv[static_cast<std::size_t>(b)];
    return res;
}

// ---- traces ------------------------------------------------------------------

void write_trace_jsonl(std::ostream& out, const OptTrace& trace) {
    for (const auto& e : trace.entries) out << entry_json(e).dump() << '\n';
}

// ---- CVaR-VQE ----------------------------------------------------------------

std::vector<double> initial_params(int count, std::uint64_t seed, int restart, double lo, double hi) {
    if (!(lo >= 0.0 && hi <= kTwoPi + 1e-12 && lo < hi))
        throw Error(ErrorCode::InvalidArgument, "initialization window must lie inside [0, 2pi]");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);
    std::vector<double> x(static_cast<std::size_t>(count));
    for (auto& v : x) v = lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return x;
}

VqeResult run_cvar_vqe(const ham::ProblemInstance& instance, const sim::Ansatz& ansatz, const CvarVqeConfig& cfg) {
    if (instance.mode != ham::Mode::PolyFit)
        throw Error(ErrorCode::InvalidArgument, "CVaR-VQE takes a PolyFit instance");
    if (ansatz.n_qubits != instance.layout.total_qubits())
        throw Error(ErrorCode::InvalidArgument, "ansatz width differs from the instance qubit count");
    if (cfg.restarts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one restart");

    const sim::DiagonalOperator op(instance.objective, ansatz.n_qubits);
    const sim::CvarEvaluator cvar(op, cfg.alpha);
    const auto t0 = Clock::now();

    VqeResult out;
    out.restarts.resize(static_cast<std::size_t>(cfg.restarts));
    std::vector<std::vector<TraceEntry>> traces(static_cast<std::size_t>(cfg.restarts));

    parallel_for(cfg.restarts, cfg.workers, [&](int r) {
        double lo = cfg.init_lo;
        double hi = cfg.init_hi;
        if (cfg.sweep_windows) {
            lo = 0.25 * kTwoPi * (r % 4);
            hi = lo + 0.25 * kTwoPi;
        }
        auto& trace = traces[static_cast<std::size_t>(r)];
        double best = std::numeric_limits<double>::infinity();
        auto objective = [&](std::span<const double> x) {
            if (cfg.time_limit_s > 0.0 && seconds_since(t0) > cfg.time_limit_s)
                throw Error(ErrorCode::BudgetExceeded, "CVaR-VQE exceeded its time limit");
            const double v = cvar(sim::evolve(ansatz, x));
            best = std::min(best, v);
            TraceEntry e;
            e.run = r;
            e.restart = r;
            e.iteration = static_cast<int>(trace.size());
            e.objective = v;
            e.best = best;
            if (cfg.snapshot_every > 0 && e.iteration % cfg.snapshot_every == 0) e.params.assign(x.begin(), x.end());
            trace.push_back(std::move(e));
            return v;
        };
        LinearTrustRegionOptions o;
        o.rho_begin = cfg.rho_begin;
        o.rho_end = cfg.rho_end;
        o.max_evaluations = cfg.max_iterations;
        const auto m = minimize_linear_tr(objective, initial_params(ansatz.param_count(), cfg.seed, r, lo, hi), o);
        out.restarts[static_cast<std::size_t>(r)] = {r, m.x, m.f, m.evaluations};
    });

    out.trace.snapshot_every = cfg.snapshot_every;
    for (auto& t : traces) out.trace.entries.insert(out.trace.entries.end(), t.begin(), t.end());
    const auto best = std::min_element(out.restarts.begin(), out.restarts.end(),
                                       [](const auto& a, const auto& b) { return a.objective < b.objective; });
    out.best_params = best->params;
    out.best_objective = best->objective;
    out.best_restart = best->restart;
    return out;
}

// ---- VQEC ----------------------------------------------------------------------

GradientMethod gradient_from_string(const std::string& name) {
    if (name == "parameter-shift" || name == "shift") return GradientMethod::ParameterShift;
    if (name == "adjoint") return GradientMethod::Adjoint;
    throw Error(ErrorCode::InvalidArgument, "unknown gradient method '" + name + "'");
}

VqecOperators::VqecOperators(const ham::ProblemInstance& instance) {
    if (instance.mode != ham::Mode::VQEC) throw Error(ErrorCode::InvalidArgument, "VQEC needs a VQEC instance");
    const int n = instance.layout.total_qubits();
    ops.emplace_back(instance.objective, n);
    for (const auto& c : instance.constraints) ops.emplace_back(c.poly, n);
}

std::vector<const sim::DiagonalOperator*> VqecOperators::pointers() const {
    std::vector<const sim::DiagonalOperator*> p;
    for (const auto& o : ops) p.push_back(&o);
    return p;
}

namespace {

std::vector<double> all_expectations(const sim::StateVector& psi, const VqecOperators& ops) {
    std::vector<double> v;
    v.reserve(ops.ops.size());
    for (const auto& o : ops.ops) v.push_back(sim::expectation(psi, o));
    return v;
}

void project(std::vector<double>& theta) {
    for (auto& t : theta) t = std::clamp(t, 0.0, kTwoPi);
}

}  // namespace

PdpStepInfo pdp_step(const sim::Ansatz& ansatz, const VqecOperators& ops, PdpState& state, double nu, double mu,
                     GradientMethod gradient) {
    const std::size_t m_count = ops.ops.size() - 1;
    if (state.duals.size() != m_count) throw Error(ErrorCode::LengthMismatch, "one dual per constraint");
    const auto ptrs = ops.pointers();

    PdpStepInfo info;
    info.values = all_expectations(sim::evolve(ansatz, state.theta), ops);
    info.lagrangian = info.values[0];
    for (std::size_t m = 0; m < m_count; ++m) {
        info.lagrangian += state.duals[m] * info.values[m + 1];
        info.violation += std::max(0.0, info.values[m + 1]);
    }

    std::vector<std::vector<double>> jac;
    auto weighted_gradient = [&](const std::vector<double>& w) {
        if (gradient == GradientMethod::Adjoint) return sim::adjoint_gradient(ansatz, state.theta, ptrs, w);
        if (jac.empty()) jac = sim::parameter_shift_jacobian(ansatz, state.theta, ptrs);
        std::vector<double> g(state.theta.size(), 0.0);
        for (std::size_t m = 0; m < w.size(); ++m)
            if (w[m] != 0.0)
                for (std::size_t p = 0; p < g.size(); ++p) g[p] += w[m] * jac[m][p];
        return g;
    };

    std::vector<double> w(m_count + 1, 1.0);
    for (std::size_t m = 0; m < m_count; ++m) w[m + 1] = state.duals[m];
    const auto g = weighted_gradient(w);

    std::vector<double> theta_t = state.theta;
    for (std::size_t p = 0; p < theta_t.size(); ++p) theta_t[p] -= nu * g[p];
    project(theta_t);
    std::vector<double> w_t(m_count + 1, 1.0);
    for (std::size_t m = 0; m < m_count; ++m) w_t[m + 1] = std::max(0.0, state.duals[m] + nu * info.values[m + 1]);

    const auto values_t = all_expectations(sim::evolve(ansatz, theta_t), ops);
    const auto g2 = weighted_gradient(w_t);
    for (std::size_t p = 0; p < state.theta.size(); ++p) state.theta[p] -= mu * g2[p];
    project(state.theta);
    for (std::size_t m = 0; m < m_count; ++m) state.duals[m] = std::max(0.0, state.duals[m] + mu * values_t[m + 1]);
    return info;
}

VqecRun run_vqec_pdp(const ham::ProblemInstance& instance, const VqecOperators& ops, const sim::Ansatz& ansatz,
                     const VqecConfig& cfg, int restart, OptTrace* trace, const RunContext& ctx) {
    if (instance.mode != ham::Mode::VQEC) throw Error(ErrorCode::InvalidArgument, "VQEC needs a VQEC instance");
    if (ansatz.n_qubits != instance.layout.total_qubits())
        throw Error(ErrorCode::InvalidArgument, "ansatz width differs from the instance qubit count");
    if (!(cfg.nu > 0.0) || !(cfg.mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "step sizes must be positive");
    const auto t0 = Clock::now();

    PdpState state{initial_params(ansatz.param_count(), cfg.seed, restart, cfg.init_lo, cfg.init_hi),
                   std::vector<double>(ops.ops.size() - 1, 0.0)};
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (cfg.time_limit_s > 0.0 && seconds_since(t0) > cfg.time_limit_s)
            throw Error(ErrorCode::BudgetExceeded, "VQEC run exceeded its time limit");
        std::vector<double> snapshot;
        if (trace && cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0) snapshot = state.theta;
        const auto info = pdp_step(ansatz, ops, state, cfg.nu, cfg.mu, cfg.gradient);
        if (!std::isfinite(info.lagrangian) || std::abs(info.lagrangian) > cfg.divergence_ceiling)
            throw Error(ErrorCode::Divergence, "Lagrangian " + std::to_string(info.lagrangian) + " at iteration " +
                                                   std::to_string(it));
        best = std::min(best, info.values[0]);
        if (trace) {
            TraceEntry e;
            e.run = ctx.run_id;
            e.restart = restart;
            e.iteration = it;
            e.objective = info.values[0];
            e.best = best;
            e.lagrangian = info.lagrangian;
            e.violation = info.violation;
            e.duals = state.duals;
            e.params = std::move(snapshot);
            trace->entries.push_back(std::move(e));
        }
    }

    VqecRun run;
    run.nu = cfg.nu;
    run.mu = cfg.mu;
    run.restart = restart;
    const auto psi = sim::evolve(ansatz, state.theta);
    const auto values = all_expectations(psi, ops);
    run.objective = values[0];
    run.lagrangian = values[0];
    for (std::size_t m = 0; m + 1 < values.size(); ++m) {
        run.lagrangian += state.duals[m] * values[m + 1];
        run.violation += std::max(0.0, values[m + 1]);
    }
    if (ctx.ground) run.ground_probability = sim::expectation(psi, *ctx.ground);
    run.params = std::move(state.theta);
    run.duals = std::move(state.duals);
    return run;
}

GridReport grid_search(const ham::ProblemInstance& instance, const sim::Ansatz& ansatz, const VqecConfig& cfg,
                       const sim::DiagonalOperator* ground, GridRanking ranking) {
    if (cfg.nu_grid.empty() || cfg.mu_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty step-size grid");
    if (cfg.restarts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one restart");
    const VqecOperators ops(instance);
    const int per_point = cfg.restarts;
    const int tasks = static_cast<int>(cfg.nu_grid.size() * cfg.mu_grid.size()) * per_point;

    std::vector<VqecRun> runs(static_cast<std::size_t>(tasks));
    std::vector<OptTrace> traces(static_cast<std::size_t>(tasks));
    parallel_for(tasks, cfg.workers, [&](int t) {
        const int point = t / per_point;
        const int restart = t % per_point;
        VqecConfig c = cfg;
        c.nu = cfg.nu_grid[static_cast<std::size_t>(point) / cfg.mu_grid.size()];
        c.mu = cfg.mu_grid[static_cast<std::size_t>(point) % cfg.mu_grid.size()];
        auto& out = runs[static_cast<std::size_t>(t)];
        try {
            out = run_vqec_pdp(instance, ops, ansatz, c, restart, &traces[static_cast<std::size_t>(t)], {ground, t});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Divergence) throw;
            out = VqecRun{};
            out.nu = c.nu;
            out.mu = c.mu;
            out.restart = restart;
            out.diverged = true;
            out.objective = out.lagrangian = out.violation = std::numeric_limits<double>::infinity();
        }
    });

    GridReport report;
    report.ranking = ranking;
    report.trace.snapshot_every = cfg.snapshot_every;
    for (auto& t : traces) report.trace.entries.insert(report.trace.entries.end(), t.entries.begin(), t.entries.end());
    report.runs = std::move(runs);
    auto key = [ranking](const VqecRun& r) {
        if (ranking == GridRanking::GroundProbability)
            return std::make_tuple(r.diverged, -r.ground_probability, r.violation, r.lagrangian);
        return std::make_tuple(r.diverged, r.lagrangian, r.violation, -r.ground_probability);
    };
    std::stable_sort(report.runs.begin(), report.runs.end(),
                     [&](const VqecRun& a, const VqecRun& b) { return key(a) < key(b); });
    return report;
}

void write_grid_jsonl(std::ostream& out, const GridReport& report) {
    int rank = 0;
    for (const auto& r : report.runs) {
        nlohmann::json j{{"rank", rank++},
                         {"nu", r.nu},
                         {"mu", r.mu},
                         {"restart", r.restart},
                         {"diverged", r.diverged},
                         {"objective", r.objective},
                         {"lagrangian", r.lagrangian},
                         {"violation", r.violation},
                         {"ground_probability", r.ground_probability},
                         {"duals", r.duals}};
        out << j.dump() << '\n';
    }
}

}  // namespace qfold::opt
