#include "qfold/sim.hpp"

#include "qfold/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace qfold::sim {

namespace {

constexpr std::size_t kBlock = 4096;

// Sum of f(i) over [0, n) in fixed-size blocks so the rounding pattern does not
// depend on how the work is split.
template <typename F>
double block_sum(std::size_t n, F&& f) {
    double total = 0.0;
    for (std::size_t b = 0; b < n; b += kBlock) {
        const std::size_t e = std::min(n, b + kBlock);
        double part = 0.0;
        for (std::size_t i = b; i < e; ++i) part += f(i);
        total += part;
    }
    return total;
}

void check_qubit(const StateVector& state, int q) {
    if (q < 0 || (std::size_t{1} << q) >= state.size())
        throw Error(ErrorCode::IndexOutOfRange, "qubit " + std::to_string(q));
}

struct Gate {
    bool rotation;
    int a;  // target qubit, or control for CNOT
    int param;
};

std::vector<Gate> circuit(const Ansatz& ansatz) {
    std::vector<Gate> gates;
    const int n = ansatz.n_qubits;
    for (int l = 0; l <= ansatz.layers; ++l) {
        if (l > 0)
            for (int q = 0; q + 1 < n; ++q) gates.push_back({false, q, -1});
        for (int q = 0; q < n; ++q) gates.push_back({true, q, l * n + q});
    }
    return gates;
}

void check_ansatz(const Ansatz& ansatz, std::span<const double> params) {
    if (ansatz.n_qubits < 1 || ansatz.n_qubits > kMaxQubits)
        throw Error(ErrorCode::InvalidArgument, "ansatz needs 1.." + std::to_string(kMaxQubits) + " qubits");
    if (ansatz.layers < 0) throw Error(ErrorCode::InvalidArgument, "negative layer count");
    if (static_cast<int>(params.size()) != ansatz.param_count())
        throw Error(ErrorCode::ParamLengthMismatch, "expected " + std::to_string(ansatz.param_count()) +
                                                        " parameters, got " + std::to_string(params.size()));
}

}  // namespace

void apply_ry(StateVector& state, int qubit, double theta) {
    check_qubit(state, qubit);
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t b = 0; b < state.size(); b += 2 * stride) {
        for (std::size_t i = b; i < b + stride; ++i) {
            const double a0 = state[i];
            const double a1 = state[i + stride];
            state[i] = c * a0 - s * a1;
            state[i + stride] = s * a0 + c * a1;
        }
    }
}

void apply_cnot(StateVector& state, int control, int target) {
    check_qubit(state, control);
    check_qubit(state, target);
    if (control == target) throw Error(ErrorCode::InvalidArgument, "CNOT control equals target");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < state.size(); ++i)
        if ((i & cbit) && !(i & tbit)) std::swap(state[i], state[i | tbit]);
}

StateVector evolve(const Ansatz& ansatz, std::span<const double> params) {
    check_ansatz(ansatz, params);
    StateVector state(std::size_t{1} << ansatz.n_qubits, 0.0);
    state[0] = 1.0;
    for (const auto& g : circuit(ansatz)) {
        if (g.rotation) apply_ry(state, g.a, params[static_cast<std::size_t>(g.param)]);
        else apply_cnot(state, g.a, g.a + 1);
    }
    return state;
}

double norm2(const StateVector& state) {
    return block_sum(state.size(), [&](std::size_t i) { return state[i] * state[i]; });
}

DiagonalOperator::DiagonalOperator(const pb::Polynomial& poly, int n_qubits) : n_qubits_(n_qubits) {
    const pb::VarMask support = poly.support();
    bits_ = support == 0 ? 0 : 64 - std::countl_zero(support);
    if (bits_ > n_qubits)
        throw Error(ErrorCode::InvalidArgument, "operator uses variable " + std::to_string(bits_ - 1) + " beyond " +
                                                    std::to_string(n_qubits) + " qubits");
    table_ = pb::value_table(poly, bits_);
    mask_ = (std::uint64_t{1} << bits_) - 1;
}

DiagonalOperator::DiagonalOperator(std::vector<double> table, int bits, int n_qubits)
    : table_(std::move(table)), bits_(bits), n_qubits_(n_qubits), mask_((std::uint64_t{1} << bits) - 1) {
    if (table_.size() != (std::size_t{1} << bits) || bits > n_qubits)
        throw Error(ErrorCode::LengthMismatch, "diagonal table size does not match its bit count");
}

double expectation(const StateVector& state, const DiagonalOperator& op) {
    return block_sum(state.size(), [&](std::size_t i) { return state[i] * state[i] * op(i); });
}

double expectation(const StateVector& state, const std::function<double(std::uint64_t)>& energy) {
    return block_sum(state.size(), [&](std::size_t i) {
        const double p = state[i] * state[i];
        return p == 0.0 ? 0.0 : p * energy(i);
    });
}

std::vector<double> probabilities(const StateVector& state) {
    std::vector<double> p(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) p[i] = state[i] * state[i];
    return p;
}

double cvar(std::vector<std::pair<double, double>> values, double alpha) {
    if (values.empty()) throw Error(ErrorCode::EmptyDistribution, "cvar of an empty distribution");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
    std::stable_sort(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double remaining = alpha;
    double acc = 0.0;
    for (const auto& [e, p] : values) {
        if (p <= 0.0) continue;
        const double take = std::min(p, remaining);
        acc += take * e;
        remaining -= take;
        if (remaining <= 0.0) break;
    }
    const double mass = alpha - std::max(remaining, 0.0);
    if (mass <= 0.0) throw Error(ErrorCode::EmptyDistribution, "distribution carries no probability");
    return acc / mass;
}

CvarEvaluator::CvarEvaluator(const DiagonalOperator& op, double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
    const std::size_t n = std::size_t{1} << op.n_qubits();
    energies_.resize(n);
    for (std::size_t i = 0; i < n; ++i) energies_[i] = op(i);
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::stable_sort(order_.begin(), order_.end(),
                     [this](std::uint32_t a, std::uint32_t b) { return energies_[a] < energies_[b]; });
}

double CvarEvaluator::operator()(const StateVector& state) const {
    if (state.size() != order_.size()) throw Error(ErrorCode::LengthMismatch, "state size does not match operator");
    double remaining = alpha_;
    double acc = 0.0;
    for (std::uint32_t i : order_) {
        const double p = state[i] * state[i];
        if (p == 0.0) continue;
        const double take = std::min(p, remaining);
        acc += take * energies_[i];
        remaining -= take;
        if (remaining <= 0.0) break;
    }
    const double mass = alpha_ - std::max(remaining, 0.0);
    if (mass <= 0.0) throw Error(ErrorCode::EmptyDistribution, "state carries no probability");
    return acc / mass;
}

std::string index_to_bits(std::uint64_t index, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int k = 0; k < n_qubits; ++k)
        if ((index >> k) & 1) s[static_cast<std::size_t>(k)] = '1';
    return s;
}

std::uint64_t bits_to_index(const std::string& bits) {
    if (bits.size() > 64) throw Error(ErrorCode::InvalidArgument, "bitstring longer than 64");
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1') idx |= std::uint64_t{1} << k;
        else if (bits[k] != '0') throw Error(ErrorCode::ParseError, "bitstring must contain only 0/1");
    }
    return idx;
}

ShotTable sample(const StateVector& state, std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) throw Error(ErrorCode::InvalidArgument, "shots must be at least 1");
    if (state.empty() || !std::has_single_bit(state.size()))
        throw Error(ErrorCode::InvalidArgument, "state size must be a power of two");
    std::vector<double> cdf(state.size());
    double run = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        run += state[i] * state[i];
        cdf[i] = run;
    }
    if (!(run > 0.0)) throw Error(ErrorCode::EmptyDistribution, "state carries no probability");
    ShotTable table;
    table.n_qubits = std::countr_zero(state.size());
    table.shots = shots;
    std::mt19937_64 rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * run;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        ++table.counts[static_cast<std::uint64_t>(it - cdf.begin())];
    }
    return table;
}

void write_shots(std::ostream& out, const ShotTable& table) {
    out << "bitstring\tcount\n";
    for (const auto& [idx, c] : table.counts) out << index_to_bits(idx, table.n_qubits) << '\t' << c << '\n';
}

ShotTable read_shots(std::istream& in) {
    ShotTable table;
    std::string line;
    bool header = true;
    int width = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("bitstring", 0) == 0) continue;
        }
        std::istringstream ss(line);
        std::string bits;
        std::uint64_t count = 0;
        if (!(ss >> bits >> count)) throw Error(ErrorCode::ParseError, "bad shot line '" + line + "'");
        if (width < 0) width = static_cast<int>(bits.size());
        if (static_cast<int>(bits.size()) != width) throw Error(ErrorCode::LengthMismatch, "ragged bitstrings");
        table.counts[bits_to_index(bits)] += count;
        table.shots += count;
    }
    table.n_qubits = std::max(width, 0);
    return table;
}

std::vector<double> parameter_shift_gradient(const Ansatz& ansatz, std::span<const double> params,
                                             const Objective& objective) {
    check_ansatz(ansatz, params);
    std::vector<double> shifted(params.begin(), params.end());
    std::vector<double> grad(params.size());
    constexpr double h = std::numbers::pi / 2;
    for (std::size_t p = 0; p < params.size(); ++p) {
        shifted[p] = params[p] + h;
        const double plus = objective(evolve(ansatz, shifted));
        shifted[p] = params[p] - h;
        const double minus = objective(evolve(ansatz, shifted));
        shifted[p] = params[p];
        grad[p] = 0.5 * (plus - minus);
    }
    return grad;
}

std::vector<std::vector<double>> parameter_shift_jacobian(const Ansatz& ansatz, std::span<const double> params,
                                                          const std::vector<const DiagonalOperator*>& ops) {
    check_ansatz(ansatz, params);
    std::vector<std::vector<double>> jac(ops.size(), std::vector<double>(params.size()));
    std::vector<double> shifted(params.begin(), params.end());
    constexpr double h = std::numbers::pi / 2;
    for (std::size_t p = 0; p < params.size(); ++p) {
        shifted[p] = params[p] + h;
        const StateVector plus = evolve(ansatz, shifted);
        shifted[p] = params[p] - h;
        const StateVector minus = evolve(ansatz, shifted);
        shifted[p] = params[p];
        for (std::size_t m = 0; m < ops.size(); ++m)
            jac[m][p] = 0.5 * (expectation(plus, *ops[m]) - expectation(minus, *ops[m]));
    }
    return jac;
}

std::vector<double> adjoint_gradient(const Ansatz& ansatz, std::span<const double> params,
                                     const std::vector<const DiagonalOperator*>& ops,
                                     std::span<const double> weights) {
    if (ops.size() != weights.size()) throw Error(ErrorCode::LengthMismatch, "one weight per operator");
    StateVector phi = evolve(ansatz, params);
    StateVector lam(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        double h = 0.0;
        for (std::size_t m = 0; m < ops.size(); ++m)
            if (weights[m] != 0.0) h += weights[m] * (*ops[m])(i);
        lam[i] = h * phi[i];
    }
    std::vector<double> grad(params.size(), 0.0);
    const auto gates = circuit(ansatz);
    for (auto g = gates.rbegin(); g != gates.rend(); ++g) {
        if (!g->rotation) {
            apply_cnot(phi, g->a, g->a + 1);
            apply_cnot(lam, g->a, g->a + 1);
            continue;
        }
        // d/dtheta R_Y = (1/2) J R_Y with J = [[0,-1],[1,0]]; the factor 2 of
        // the real expectation cancels the 1/2.
        const std::size_t stride = std::size_t{1} << g->a;
        const std::size_t half = phi.size() / 2;
        grad[static_cast<std::size_t>(g->param)] = block_sum(half, [&](std::size_t k) {
            const std::size_t i = ((k & ~(stride - 1)) << 1) | (k & (stride - 1));
            return lam[i + stride] * phi[i] - lam[i] * phi[i + stride];
        });
        const double theta = params[static_cast<std::size_t>(g->param)];
        apply_ry(phi, g->a, -theta);
        apply_ry(lam, g->a, -theta);
    }
    return grad;
}

}  // namespace qfold::sim
