#pragma once

#include "qfold/pb_poly.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qfold::sim {

/// Layered R_Y ansatz: one rotation layer, then `layers` repetitions of a
/// linear CNOT chain (i controls i+1) followed by another rotation layer.
/// Parameter l * n_qubits + q is the angle on qubit q in rotation layer l.
struct Ansatz {
    int n_qubits = 1;
    int layers = 2;

    int param_count() const { return n_qubits * (layers + 1); }
};

/// Real amplitudes; basis index bit k is qubit k.
using StateVector = std::vector<double>;

inline constexpr int kMaxQubits = 30;

void apply_ry(StateVector& state, int qubit, double theta);
void apply_cnot(StateVector& state, int control, int target);

StateVector evolve(const Ansatz& ansatz, std::span<const double> params);
double norm2(const StateVector& state);

/// Diagonal operator stored as a value table over the lowest `bits` qubits;
/// entries for larger indices are looked up with the high bits masked off.
class DiagonalOperator {
public:
    DiagonalOperator() = default;
    DiagonalOperator(const pb::Polynomial& poly, int n_qubits);
    DiagonalOperator(std::vector<double> table, int bits, int n_qubits);

    double operator()(std::uint64_t index) const { return table_[index & mask_]; }
    int n_qubits() const { return n_qubits_; }
    int table_bits() const { return bits_; }
    const std::vector<double>& table() const { return table_; }

private:
    std::vector<double> table_;
    int bits_ = 0;
    int n_qubits_ = 0;
    std::uint64_t mask_ = 0;
};

double expectation(const StateVector& state, const DiagonalOperator& op);
double expectation(const StateVector& state, const std::function<double(std::uint64_t)>& energy);
std::vector<double> probabilities(const StateVector& state);

/// Mean of the lowest-energy probability mass alpha, taking a fraction of the
/// boundary state. Pairs are (energy, probability).
double cvar(std::vector<std::pair<double, double>> values, double alpha);

/// CVaR over a fixed diagonal with the energy order sorted once.
class CvarEvaluator {
public:
    CvarEvaluator(const DiagonalOperator& op, double alpha);

    double operator()(const StateVector& state) const;
    double alpha() const { return alpha_; }

private:
    std::vector<std::uint32_t> order_;
    std::vector<double> energies_;
    double alpha_;
};

struct ShotTable {
    int n_qubits = 0;
    std::uint64_t shots = 0;
    std::map<std::uint64_t, std::uint64_t> counts;
};

/// Bitstring with character k holding qubit k.
std::string index_to_bits(std::uint64_t index, int n_qubits);
std::uint64_t bits_to_index(const std::string& bits);

ShotTable sample(const StateVector& state, std::uint64_t shots, std::uint64_t seed);
void write_shots(std::ostream& out, const ShotTable& table);
ShotTable read_shots(std::istream& in);

using Objective = std::function<double(const StateVector&)>;

/// Component p is [f(theta + pi/2 e_p) - f(theta - pi/2 e_p)] / 2.
std::vector<double> parameter_shift_gradient(const Ansatz& ansatz, std::span<const double> params,
                                             const Objective& objective);

/// Parameter-shift gradients of several diagonal expectations sharing the 2P
/// shifted circuits; row m is the gradient of <ops[m]>.
std::vector<std::vector<double>> parameter_shift_jacobian(const Ansatz& ansatz, std::span<const double> params,
                                                          const std::vector<const DiagonalOperator*>& ops);

/// Adjoint-mode gradient of sum_m weights[m] <ops[m]>.
std::vector<double> adjoint_gradient(const Ansatz& ansatz, std::span<const double> params,
                                     const std::vector<const DiagonalOperator*>& ops,
                                     std::span<const double> weights);

}  // namespace qfold::sim
