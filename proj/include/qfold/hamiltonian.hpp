#pragma once

#include "qfold/lattice.hpp"
#include "qfold/pb_poly.hpp"
#include "qfold/polyfit.hpp"
#include "qfold/scoring.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qfold::ham {

/// Qubit map: configuration bits 0..4N-11, then one interaction ancilla per
/// pair (m, n) with n >= m + 2 in lexicographic order.
class EncodingLayout {
public:
    EncodingLayout() = default;
    explicit EncodingLayout(int n_beads);

    int n_beads() const { return n_beads_; }
    int config_bits() const { return config_bits_; }
    int ancilla_count() const { return static_cast<int>(pairs_.size()); }
    int total_qubits() const { return config_bits_ + ancilla_count(); }
    int ancilla_index(int m, int n) const;
    const std::vector<std::pair<int, int>>& interaction_pairs() const { return pairs_; }

    bool operator==(const EncodingLayout&) const = default;

private:
    int n_beads_ = 0;
    int config_bits_ = 0;
    std::vector<std::pair<int, int>> pairs_;
};

enum class Mode { PolyFit, VQEC };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct Penalties {
    double back = 50.0;
    double redun = 50.0;
    double olap = 50.0;

    bool operator==(const Penalties&) const = default;
};

struct Constraint {
    int m = 0;
    int n = 0;
    pb::Polynomial poly;  // 2 - D_mn, feasible when <= 0
};

struct ProblemInstance {
    EncodingLayout layout;
    Mode mode = Mode::PolyFit;
    std::string peptide;
    Penalties penalties;
    pb::Polynomial objective;
    std::vector<Constraint> constraints;
    double r2_tol = polyfit::kDefaultR2Tol;
};

/// Indicator of a codeword at turn j (2 <= j <= N-2) over q_{phi+2}..q_{phi+5}.
pb::Polynomial indicator_poly(const EncodingLayout& layout, int j, std::uint8_t code);

/// Like indicator_poly but also covers the fixed turn 0 (a constant) and turn 1
/// (free bits q0 q1 with suffix 00).
pb::Polynomial turn_indicator(const EncodingLayout& layout, int j, std::uint8_t code);

std::array<pb::Polynomial, 3> position_polys(const EncodingLayout& layout, int m);
pb::Polynomial distance_poly(const EncodingLayout& layout, int m, int n);

pb::Polynomial build_h_back(const EncodingLayout& layout, double lambda_back);
pb::Polynomial build_h_redun(const EncodingLayout& layout, double lambda_redun);
pb::Polynomial build_h_int(const EncodingLayout& layout, const scoring::EnergyMatrix& matrix,
                           const std::string& peptide);

/// PolyFit: objective = H_back + H_redun + H_int + sum of overlap penalties for
/// separations >= 3 (fits keyed by separation). VQEC: objective without H_olap
/// and one constraint 2 - D_mn per pair n - m >= 2.
ProblemInstance assemble(Mode mode, const EncodingLayout& layout, const std::string& peptide,
                         const scoring::EnergyMatrix& matrix, const Penalties& penalties,
                         const std::map<int, polyfit::ChebyshevFit>& fits = {});

/// Fits every separation the peptide needs, then assembles.
ProblemInstance build_instance(Mode mode, const std::string& peptide, const scoring::EnergyMatrix& matrix,
                               const Penalties& penalties = {}, double r2_tol = polyfit::kDefaultR2Tol,
                               int d0 = polyfit::kDefaultD0);

struct TermReport {
    pb::Stats objective;
    std::size_t constraint_terms = 0;
    std::size_t total_terms = 0;
};

TermReport term_report(const ProblemInstance& instance);

struct ResourceCounts {
    int config_bits = 0;
    long long ancillas = 0;
    long long total = 0;
    long long slack = 0;
};

/// Qubit counts for a chain of n_beads without building a layout, so lengths
/// beyond the 64-variable polynomial limit can be tabulated.
ResourceCounts resource_counts(int n_beads);

/// Extra qubits a slack-variable encoding of 2 <= D_mn <= 2(m-n)^2 would add:
/// ceil(log2(2 (n-m)^2 - 1)) per pair with n - m >= 2.
long long slack_qubits(int n_beads);

inline constexpr int kInstanceFormatVersion = 1;

nlohmann::json to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& doc);

}  // namespace qfold::ham
