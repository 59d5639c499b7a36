#pragma once

#include "qfold/lattice.hpp"

#include <array>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

namespace qfold::scoring {

/// The 20 standard residues in the row order used by bundled matrices.
inline constexpr std::string_view kResidueOrder = "CMFILVWYAGTSNQDEHRKP";

/// Contact energies in RT units indexed by one-letter residue code.
class EnergyMatrix {
public:
    EnergyMatrix();

    double at(char a, char b) const;
    double at_index(int i, int j) const { return values_[i][j]; }
    int index_of(char residue) const;
    bool has(char residue) const;

    void set(char a, char b, double value);

private:
    std::array<std::array<double, 20>, 20> values_{};
    std::array<int, 26> index_{};
};

struct NNScaling {
    LatticeKind lattice = LatticeKind::FCC;
    int level = 1;
    double factor = 1.0;
};

/// FCC: 1, 1/sqrt(2), 1/sqrt(3) for levels 1..3; TET: 1, sqrt(3/8) for levels 1..2.
NNScaling nn_scaling(LatticeKind lattice, int level);

/// CSV with a header row and first column of one-letter codes; '#' lines are
/// comments. Asymmetry beyond 1e-9 is rejected. Rows may list the full square
/// or only the upper/lower triangle (blank cells mirror their partner).
EnergyMatrix load_energy_matrix(std::istream& in);
EnergyMatrix load_energy_matrix_file(const std::filesystem::path& path);
void write_energy_matrix(std::ostream& out, const EnergyMatrix& mat);

/// Hydrophobic-polar model: -1 for H-H pairs, 0 otherwise.
EnergyMatrix hp_matrix(std::string_view hydrophobic = "ACFILMVW");

double pair_energy(const EnergyMatrix& mat, char a, char b, const NNScaling& scale);

/// Accepts one-letter strings ("KLVFFA") or separated three-letter codes or
/// full names ("Lys-Leu-Val", "lysine leucine"); returns upper-case one-letter.
std::string normalize_peptide(std::string_view text);

/// Directory holding bundled matrices: $QFOLD_DATA if set, else the build-time
/// data directory.
std::filesystem::path data_dir();
std::filesystem::path default_matrix_path();

}  // namespace qfold::scoring
