#pragma once

#include "qfold/hamiltonian.hpp"
#include "qfold/lattice.hpp"
#include "qfold/search.hpp"
#include "qfold/sim.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qfold::analysis {

using Point = std::array<double, 3>;

inline constexpr double kBondLength = 3.8;

/// Angstroms per stored lattice unit: 3.8/sqrt(2) on FCC, 3.8/sqrt(3) on TET.
double angstrom_scale(LatticeKind lattice);
std::vector<Point> to_angstrom(const Conformation& conf);

struct DecodedEntry {
    TurnSequence turns;
    std::string config_bits;
    double probability = 0.0;
    double energy = 0.0;
    double rg = 0.0;
    bool redundant = false;
    bool backtrack = false;
    bool overlap = false;

    bool valid() const { return !redundant && !backtrack && !overlap; }
};

/// Entries sorted by energy, ties by turn string. Invalid entries are kept
/// with their flags; discarded_mass is whatever could not be decoded at all.
struct DecodedEnsemble {
    int n_beads = 0;
    std::vector<DecodedEntry> entries;
    double discarded_mass = 0.0;
    std::optional<double> e_star;

    double total_mass() const;
    const DecodedEntry* modal() const;
};

enum class MassMode { Residue, Unit };

/// Average residue masses in daltons.
double residue_mass(char residue);
std::vector<double> masses_for(const std::string& peptide, MassMode mode = MassMode::Residue);

/// Energy of an encoded configuration: geometric re-scoring of the decoded
/// coordinates, where a redundant group contributes no displacement. Validity
/// is reported separately through the entry flags.
double configuration_energy(const std::string& config_bits, const search::SearchConfig& scoring);

/// Groups probability by configuration bits (ancillas marginalized) and
/// decodes each group. `probs` is indexed by basis state.
DecodedEnsemble decode_distribution(const std::vector<double>& probs, const ham::EncodingLayout& layout,
                                    const search::SearchConfig& scoring, MassMode masses = MassMode::Residue);
DecodedEnsemble decode_samples(const sim::ShotTable& shots, const ham::EncodingLayout& layout,
                               const search::SearchConfig& scoring, MassMode masses = MassMode::Residue);

/// Indicator over configuration bits of valid conformations with energy E*
/// (within 1e-9), as a diagonal operator on the full register.
sim::DiagonalOperator ground_indicator(const ham::EncodingLayout& layout, const search::SearchConfig& scoring,
                                       double e_star);

double radius_of_gyration(const std::vector<Point>& coords, const std::vector<double>& masses);
double kabsch_rmsd(const std::vector<Point>& a, const std::vector<Point>& b);

// ---- XYZ -----------------------------------------------------------------------

struct XyzFrame {
    std::string comment;
    std::vector<char> elements;
    std::vector<Point> coords;
};

void write_xyz(std::ostream& out, const Conformation& conf, const std::string& peptide, const std::string& comment);
void write_xyz(const std::filesystem::path& path, const Conformation& conf, const std::string& peptide,
               const std::string& comment);
void write_xyz(std::ostream& out, const XyzFrame& frame);
XyzFrame parse_xyz(std::istream& in);

// ---- topobj ----------------------------------------------------------------------

struct Topobj {
    LatticeKind lattice = LatticeKind::FCC;
    std::string peptide;
    std::vector<search::ConformerRecord> records;
};

void write_topobj(std::ostream& out, const Topobj& data);
void write_topobj(const std::filesystem::path& path, const Topobj& data);
Topobj parse_topobj(std::istream& in);
Topobj read_topobj(const std::filesystem::path& path);

// ---- reports ---------------------------------------------------------------------

/// Tab-delimited rows sorted by energy with cumulative probability; rows at
/// E* (within 1e-9) are marked.
void energy_probability_report(std::ostream& out, const DecodedEnsemble& ensemble, std::optional<double> e_star);
void energy_probability_json(std::ostream& out, const DecodedEnsemble& ensemble, std::optional<double> e_star);

}  // namespace qfold::analysis
