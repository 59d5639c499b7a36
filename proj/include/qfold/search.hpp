#pragma once

#include "qfold/lattice.hpp"
#include "qfold/scoring.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace qfold::search {

inline constexpr double kDefaultCollisionPenalty = 1e4;

struct SearchConfig {
    LatticeKind lattice = LatticeKind::FCC;
    std::string peptide;
    int k = 10;
    int nn_level = 1;
    double collision_penalty = kDefaultCollisionPenalty;
    scoring::EnergyMatrix matrix;
    int workers = 1;
    double time_limit_s = 0.0;         // 0 disables the wall-clock budget
    std::uint64_t max_sequences = 0;   // 0 disables the size budget
};

/// bits holds the configuration bitstring on FCC and the absolute turn digits on TET.
struct ConformerRecord {
    double energy = 0.0;
    TurnSequence turns;
    std::string bits;
    Conformation coords;

    bool operator==(const ConformerRecord&) const = default;
};

/// Ascending energy, ties broken by turn string.
bool record_less(const ConformerRecord& a, const ConformerRecord& b);

class TopK {
public:
    explicit TopK(int capacity = 1);

    int capacity() const { return capacity_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<ConformerRecord>& records() const { return records_; }
    const ConformerRecord& operator[](std::size_t i) const { return records_[i]; }

    /// True when a record with this key would be kept.
    bool admits(double energy, const std::vector<TurnLabel>& turns) const;
    void insert(ConformerRecord record);
    void merge(const TopK& other);

private:
    int capacity_;
    std::vector<ConformerRecord> records_;
};

/// FCC: 4 * 11^(N-3); TET: 3^(N-3).
boost::multiprecision::cpp_int enumeration_size(LatticeKind lattice, int n_beads);

/// Collision pairs add collision_penalty each. Pairs are summed bead by bead,
/// earlier partner first, so search and re-scoring agree bit for bit.
double conformation_energy(const Conformation& conf, const std::string& peptide, const SearchConfig& config);

/// Overlapping pairs (d^2 = 0 on the lattice metric).
int collision_count(const Conformation& conf);

struct SearchResult {
    TopK top;
    std::uint64_t visited = 0;
    std::uint64_t collided = 0;
    double seconds = 0.0;
};

SearchResult search(const SearchConfig& config);

/// Record for a given turn sequence, scored with conformation_energy.
ConformerRecord make_record(const TurnSequence& seq, const std::string& peptide, const SearchConfig& config);

}  // namespace qfold::search
