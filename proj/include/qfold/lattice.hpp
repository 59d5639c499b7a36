#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qfold {

enum class LatticeKind { FCC, TET };

std::string_view to_string(LatticeKind kind);
LatticeKind lattice_from_string(std::string_view name);

struct Vec3 {
    int x = 0;
    int y = 0;
    int z = 0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(int s) const { return {x * s, y * s, z * s}; }
    constexpr int norm2() const { return x * x + y * y + z * z; }
    constexpr bool operator==(const Vec3&) const = default;
};

/// Turn labels are 0..11 on FCC (displayed as hex digits 0-b) and 0..3 on TET.
/// kRedundant marks an FCC group holding one of the four unused codewords.
using TurnLabel = int;
inline constexpr TurnLabel kRedundant = -1;

struct TurnSequence {
    LatticeKind lattice = LatticeKind::FCC;
    std::vector<TurnLabel> turns;

    bool operator==(const TurnSequence&) const = default;
};

/// Bead coordinates. FCC uses integer lattice units (bond length^2 = 2);
/// TET stores integer triples in units of 1/sqrt(3) (bond length^2 = 3).
struct Conformation {
    LatticeKind lattice = LatticeKind::FCC;
    std::vector<Vec3> coords;

    std::size_t size() const { return coords.size(); }
    bool operator==(const Conformation&) const = default;
};

/// Accumulated signed direction counts between two TET beads.
struct TetState {
    std::array<int, 4> counts{};

    int squared_distance() const {
        return counts[0] * counts[0] + counts[1] * counts[1] + counts[2] * counts[2] +
               counts[3] * counts[3];
    }
};

namespace lattice {

inline constexpr int kFccTurnCount = 12;
inline constexpr int kTetTurnCount = 4;

/// Table of FCC turns: codeword q_i q_{i+1} q_{i+2} q_{i+3} stored with q_i as
/// the most significant of the four bits.
struct FccTurn {
    Vec3 displacement;
    std::uint8_t codeword;
};

inline constexpr std::array<FccTurn, kFccTurnCount> kFccTurns{{
    {{1, 1, 0}, 0b0000},
    {{-1, -1, 0}, 0b0011},
    {{-1, 1, 0}, 0b1100},
    {{1, -1, 0}, 0b1111},
    {{0, 1, 1}, 0b1001},
    {{0, -1, -1}, 0b0101},
    {{0, 1, -1}, 0b1010},
    {{0, -1, 1}, 0b0110},
    {{1, 0, 1}, 0b1000},
    {{-1, 0, -1}, 0b0100},
    {{1, 0, -1}, 0b1011},
    {{-1, 0, 1}, 0b0111},
}};

inline constexpr std::array<std::uint8_t, 4> kRedundantCodewords{0b0010, 0b0001, 0b1101, 0b1110};

/// Second-turn labels reachable with the codeword suffix fixed to 00, in q0q1
/// order 00, 01, 10, 11.
inline constexpr std::array<TurnLabel, 4> kSecondTurnLabels{0, 9, 8, 2};

/// Unnormalized tetrahedral directions; each has length sqrt(3).
inline constexpr std::array<Vec3, kTetTurnCount> kTetDirections{{
    {1, 1, 1},
    {1, -1, -1},
    {-1, 1, -1},
    {-1, -1, 1},
}};

std::optional<TurnLabel> decode_turn(std::uint8_t word);
std::uint8_t encode_turn(TurnLabel label);
Vec3 fcc_displacement(TurnLabel label);
TurnLabel fcc_inverse(TurnLabel label);

/// Hex digit form used in reports ('0'..'9','a','b'); '?' for a redundant group.
char turn_char(TurnLabel label);
TurnLabel turn_from_char(char c);
std::string turn_string(const TurnSequence& seq);
TurnSequence turns_from_string(LatticeKind lattice, std::string_view text);

int configuration_bit_count(int n_beads);

struct UnpackedConfiguration {
    TurnSequence sequence;
    std::vector<int> redundant_turns;  // turn indices holding unused codewords

    bool valid() const { return redundant_turns.empty(); }
};

/// Bitstrings are '0'/'1' strings with character k holding q_k.
UnpackedConfiguration unpack_configuration(std::string_view bits, int n_beads);
std::string pack_configuration(const TurnSequence& seq);

Conformation coords_from_turns(const TurnSequence& seq);

/// Coordinates implied by the encoding itself: a redundant group contributes
/// no displacement, matching the position polynomials.
Conformation coords_from_configuration(std::string_view bits, int n_beads);

int pair_squared_distance(const Conformation& conf, int m, int n);

/// Squared distance in the 4D count representation for TET; equals
/// pair_squared_distance for FCC.
int lattice_squared_distance(const Conformation& conf, int m, int n);

std::vector<TurnLabel> tet_abs_from_rel(const std::vector<int>& rel, const std::vector<int>& parents,
                                        TurnLabel first = 0);
TetState tet_state(const TurnSequence& seq, int m, int n);

/// True when two consecutive FCC turns are mutually inverse.
bool has_backtrack(const TurnSequence& seq);

}  // namespace lattice
}  // namespace qfold
