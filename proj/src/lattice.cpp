#include "qfold/lattice.hpp"

#include "qfold/error.hpp"

#include <cctype>

namespace qfold {

std::string_view to_string(LatticeKind kind) {
    return kind == LatticeKind::FCC ? "fcc" : "tet";
}

LatticeKind lattice_from_string(std::string_view name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "fcc") return LatticeKind::FCC;
    if (lower == "tet" || lower == "tetrahedral") return LatticeKind::TET;
    throw Error(ErrorCode::InvalidArgument, "unknown lattice '" + std::string(name) + "'");
}

namespace lattice {

namespace {

constexpr std::array<int, 16> build_decode_table() {
    std::array<int, 16> table{};
    for (auto& v : table) v = kRedundant;
    for (int label = 0; label < kFccTurnCount; ++label) table[kFccTurns[label].codeword] = label;
    return table;
}

constexpr auto kDecodeTable = build_decode_table();

void check_fcc_label(TurnLabel label) {
    if (label < 0 || label >= kFccTurnCount)
        throw Error(ErrorCode::InvalidTurn, "FCC turn label " + std::to_string(label));
}

}  // namespace

std::optional<TurnLabel> decode_turn(std::uint8_t word) {
    const int label = kDecodeTable[word & 0xF];
    if (label == kRedundant) return std::nullopt;
    return label;
}

std::uint8_t encode_turn(TurnLabel label) {
    check_fcc_label(label);
    return kFccTurns[label].codeword;
}

Vec3 fcc_displacement(TurnLabel label) {
    check_fcc_label(label);
    return kFccTurns[label].displacement;
}

// Labels come in negated pairs (2k, 2k+1).
TurnLabel fcc_inverse(TurnLabel label) {
    check_fcc_label(label);
    return label ^ 1;
}

char turn_char(TurnLabel label) {
    if (label == kRedundant) return '?';
    if (label < 0 || label >= kFccTurnCount)
        throw Error(ErrorCode::InvalidTurn, "turn label " + std::to_string(label));
    return "0123456789ab"[label];
}

TurnLabel turn_from_char(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c == 'a' || c == 'A') return 10;
    if (c == 'b' || c == 'B') return 11;
    if (c == '?') return kRedundant;
    throw Error(ErrorCode::ParseError, std::string("bad turn character '") + c + "'");
}

std::string turn_string(const TurnSequence& seq) {
    std::string out;
    out.reserve(seq.turns.size());
    for (TurnLabel t : seq.turns) out.push_back(turn_char(t));
    return out;
}

TurnSequence turns_from_string(LatticeKind lattice, std::string_view text) {
    TurnSequence seq{lattice, {}};
    const int limit = lattice == LatticeKind::FCC ? kFccTurnCount : kTetTurnCount;
    for (char c : text) {
        const TurnLabel t = turn_from_char(c);
        if (t != kRedundant && t >= limit)
            throw Error(ErrorCode::InvalidTurn, std::string("turn '") + c + "' on " +
                                                    std::string(to_string(lattice)));
        seq.turns.push_back(t);
    }
    return seq;
}

int configuration_bit_count(int n_beads) {
    if (n_beads < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 beads");
    return 4 * n_beads - 10;
}

UnpackedConfiguration unpack_configuration(std::string_view bits, int n_beads) {
    const int expected = configuration_bit_count(n_beads);
    if (static_cast<int>(bits.size()) != expected)
        throw Error(ErrorCode::LengthMismatch, "configuration of " + std::to_string(n_beads) +
                                                   " beads needs " + std::to_string(expected) +
                                                   " bits, got " + std::to_string(bits.size()));
    auto bit = [&](int k) {
        const char c = bits[static_cast<std::size_t>(k)];
        if (c != '0' && c != '1') throw Error(ErrorCode::ParseError, "bitstring must contain only 0/1");
        return c == '1' ? 1 : 0;
    };

    UnpackedConfiguration out;
    out.sequence.lattice = LatticeKind::FCC;
    out.sequence.turns.push_back(0);
    const std::uint8_t second = static_cast<std::uint8_t>((bit(0) << 3) | (bit(1) << 2));
    out.sequence.turns.push_back(*decode_turn(second));
    for (int j = 2; j <= n_beads - 2; ++j) {
        const int phi = 4 * (j - 2);
        const std::uint8_t word = static_cast<std::uint8_t>((bit(phi + 2) << 3) | (bit(phi + 3) << 2) |
                                                            (bit(phi + 4) << 1) | bit(phi + 5));
        const auto label = decode_turn(word);
        if (label) {
            out.sequence.turns.push_back(*label);
        } else {
            out.sequence.turns.push_back(kRedundant);
            out.redundant_turns.push_back(j);
        }
    }
    return out;
}

std::string pack_configuration(const TurnSequence& seq) {
    if (seq.lattice != LatticeKind::FCC)
        throw Error(ErrorCode::InvalidArgument, "only FCC sequences have a configuration bitstring");
    const auto& t = seq.turns;
    if (t.size() < 2 || t[0] != 0)
        throw Error(ErrorCode::InvalidTurn, "FCC configuration must start with turn 0");
    std::string bits;
    const std::uint8_t second = encode_turn(t[1]);
    if ((second & 0b11) != 0)
        throw Error(ErrorCode::InvalidTurn, "second turn must be one of 0, 9, 8, 2");
    bits.push_back((second >> 3) & 1 ? '1' : '0');
    bits.push_back((second >> 2) & 1 ? '1' : '0');
    for (std::size_t j = 2; j < t.size(); ++j) {
        const std::uint8_t w = encode_turn(t[j]);
        for (int b = 3; b >= 0; --b) bits.push_back((w >> b) & 1 ? '1' : '0');
    }
    return bits;
}

Conformation coords_from_turns(const TurnSequence& seq) {
    Conformation conf{seq.lattice, {}};
    conf.coords.reserve(seq.turns.size() + 1);
    conf.coords.push_back({0, 0, 0});
    for (std::size_t i = 0; i < seq.turns.size(); ++i) {
        const TurnLabel t = seq.turns[i];
        Vec3 step;
        if (seq.lattice == LatticeKind::FCC) {
            step = fcc_displacement(t);
        } else {
            if (t < 0 || t >= kTetTurnCount)
                throw Error(ErrorCode::InvalidTurn, "TET turn label " + std::to_string(t));
            step = kTetDirections[t] * (i % 2 == 0 ? 1 : -1);
        }
        conf.coords.push_back(conf.coords.back() + step);
    }
    return conf;
}

Conformation coords_from_configuration(std::string_view bits, int n_beads) {
    const auto unpacked = unpack_configuration(bits, n_beads);
    Conformation conf{LatticeKind::FCC, {{0, 0, 0}}};
    for (TurnLabel t : unpacked.sequence.turns) {
        const Vec3 step = t == kRedundant ? Vec3{} : fcc_displacement(t);
        conf.coords.push_back(conf.coords.back() + step);
    }
    return conf;
}

int pair_squared_distance(const Conformation& conf, int m, int n) {
    const int size = static_cast<int>(conf.coords.size());
    if (m < 0 || n < 0 || m >= size || n >= size)
        throw Error(ErrorCode::IndexOutOfRange, "bead pair (" + std::to_string(m) + "," +
                                                    std::to_string(n) + ") of " + std::to_string(size));
    return (conf.coords[static_cast<std::size_t>(m)] - conf.coords[static_cast<std::size_t>(n)]).norm2();
}

int lattice_squared_distance(const Conformation& conf, int m, int n) {
    const int d2 = pair_squared_distance(conf, m, n);
    if (conf.lattice == LatticeKind::FCC) return d2;
    // |r|^2 = 4 sum(n_a^2) - (sum n_a)^2 in 1/sqrt(3) units; sum n_a is the
    // alternating step-sign sum, which is +-1 for odd separations and 0 otherwise.
    const int sigma2 = ((m - n) % 2 != 0) ? 1 : 0;
    return (d2 + sigma2) / 4;
}

std::vector<TurnLabel> tet_abs_from_rel(const std::vector<int>& rel, const std::vector<int>& parents,
                                        TurnLabel first) {
    if (!parents.empty() && parents.size() != rel.size())
        throw Error(ErrorCode::LengthMismatch, "parents must align with relative turns");
    std::vector<TurnLabel> abs{first};
    abs.reserve(rel.size() + 1);
    for (std::size_t k = 0; k < rel.size(); ++k) {
        if (rel[k] < 0 || rel[k] > 2)
            throw Error(ErrorCode::RelTurnOutOfRange, "relative turn " + std::to_string(rel[k]));
        const std::size_t parent = parents.empty() ? k : static_cast<std::size_t>(parents[k]);
        if (parent >= abs.size())
            throw Error(ErrorCode::IndexOutOfRange, "parent " + std::to_string(parent));
        abs.push_back((rel[k] + abs[parent] + 1) % 4);
    }
    return abs;
}

TetState tet_state(const TurnSequence& seq, int m, int n) {
    if (seq.lattice != LatticeKind::TET) throw Error(ErrorCode::InvalidArgument, "tet_state needs a TET sequence");
    const int beads = static_cast<int>(seq.turns.size()) + 1;
    if (m < 0 || n < 0 || m >= beads || n >= beads)
        throw Error(ErrorCode::IndexOutOfRange, "bead pair out of range");
    if (m > n) std::swap(m, n);
    TetState state;
    for (int i = m; i < n; ++i) state.counts[static_cast<std::size_t>(seq.turns[static_cast<std::size_t>(i)])] += (i % 2 == 0 ? 1 : -1);
    return state;
}

bool has_backtrack(const TurnSequence& seq) {
    for (std::size_t i = 1; i < seq.turns.size(); ++i) {
        const TurnLabel a = seq.turns[i - 1];
        const TurnLabel b = seq.turns[i];
        if (a == kRedundant || b == kRedundant) continue;
        if (seq.lattice == LatticeKind::FCC ? b == fcc_inverse(a) : a == b) return true;
    }
    return false;
}

}  // namespace lattice
}  // namespace qfold
