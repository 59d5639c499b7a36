#include "qfold/scoring.hpp"

#include "qfold/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <algorithm>
#include <optional>
#include <sstream>
#include <vector>

#ifndef QFOLD_DATA_DIR
#define QFOLD_DATA_DIR "data"
#endif

namespace qfold::scoring {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

char residue_code(const std::string& cell, int line_no) {
    if (cell.size() != 1 || !std::isalpha(static_cast<unsigned char>(cell[0])))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected one-letter code, got '" +
                                               cell + "'");
    return static_cast<char>(std::toupper(static_cast<unsigned char>(cell[0])));
}

const std::map<std::string, char>& residue_names() {
    static const std::map<std::string, char> names{
        {"ALA", 'A'}, {"ALANINE", 'A'},       {"ARG", 'R'}, {"ARGININE", 'R'},
        {"ASN", 'N'}, {"ASPARAGINE", 'N'},    {"ASP", 'D'}, {"ASPARTATE", 'D'},
        {"ASPARTIC ACID", 'D'}, {"CYS", 'C'}, {"CYSTEINE", 'C'},
        {"GLN", 'Q'}, {"GLUTAMINE", 'Q'},     {"GLU", 'E'}, {"GLUTAMATE", 'E'},
        {"GLUTAMIC ACID", 'E'}, {"GLY", 'G'}, {"GLYCINE", 'G'},
        {"HIS", 'H'}, {"HISTIDINE", 'H'},     {"ILE", 'I'}, {"ISOLEUCINE", 'I'},
        {"LEU", 'L'}, {"LEUCINE", 'L'},       {"LYS", 'K'}, {"LYSINE", 'K'},
        {"MET", 'M'}, {"METHIONINE", 'M'},    {"PHE", 'F'}, {"PHENYLALANINE", 'F'},
        {"PRO", 'P'}, {"PROLINE", 'P'},       {"SER", 'S'}, {"SERINE", 'S'},
        {"THR", 'T'}, {"THREONINE", 'T'},     {"TRP", 'W'}, {"TRYPTOPHAN", 'W'},
        {"TYR", 'Y'}, {"TYROSINE", 'Y'},      {"VAL", 'V'}, {"VALINE", 'V'},
    };
    return names;
}

}  // namespace

EnergyMatrix::EnergyMatrix() {
    index_.fill(-1);
    for (std::size_t i = 0; i < kResidueOrder.size(); ++i) index_[kResidueOrder[i] - 'A'] = static_cast<int>(i);
}

int EnergyMatrix::index_of(char residue) const {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(residue)));
    if (up < 'A' || up > 'Z' || index_[up - 'A'] < 0)
        throw Error(ErrorCode::UnknownResidue, std::string("residue '") + residue + "'");
    return index_[up - 'A'];
}

bool EnergyMatrix::has(char residue) const {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(residue)));
    return up >= 'A' && up <= 'Z' && index_[up - 'A'] >= 0;
}

double EnergyMatrix::at(char a, char b) const { return values_[index_of(a)][index_of(b)]; }

void EnergyMatrix::set(char a, char b, double value) {
    const int i = index_of(a);
    const int j = index_of(b);
    values_[i][j] = value;
    values_[j][i] = value;
}

NNScaling nn_scaling(LatticeKind lattice, int level) {
    if (lattice == LatticeKind::FCC) {
        switch (level) {
        case 1: return {lattice, 1, 1.0};
        case 2: return {lattice, 2, 1.0 / std::sqrt(2.0)};
        case 3: return {lattice, 3, 1.0 / std::sqrt(3.0)};
        default: break;
        }
    } else {
        switch (level) {
        case 1: return {lattice, 1, 1.0};
        case 2: return {lattice, 2, std::sqrt(3.0 / 8.0)};
        default: break;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "no neighbor scaling for level " + std::to_string(level) + " on " +
                                                std::string(to_string(lattice)));
}

EnergyMatrix load_energy_matrix(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<char> columns;
    std::map<char, std::vector<std::optional<double>>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto cells = split_csv(t);
        if (columns.empty()) {
            for (std::size_t c = 1; c < cells.size(); ++c) columns.push_back(residue_code(cells[c], line_no));
            if (columns.empty()) throw Error(ErrorCode::ParseError, "header row has no residue codes");
            continue;
        }
        if (cells.empty()) continue;
        const char r = residue_code(cells[0], line_no);
        if (rows.count(r)) throw Error(ErrorCode::ParseError, std::string("duplicate row for '") + r + "'");
        if (cells.size() > columns.size() + 1)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has too many cells");
        std::vector<std::optional<double>> vals(columns.size());
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (cells[c].empty()) continue;
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str() || *end != '\0' || !std::isfinite(v))
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + cells[c] + "'");
            vals[c - 1] = v;
        }
        rows.emplace(r, std::move(vals));
    }
    if (columns.empty()) throw Error(ErrorCode::ParseError, "empty matrix file");

    EnergyMatrix mat;
    for (char code : kResidueOrder) {
        if (std::find(columns.begin(), columns.end(), code) == columns.end())
            throw Error(ErrorCode::MissingResidue, std::string("column for '") + code + "'");
        if (!rows.count(code)) throw Error(ErrorCode::MissingResidue, std::string("row for '") + code + "'");
    }
    for (char c : columns)
        if (!mat.has(c)) throw Error(ErrorCode::UnknownResidue, std::string("column '") + c + "'");
    for (const auto& [r, _] : rows)
        if (!mat.has(r)) throw Error(ErrorCode::UnknownResidue, std::string("row '") + r + "'");
    if (std::set<char>(columns.begin(), columns.end()).size() != columns.size())
        throw Error(ErrorCode::ParseError, "duplicate residue in header");

    auto cell = [&](char r, char c) -> std::optional<double> {
        const auto pos = std::find(columns.begin(), columns.end(), c) - columns.begin();
        return rows.at(r)[static_cast<std::size_t>(pos)];
    };
    for (char a : kResidueOrder) {
        for (char b : kResidueOrder) {
            const auto ab = cell(a, b);
            const auto ba = cell(b, a);
            if (!ab && !ba)
                throw Error(ErrorCode::ParseError, std::string("no value for pair ") + a + b);
            if (ab && ba && std::abs(*ab - *ba) > 1e-9)
                throw Error(ErrorCode::AsymmetricMatrix, std::string("entries ") + a + b + " and " + b + a + " differ");
            mat.set(a, b, ab ? *ab : *ba);
        }
    }
    return mat;
}

EnergyMatrix load_energy_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open matrix file " + path.string());
    return load_energy_matrix(in);
}

void write_energy_matrix(std::ostream& out, const EnergyMatrix& mat) {
    out << ' ';
    for (char c : kResidueOrder) out << ',' << c;
    out << '\n';
    auto old = out.precision(std::numeric_limits<double>::max_digits10);
    for (char r : kResidueOrder) {
        out << r;
        for (char c : kResidueOrder) out << ',' << mat.at(r, c);
        out << '\n';
    }
    out.precision(old);
}

EnergyMatrix hp_matrix(std::string_view hydrophobic) {
    EnergyMatrix mat;
    for (char a : hydrophobic)
        for (char b : hydrophobic) mat.set(a, b, -1.0);
    return mat;
}

double pair_energy(const EnergyMatrix& mat, char a, char b, const NNScaling& scale) {
    return mat.at(a, b) * scale.factor;
}

std::string normalize_peptide(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) throw Error(ErrorCode::InvalidArgument, "empty peptide");
    const EnergyMatrix probe;
    auto upper = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return s;
    };
    auto from_name = [&](const std::string& tok) -> std::optional<char> {
        if (tok.size() == 1 && probe.has(tok[0])) return tok[0];
        const auto it = residue_names().find(tok);
        if (it == residue_names().end()) return std::nullopt;
        return it->second;
    };

    std::string out;
    if (t.find_first_of("-, ") != std::string::npos) {
        std::string piece;
        auto flush = [&] {
            if (piece.empty()) return;
            const auto code = from_name(upper(piece));
            if (!code) throw Error(ErrorCode::UnknownResidue, "residue '" + piece + "'");
            out.push_back(*code);
            piece.clear();
        };
        for (char c : t) {
            if (c == '-' || c == ',' || c == ' ') flush();
            else piece.push_back(c);
        }
        flush();
        return out;
    }

    const std::string up = upper(t);
    const bool has_lower = up != t;
    if (has_lower && up.size() > 3) {
        if (const auto it = residue_names().find(up); it != residue_names().end()) return std::string(1, it->second);
    }
    if (has_lower && up.size() % 3 == 0) {
        // "LysLeuVal" style
        std::string chained;
        for (std::size_t i = 0; i < up.size(); i += 3) {
            const auto it = residue_names().find(up.substr(i, 3));
            if (it == residue_names().end()) {
                chained.clear();
                break;
            }
            chained.push_back(it->second);
        }
        if (!chained.empty()) return chained;
    }
    for (char c : up) {
        if (!probe.has(c)) throw Error(ErrorCode::UnknownResidue, std::string("residue '") + c + "'");
        out.push_back(c);
    }
    return out;
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("QFOLD_DATA"); env && *env) return env;
    return QFOLD_DATA_DIR;
}

std::filesystem::path default_matrix_path() { return data_dir() / "mj1996.csv"; }

}  // namespace qfold::scoring
