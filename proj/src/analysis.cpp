#include "qfold/analysis.hpp"

#include "qfold/error.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace qfold::analysis {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string config_string(std::uint64_t index, int bits) { return sim::index_to_bits(index, bits); }

double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad " + what + " '" + s + "'");
    }
    if (used != s.size()) throw Error(ErrorCode::ParseError, "bad " + what + " '" + s + "'");
    return v;
}

bool is_ground(const DecodedEntry& e, std::optional<double> e_star) {
    return e_star && e.valid() && std::abs(e.energy - *e_star) <= 1e-9;
}

DecodedEntry decode_config(std::uint64_t config, double probability, const ham::EncodingLayout& layout,
                           const search::SearchConfig& scoring, const std::vector<double>& masses) {
    DecodedEntry e;
    e.config_bits = config_string(config, layout.config_bits());
    const auto unpacked = lattice::unpack_configuration(e.config_bits, layout.n_beads());
    e.turns = unpacked.sequence;
    e.probability = probability;
    e.redundant = !unpacked.valid();
    e.backtrack = lattice::has_backtrack(e.turns);
    const auto coords = lattice::coords_from_configuration(e.config_bits, layout.n_beads());
    e.overlap = search::collision_count(coords) > 0;
    e.energy = search::conformation_energy(coords, scoring.peptide, scoring);
    e.rg = radius_of_gyration(to_angstrom(coords), masses);
    return e;
}

DecodedEnsemble build_ensemble(const std::map<std::uint64_t, double>& mass, const ham::EncodingLayout& layout,
                               const search::SearchConfig& scoring, MassMode mode) {
    if (static_cast<int>(scoring.peptide.size()) != layout.n_beads())
        throw Error(ErrorCode::LengthMismatch, "peptide length differs from the layout bead count");
    const auto masses = masses_for(scoring.peptide, mode);
    DecodedEnsemble ens;
    ens.n_beads = layout.n_beads();
    for (const auto& [config, p] : mass) ens.entries.push_back(decode_config(config, p, layout, scoring, masses));
    std::stable_sort(ens.entries.begin(), ens.entries.end(), [](const DecodedEntry& a, const DecodedEntry& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return lattice::turn_string(a.turns) < lattice::turn_string(b.turns);
    });
    return ens;
}

}  // namespace

double angstrom_scale(LatticeKind lattice) {
    return lattice == LatticeKind::FCC ? kBondLength / std::sqrt(2.0) : kBondLength / std::sqrt(3.0);
}

std::vector<Point> to_angstrom(const Conformation& conf) {
    const double s = angstrom_scale(conf.lattice);
    std::vector<Point> out;
    out.reserve(conf.size());
    for (const auto& c : conf.coords) out.push_back({c.x * s, c.y * s, c.z * s});
    return out;
}

double DecodedEnsemble::total_mass() const {
    double m = discarded_mass;
    for (const auto& e : entries) m += e.probability;
    return m;
}

const DecodedEntry* DecodedEnsemble::modal() const {
    const DecodedEntry* best = nullptr;
    for (const auto& e : entries)
        if (!best || e.probability > best->probability) best = &e;
    return best;
}

double residue_mass(char residue) {
    static const std::map<char, double> masses{
        {'G', 57.0519},  {'A', 71.0788},  {'S', 87.0782},  {'P', 97.1167},  {'V', 99.1326},
        {'T', 101.1051}, {'C', 103.1388}, {'L', 113.1594}, {'I', 113.1594}, {'N', 114.1038},
        {'D', 115.0886}, {'Q', 128.1307}, {'K', 128.1741}, {'E', 129.1155}, {'M', 131.1926},
        {'H', 137.1411}, {'F', 147.1766}, {'R', 156.1875}, {'Y', 163.1760}, {'W', 186.2132},
    };
    const auto it = masses.find(static_cast<char>(std::toupper(static_cast<unsigned char>(residue))));
    if (it == masses.end()) throw Error(ErrorCode::UnknownResidue, std::string("residue '") + residue + "'");
    return it->second;
}

std::vector<double> masses_for(const std::string& peptide, MassMode mode) {
    std::vector<double> m;
    m.reserve(peptide.size());
    for (char c : peptide) {
        const double mass = residue_mass(c);
        m.push_back(mode == MassMode::Unit ? 1.0 : mass);
    }
    return m;
}

double configuration_energy(const std::string& config_bits, const search::SearchConfig& scoring) {
    const auto coords = lattice::coords_from_configuration(config_bits, static_cast<int>(scoring.peptide.size()));
    return search::conformation_energy(coords, scoring.peptide, scoring);
}

DecodedEnsemble decode_distribution(const std::vector<double>& probs, const ham::EncodingLayout& layout,
                                    const search::SearchConfig& scoring, MassMode masses) {
    if (probs.size() != (std::size_t{1} << layout.total_qubits()))
        throw Error(ErrorCode::LengthMismatch, "distribution size does not match the layout");
    const std::uint64_t mask = (std::uint64_t{1} << layout.config_bits()) - 1;
    std::vector<double> marginal(static_cast<std::size_t>(mask) + 1, 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i) marginal[i & mask] += probs[i];
    std::map<std::uint64_t, double> mass;
    for (std::size_t c = 0; c < marginal.size(); ++c)
        if (marginal[c] > 0.0) mass.emplace(c, marginal[c]);
    return build_ensemble(mass, layout, scoring, masses);
}

DecodedEnsemble decode_samples(const sim::ShotTable& shots, const ham::EncodingLayout& layout,
                               const search::SearchConfig& scoring, MassMode masses) {
    if (shots.n_qubits != layout.total_qubits())
        throw Error(ErrorCode::LengthMismatch, "bitstrings have " + std::to_string(shots.n_qubits) + " bits, layout " +
                                                   std::to_string(layout.total_qubits()));
    if (shots.shots == 0) throw Error(ErrorCode::EmptyDistribution, "no shots");
    const std::uint64_t mask = (std::uint64_t{1} << layout.config_bits()) - 1;
    std::map<std::uint64_t, std::uint64_t> grouped;
    for (const auto& [idx, c] : shots.counts) grouped[idx & mask] += c;
    std::map<std::uint64_t, double> mass;
    for (const auto& [c, n] : grouped)
        mass.emplace(c, static_cast<double>(n) / static_cast<double>(shots.shots));
    return build_ensemble(mass, layout, scoring, masses);
}

sim::DiagonalOperator ground_indicator(const ham::EncodingLayout& layout, const search::SearchConfig& scoring,
                                       double e_star) {
    const int bits = layout.config_bits();
    std::vector<double> table(std::size_t{1} << bits, 0.0);
    for (std::uint64_t c = 0; c < table.size(); ++c) {
        const std::string s = config_string(c, bits);
        const auto unpacked = lattice::unpack_configuration(s, layout.n_beads());
        if (!unpacked.valid()) continue;
        const auto coords = lattice::coords_from_configuration(s, layout.n_beads());
        if (search::collision_count(coords) > 0) continue;
        if (std::abs(search::conformation_energy(coords, scoring.peptide, scoring) - e_star) <= 1e-9) table[c] = 1.0;
    }
    return sim::DiagonalOperator(std::move(table), bits, layout.total_qubits());
}

double radius_of_gyration(const std::vector<Point>& coords, const std::vector<double>& masses) {
    if (coords.empty()) throw Error(ErrorCode::EmptyStructure, "no beads");
    if (coords.size() != masses.size()) throw Error(ErrorCode::LengthMismatch, "one mass per bead");
    double total = 0.0;
    Point com{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < coords.size(); ++i) {
        total += masses[i];
        for (int k = 0; k < 3; ++k) com[k] += masses[i] * coords[i][k];
    }
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "masses must be positive");
    for (auto& c : com) c /= total;
    double acc = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) d2 += (coords[i][k] - com[k]) * (coords[i][k] - com[k]);
        acc += masses[i] * d2;
    }
    return std::sqrt(acc / total);
}

double kabsch_rmsd(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "structures differ in size");
    if (a.empty()) throw Error(ErrorCode::EmptyStructure, "no beads");
    const Eigen::Index n = static_cast<Eigen::Index>(a.size());
    Eigen::Matrix<double, Eigen::Dynamic, 3> P(n, 3);
    Eigen::Matrix<double, Eigen::Dynamic, 3> Q(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) {
            P(i, k) = a[static_cast<std::size_t>(i)][k];
            Q(i, k) = b[static_cast<std::size_t>(i)][k];
        }
    P.rowwise() -= P.colwise().mean();
    Q.rowwise() -= Q.colwise().mean();
    const Eigen::Matrix3d H = P.transpose() * Q;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) D(2, 2) = -1.0;
    const Eigen::Matrix3d R = svd.matrixV() * D * svd.matrixU().transpose();
    const Eigen::Matrix<double, Eigen::Dynamic, 3> rotated = P * R.transpose();
    return std::sqrt((rotated - Q).squaredNorm() / static_cast<double>(n));
}

// ---- XYZ -----------------------------------------------------------------------

void write_xyz(std::ostream& out, const XyzFrame& frame) {
    if (frame.elements.size() != frame.coords.size())
        throw Error(ErrorCode::LengthMismatch, "one element per coordinate");
    out << frame.coords.size() << '\n' << frame.comment << '\n';
    for (std::size_t i = 0; i < frame.coords.size(); ++i)
        out << frame.elements[i] << ' ' << fixed6(frame.coords[i][0]) << ' ' << fixed6(frame.coords[i][1]) << ' '
            << fixed6(frame.coords[i][2]) << '\n';
}

void write_xyz(std::ostream& out, const Conformation& conf, const std::string& peptide, const std::string& comment) {
    if (conf.size() != peptide.size()) throw Error(ErrorCode::LengthMismatch, "one residue per bead");
    if (comment.find('\n') != std::string::npos) throw Error(ErrorCode::InvalidArgument, "comment spans lines");
    write_xyz(out, XyzFrame{comment, std::vector<char>(peptide.begin(), peptide.end()), to_angstrom(conf)});
}

void write_xyz(const std::filesystem::path& path, const Conformation& conf, const std::string& peptide,
               const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_xyz(out, conf, peptide, comment);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

XyzFrame parse_xyz(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing atom count");
    std::size_t count = 0;
    try {
        count = std::stoul(line);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad atom count '" + line + "'");
    }
    XyzFrame frame;
    if (!std::getline(in, frame.comment)) throw Error(ErrorCode::ParseError, "missing comment line");
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "truncated XYZ body");
        std::istringstream ss(line);
        std::string el, x, y, z;
        if (!(ss >> el >> x >> y >> z) || el.size() != 1) throw Error(ErrorCode::ParseError, "bad atom line '" + line + "'");
        frame.elements.push_back(el[0]);
        frame.coords.push_back({parse_double(x, "coordinate"), parse_double(y, "coordinate"), parse_double(z, "coordinate")});
    }
    return frame;
}

// ---- topobj ----------------------------------------------------------------------

void write_topobj(std::ostream& out, const Topobj& data) {
    out << "# topobj v1 lattice=" << to_string(data.lattice) << " peptide=" << data.peptide
        << " count=" << data.records.size() << '\n';
    for (const auto& r : data.records) {
        out << '\n' << "energy " << g17(r.energy) << '\n';
        if (r.turns.lattice == LatticeKind::FCC) {
            out << "turns " << lattice::turn_string(r.turns) << '\n' << "bits " << r.bits << '\n';
        } else {
            out << "turns " << r.bits << '\n';
        }
        for (const auto& p : to_angstrom(r.coords))
            out << fixed6(p[0]) << ' ' << fixed6(p[1]) << ' ' << fixed6(p[2]) << '\n';
    }
}

void write_topobj(const std::filesystem::path& path, const Topobj& data) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_topobj(out, data);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Topobj parse_topobj(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# topobj v1", 0) != 0)
        throw Error(ErrorCode::ParseError, "missing topobj header");
    Topobj data;
    std::size_t count = 0;
    {
        std::istringstream ss(line.substr(11));
        std::string field;
        while (ss >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "lattice") data.lattice = lattice_from_string(value);
            else if (key == "peptide") data.peptide = value;
            else if (key == "count") count = std::stoul(value);
        }
    }
    const double scale = angstrom_scale(data.lattice);
    std::vector<std::string> block;
    auto flush = [&] {
        if (block.empty()) return;
        search::ConformerRecord r;
        std::size_t k = 0;
        auto field = [&](const std::string& key) {
            if (k >= block.size() || block[k].rfind(key + " ", 0) != 0)
                throw Error(ErrorCode::ParseError, "expected '" + key + "' line");
            return block[k++].substr(key.size() + 1);
        };
        r.energy = parse_double(field("energy"), "energy");
        const std::string turns = field("turns");
        r.turns = lattice::turns_from_string(data.lattice, turns);
        r.bits = data.lattice == LatticeKind::FCC ? field("bits") : turns;
        r.coords.lattice = data.lattice;
        for (; k < block.size(); ++k) {
            std::istringstream ss(block[k]);
            std::string xs, ys, zs;
            if (!(ss >> xs >> ys >> zs)) throw Error(ErrorCode::ParseError, "bad coordinate line '" + block[k] + "'");
            std::array<int, 3> v{};
            const std::array<std::string, 3> parts{xs, ys, zs};
            for (int c = 0; c < 3; ++c) {
                const double u = parse_double(parts[static_cast<std::size_t>(c)], "coordinate") / scale;
                const double rounded = std::round(u);
                if (std::abs(u - rounded) > 1e-3) throw Error(ErrorCode::ParseError, "coordinate off the lattice");
                v[static_cast<std::size_t>(c)] = static_cast<int>(rounded);
            }
            r.coords.coords.push_back({v[0], v[1], v[2]});
        }
        if (r.coords.size() != r.turns.turns.size() + 1)
            throw Error(ErrorCode::ParseError, "bead count does not match the turn string");
        data.records.push_back(std::move(r));
        block.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) flush();
        else block.push_back(line);
    }
    flush();
    if (data.records.size() != count)
        throw Error(ErrorCode::ParseError, "header announces " + std::to_string(count) + " records, found " +
                                               std::to_string(data.records.size()));
    return data;
}

Topobj read_topobj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return parse_topobj(in);
}

// ---- reports ---------------------------------------------------------------------

void energy_probability_report(std::ostream& out, const DecodedEnsemble& ensemble, std::optional<double> e_star) {
    out << "rank\tenergy\tprobability\tcumulative\tturns\tbits\trg\tvalid\tredundant\tbacktrack\toverlap\tground\n";
    double cumulative = 0.0;
    int rank = 0;
    for (const auto& e : ensemble.entries) {
        cumulative += e.probability;
        out << rank++ << '\t' << g17(e.energy) << '\t' << g17(e.probability) << '\t' << g17(cumulative) << '\t'
            << lattice::turn_string(e.turns) << '\t' << e.config_bits << '\t' << fixed6(e.rg) << '\t' << e.valid()
            << '\t' << e.redundant << '\t' << e.backtrack << '\t' << e.overlap << '\t' << is_ground(e, e_star) << '\n';
    }
}

void energy_probability_json(std::ostream& out, const DecodedEnsemble& ensemble, std::optional<double> e_star) {
    nlohmann::json rows = nlohmann::json::array();
    double cumulative = 0.0;
    for (const auto& e : ensemble.entries) {
        cumulative += e.probability;
        rows.push_back({{"energy", e.energy},
                        {"probability", e.probability},
                        {"cumulative", cumulative},
                        {"turns", lattice::turn_string(e.turns)},
                        {"bits", e.config_bits},
                        {"rg", e.rg},
                        {"valid", e.valid()},
                        {"redundant", e.redundant},
                        {"backtrack", e.backtrack},
                        {"overlap", e.overlap},
                        {"ground", is_ground(e, e_star)}});
    }
    nlohmann::json doc{{"n_beads", ensemble.n_beads}, {"discarded_mass", ensemble.discarded_mass}, {"rows", rows}};
    if (e_star) doc["e_star"] = *e_star;
    out << doc.dump(2) << '\n';
}

}  // namespace qfold::analysis
