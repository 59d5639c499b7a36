#include "qfold/hamiltonian.hpp"

#include "qfold/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace qfold::ham {

using pb::Polynomial;

EncodingLayout::EncodingLayout(int n_beads) : n_beads_(n_beads), config_bits_(lattice::configuration_bit_count(n_beads)) {
    for (int m = 0; m <= n_beads - 3; ++m)
        for (int n = m + 2; n <= n_beads - 1; ++n) pairs_.emplace_back(m, n);
    if (total_qubits() > pb::kMaxVars)
        throw Error(ErrorCode::InvalidArgument, std::to_string(n_beads) + " beads need " +
                                                    std::to_string(total_qubits()) + " qubits; at most 64 supported");
}

int EncodingLayout::ancilla_index(int m, int n) const {
    if (m > n) std::swap(m, n);
    const auto it = std::find(pairs_.begin(), pairs_.end(), std::make_pair(m, n));
    if (it == pairs_.end())
        throw Error(ErrorCode::IndexOutOfRange, "no ancilla for pair (" + std::to_string(m) + "," + std::to_string(n) + ")");
    return config_bits_ + static_cast<int>(it - pairs_.begin());
}

std::string to_string(Mode mode) { return mode == Mode::PolyFit ? "polyfit" : "vqec"; }

Mode mode_from_string(const std::string& name) {
    if (name == "polyfit") return Mode::PolyFit;
    if (name == "vqec") return Mode::VQEC;
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + name + "'");
}

Polynomial turn_indicator(const EncodingLayout& layout, int j, std::uint8_t code) {
    const int n = layout.total_qubits();
    if (j < 0 || j > layout.n_beads() - 2)
        throw Error(ErrorCode::TurnIndexOutOfRange, "turn " + std::to_string(j));
    auto bit = [code](int k) { return ((code >> (3 - k)) & 1) != 0; };
    if (j == 0) return Polynomial::constant(n, code == 0 ? 1.0 : 0.0);
    if (j == 1) {
        if (bit(2) || bit(3)) return Polynomial(n);
        return Polynomial::literal(n, 0, bit(0)) * Polynomial::literal(n, 1, bit(1));
    }
    const int phi = 4 * (j - 2);
    Polynomial p = Polynomial::literal(n, phi + 2, bit(0));
    for (int k = 1; k < 4; ++k) p = p * Polynomial::literal(n, phi + 2 + k, bit(k));
    return p;
}

Polynomial indicator_poly(const EncodingLayout& layout, int j, std::uint8_t code) {
    if (j < 2 || j > layout.n_beads() - 2)
        throw Error(ErrorCode::TurnIndexOutOfRange, "indicator turn index " + std::to_string(j) + " outside 2.." +
                                                        std::to_string(layout.n_beads() - 2));
    return turn_indicator(layout, j, code);
}

namespace {

// Displacement polynomials of a single turn.
std::array<Polynomial, 3> turn_displacement(const EncodingLayout& layout, int j) {
    const int n = layout.total_qubits();
    std::array<Polynomial, 3> out{Polynomial(n), Polynomial(n), Polynomial(n)};
    for (int label = 0; label < lattice::kFccTurnCount; ++label) {
        const auto& turn = lattice::kFccTurns[static_cast<std::size_t>(label)];
        const Polynomial ind = turn_indicator(layout, j, turn.codeword);
        if (ind.is_zero()) continue;
        const int comps[3] = {turn.displacement.x, turn.displacement.y, turn.displacement.z};
        for (int c = 0; c < 3; ++c)
            if (comps[c] != 0) out[static_cast<std::size_t>(c)] += ind * static_cast<double>(comps[c]);
    }
    return out;
}

std::array<Polynomial, 3> segment(const EncodingLayout& layout, int from, int to) {
    const int n = layout.total_qubits();
    std::array<Polynomial, 3> out{Polynomial(n), Polynomial(n), Polynomial(n)};
    for (int j = from; j < to; ++j) {
        const auto step = turn_displacement(layout, j);
        for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(c)] += step[static_cast<std::size_t>(c)];
    }
    return out;
}

void check_bead(const EncodingLayout& layout, int m) {
    if (m < 0 || m >= layout.n_beads())
        throw Error(ErrorCode::IndexOutOfRange, "bead " + std::to_string(m) + " of " + std::to_string(layout.n_beads()));
}

}  // namespace

std::array<Polynomial, 3> position_polys(const EncodingLayout& layout, int m) {
    check_bead(layout, m);
    return segment(layout, 0, m);
}

Polynomial distance_poly(const EncodingLayout& layout, int m, int n) {
    check_bead(layout, m);
    check_bead(layout, n);
    if (m >= n) throw Error(ErrorCode::IndexOutOfRange, "distance_poly needs m < n");
    const auto d = segment(layout, m, n);
    return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
}

Polynomial build_h_back(const EncodingLayout& layout, double lambda_back) {
    const int n = layout.total_qubits();
    Polynomial h(n);
    // Turn 0 to turn 1 can never reverse, so pairs start at turn 1.
    for (int j = 1; j <= layout.n_beads() - 3; ++j) {
        for (int a = 0; a < lattice::kFccTurnCount; ++a) {
            const Polynomial first = turn_indicator(layout, j, lattice::encode_turn(a));
            if (first.is_zero()) continue;
            h += first * turn_indicator(layout, j + 1, lattice::encode_turn(lattice::fcc_inverse(a)));
        }
    }
    return h * lambda_back;
}

Polynomial build_h_redun(const EncodingLayout& layout, double lambda_redun) {
    Polynomial h(layout.total_qubits());
    for (int j = 2; j <= layout.n_beads() - 2; ++j)
        for (std::uint8_t code : lattice::kRedundantCodewords) h += indicator_poly(layout, j, code);
    return h * lambda_redun;
}

Polynomial build_h_int(const EncodingLayout& layout, const scoring::EnergyMatrix& matrix, const std::string& peptide) {
    if (static_cast<int>(peptide.size()) != layout.n_beads())
        throw Error(ErrorCode::LengthMismatch, "peptide length " + std::to_string(peptide.size()) + " vs " +
                                                   std::to_string(layout.n_beads()) + " beads");
    const int nv = layout.total_qubits();
    Polynomial h(nv);
    for (const auto& [m, n] : layout.interaction_pairs()) {
        const double eps = matrix.at(peptide[static_cast<std::size_t>(m)], peptide[static_cast<std::size_t>(n)]);
        const Polynomial gap = Polynomial::constant(nv, 3.0) - distance_poly(layout, m, n);
        h += Polynomial::variable(nv, layout.ancilla_index(m, n)) * gap * eps;
    }
    return h;
}

ProblemInstance assemble(Mode mode, const EncodingLayout& layout, const std::string& peptide,
                         const scoring::EnergyMatrix& matrix, const Penalties& penalties,
                         const std::map<int, polyfit::ChebyshevFit>& fits) {
    if (mode == Mode::VQEC && !fits.empty())
        throw Error(ErrorCode::InvalidArgument, "VQEC mode takes no penalty fits");
    ProblemInstance inst;
    inst.layout = layout;
    inst.mode = mode;
    inst.peptide = peptide;
    inst.penalties = penalties;
    const int nv = layout.total_qubits();
    inst.objective = build_h_back(layout, penalties.back) + build_h_redun(layout, penalties.redun) +
                     build_h_int(layout, matrix, peptide);

    if (mode == Mode::PolyFit) {
        for (int m = 0; m < layout.n_beads(); ++m) {
            for (int n = m + 3; n < layout.n_beads(); ++n) {
                const auto it = fits.find(n - m);
                if (it == fits.end())
                    throw Error(ErrorCode::InvalidArgument, "missing penalty fit for separation " + std::to_string(n - m));
                inst.objective += polyfit::build_olap_penalty(it->second, distance_poly(layout, m, n));
            }
        }
    } else {
        for (const auto& [m, n] : layout.interaction_pairs())
            inst.constraints.push_back({m, n, Polynomial::constant(nv, 2.0) - distance_poly(layout, m, n)});
    }
    return inst;
}

ProblemInstance build_instance(Mode mode, const std::string& peptide, const scoring::EnergyMatrix& matrix,
                               const Penalties& penalties, double r2_tol, int d0) {
    const EncodingLayout layout(static_cast<int>(peptide.size()));
    std::map<int, polyfit::ChebyshevFit> fits;
    if (mode == Mode::PolyFit)
        for (int s = 3; s < layout.n_beads(); ++s) fits.emplace(s, polyfit::fit_penalty({s, penalties.olap}, r2_tol, d0));
    auto inst = assemble(mode, layout, peptide, matrix, penalties, fits);
    inst.r2_tol = r2_tol;
    return inst;
}

TermReport term_report(const ProblemInstance& instance) {
    TermReport r;
    r.objective = pb::stats(instance.objective);
    for (const auto& c : instance.constraints) r.constraint_terms += c.poly.size();
    r.total_terms = r.objective.term_count + r.constraint_terms;
    return r;
}

long long slack_qubits(int n_beads) {
    long long total = 0;
    for (int m = 0; m < n_beads; ++m) {
        for (int n = m + 2; n < n_beads; ++n) {
            const long long range = 2LL * (n - m) * (n - m) - 1;
            int bits = 0;
            while ((1LL << bits) < range) ++bits;
            total += bits;
        }
    }
    return total;
}

ResourceCounts resource_counts(int n_beads) {
    ResourceCounts r;
    r.config_bits = lattice::configuration_bit_count(n_beads);
    r.ancillas = static_cast<long long>(n_beads - 1) * (n_beads - 2) / 2;
    r.total = r.config_bits + r.ancillas;
    r.slack = slack_qubits(n_beads);
    return r;
}

namespace {

nlohmann::json poly_to_json(const Polynomial& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : p.terms()) terms.push_back(nlohmann::json::array({pb::vars_of(t.vars), t.coeff}));
    return terms;
}

Polynomial poly_from_json(const nlohmann::json& terms, int n_vars) {
    std::vector<pb::Term> out;
    for (const auto& item : terms) {
        if (!item.is_array() || item.size() != 2) throw Error(ErrorCode::ParseError, "term must be [vars, coeff]");
        pb::VarMask mask = 0;
        for (const auto& v : item[0]) {
            const int idx = v.get<int>();
            if (idx < 0 || idx >= n_vars) throw Error(ErrorCode::ParseError, "variable index out of range");
            mask |= pb::VarMask{1} << idx;
        }
        out.push_back({mask, item[1].get<double>()});
    }
    return Polynomial(n_vars, std::move(out));
}

}  // namespace

nlohmann::json to_json(const ProblemInstance& inst) {
    nlohmann::json doc;
    doc["format"] = "qfold-instance";
    doc["version"] = kInstanceFormatVersion;
    doc["mode"] = to_string(inst.mode);
    doc["peptide"] = inst.peptide;
    doc["r2_tol"] = inst.r2_tol;
    nlohmann::json ancillas = nlohmann::json::array();
    for (const auto& [m, n] : inst.layout.interaction_pairs())
        ancillas.push_back({{"m", m}, {"n", n}, {"qubit", inst.layout.ancilla_index(m, n)}});
    doc["layout"] = {{"n_beads", inst.layout.n_beads()},
                     {"config_bits", inst.layout.config_bits()},
                     {"total_qubits", inst.layout.total_qubits()},
                     {"ancillas", ancillas}};
    doc["penalties"] = {{"back", inst.penalties.back}, {"redun", inst.penalties.redun}, {"olap", inst.penalties.olap}};
    doc["objective"] = poly_to_json(inst.objective);
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : inst.constraints) cons.push_back({{"m", c.m}, {"n", c.n}, {"terms", poly_to_json(c.poly)}});
    doc["constraints"] = cons;
    const auto report = term_report(inst);
    doc["term_counts"] = {{"objective", report.objective.term_count},
                          {"objective_degree", report.objective.degree},
                          {"constraints", report.constraint_terms},
                          {"total", report.total_terms},
                          {"convention", "binary-variable monomials after substituting the fixed turn-0 and "
                                         "second-turn suffix bits"}};
    return doc;
}

ProblemInstance instance_from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("format", "") != "qfold-instance") throw Error(ErrorCode::ParseError, "not a qfold instance");
        const int version = doc.at("version").get<int>();
        if (version != kInstanceFormatVersion)
            throw Error(ErrorCode::ParseError, "unsupported instance version " + std::to_string(version));
        ProblemInstance inst;
        inst.mode = mode_from_string(doc.at("mode").get<std::string>());
        inst.peptide = doc.at("peptide").get<std::string>();
        inst.r2_tol = doc.value("r2_tol", polyfit::kDefaultR2Tol);
        inst.layout = EncodingLayout(doc.at("layout").at("n_beads").get<int>());
        if (inst.layout.total_qubits() != doc.at("layout").at("total_qubits").get<int>())
            throw Error(ErrorCode::ParseError, "layout qubit count mismatch");
        const auto& pen = doc.at("penalties");
        inst.penalties = {pen.at("back").get<double>(), pen.at("redun").get<double>(), pen.at("olap").get<double>()};
        const int nv = inst.layout.total_qubits();
        inst.objective = poly_from_json(doc.at("objective"), nv);
        for (const auto& c : doc.at("constraints"))
            inst.constraints.push_back({c.at("m").get<int>(), c.at("n").get<int>(), poly_from_json(c.at("terms"), nv)});
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

}  // namespace qfold::ham
