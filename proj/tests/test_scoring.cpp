#include "qfold/error.hpp"
#include "qfold/scoring.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace qfold;
using namespace qfold::scoring;

namespace {

std::string square_csv(const EnergyMatrix& m, std::string_view order) {
    std::ostringstream s;
    s << "res";
    for (char c : order) s << ',' << c;
    s << '\n';
    for (char a : order) {
        s << a;
        for (char b : order) s << ',' << m.at(a, b);
        s << '\n';
    }
    return s.str();
}

}  // namespace

TEST_CASE("nearest-neighbor scaling factors") {
    CHECK(nn_scaling(LatticeKind::FCC, 1).factor == 1.0);
    CHECK(nn_scaling(LatticeKind::FCC, 2).factor == Catch::Approx(0.7071).epsilon(1e-4));
    CHECK(nn_scaling(LatticeKind::FCC, 3).factor == Catch::Approx(0.577).epsilon(1e-3));
    CHECK(nn_scaling(LatticeKind::TET, 2).factor == Catch::Approx(std::sqrt(3.0 / 8.0)));
    CHECK(nn_scaling(LatticeKind::FCC, 1).factor > nn_scaling(LatticeKind::FCC, 2).factor);
    CHECK(nn_scaling(LatticeKind::FCC, 2).factor > nn_scaling(LatticeKind::FCC, 3).factor);
    CHECK_THROWS_AS(nn_scaling(LatticeKind::TET, 3), Error);
}

TEST_CASE("bundled MJ matrix is symmetric and complete") {
    const auto m = load_energy_matrix_file(default_matrix_path());
    for (char a : kResidueOrder)
        for (char b : kResidueOrder) {
            CHECK(m.at(a, b) == m.at(b, a));
            CHECK(m.at(a, b) < 0.0);
        }
    CHECK(m.at('C', 'C') == -5.44);
}

TEST_CASE("pair_energy applies the scale and is symmetric") {
    const auto m = load_energy_matrix_file(default_matrix_path());
    const auto l1 = nn_scaling(LatticeKind::FCC, 1);
    const auto l2 = nn_scaling(LatticeKind::FCC, 2);
    const auto l3 = nn_scaling(LatticeKind::FCC, 3);
    CHECK(pair_energy(m, 'K', 'F', l1) == m.at('K', 'F'));
    CHECK(pair_energy(m, 'K', 'F', l2) == Catch::Approx(m.at('K', 'F') / std::sqrt(2.0)));
    CHECK(pair_energy(m, 'K', 'F', l3) == Catch::Approx(m.at('K', 'F') / std::sqrt(3.0)));
    for (char a : kResidueOrder)
        for (char b : kResidueOrder) CHECK(pair_energy(m, a, b, l2) == pair_energy(m, b, a, l2));
}

TEST_CASE("matrix loader round-trips full squares") {
    const auto m = load_energy_matrix_file(default_matrix_path());
    std::istringstream in(square_csv(m, kResidueOrder));
    const auto back = load_energy_matrix(in);
    for (char a : kResidueOrder)
        for (char b : kResidueOrder) CHECK(back.at(a, b) == Catch::Approx(m.at(a, b)));
}

TEST_CASE("matrix loader validates residues and symmetry") {
    const auto m = load_energy_matrix_file(default_matrix_path());
    std::string without_w(kResidueOrder);
    without_w.erase(without_w.find('W'), 1);
    std::istringstream missing(square_csv(m, without_w));
    try {
        load_energy_matrix(missing);
        FAIL("expected MissingResidue");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingResidue);
    }

    EnergyMatrix skew = m;
    std::string csv = square_csv(skew, kResidueOrder);
    // Break symmetry in the C/M cell of the first data row.
    const auto row = csv.find("\nC,");
    const auto cell = csv.find(',', row + 3);
    const auto end = csv.find_first_of(",\n", cell + 1);
    csv.replace(cell + 1, end - cell - 1, "-9.99");
    std::istringstream asym(csv);
    try {
        load_energy_matrix(asym);
        FAIL("expected AsymmetricMatrix");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AsymmetricMatrix);
    }
}

TEST_CASE("HP matrices from code and from the bundled file agree") {
    const auto hp = hp_matrix();
    CHECK(hp.at('L', 'V') == -1.0);
    CHECK(hp.at('L', 'K') == 0.0);
    CHECK(hp.at('K', 'K') == 0.0);
    const auto file = load_energy_matrix_file(data_dir() / "hp.csv");
    for (char a : kResidueOrder)
        for (char b : kResidueOrder) CHECK(file.at(a, b) == hp.at(a, b));
}

TEST_CASE("normalize_peptide accepts one-letter, three-letter and full names") {
    CHECK(normalize_peptide("klvffa") == "KLVFFA");
    CHECK(normalize_peptide("Lys-Leu-Val") == "KLV");
    CHECK(normalize_peptide("lysine leucine") == "KL");
    CHECK(normalize_peptide("GLY ASN") == "GN");
    CHECK_THROWS_AS(normalize_peptide("KLX"), Error);
    CHECK_THROWS_AS(normalize_peptide("Lys-Xyz"), Error);
}
