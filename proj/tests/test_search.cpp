#include "qfold/error.hpp"
#include "qfold/search.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace qfold;
using namespace qfold::search;

namespace {

const scoring::EnergyMatrix& mj() {
    static const auto m = scoring::load_energy_matrix_file(scoring::default_matrix_path());
    return m;
}

SearchConfig config(const std::string& pep, int k = 10, LatticeKind lattice = LatticeKind::FCC) {
    SearchConfig c;
    c.lattice = lattice;
    c.peptide = pep;
    c.k = k;
    c.matrix = mj();
    return c;
}

// Independent FCC oracle: every turn sequence over all 12 labels, filtered to
// the canonical prefix and to walks without reversal or overlap, scored by a
// direct contact count.
struct OracleResult {
    double best = 0.0;
    std::size_t walks = 0;
    std::vector<double> energies;
};

OracleResult fcc_oracle(const std::string& pep) {
    const int n = static_cast<int>(pep.size());
    const int free = n - 1;
    OracleResult r;
    r.best = 1e300;
    std::vector<int> digits(static_cast<std::size_t>(free), 0);
    while (true) {
        bool ok = digits[0] == 0 &&
                  std::find(lattice::kSecondTurnLabels.begin(), lattice::kSecondTurnLabels.end(), digits[1]) !=
                      lattice::kSecondTurnLabels.end();
        for (int j = 0; ok && j + 1 < free; ++j) ok = lattice::fcc_inverse(digits[j]) != digits[j + 1];
        if (ok) {
            ++r.walks;
            std::vector<Vec3> pos{{0, 0, 0}};
            for (int t : digits) pos.push_back(pos.back() + lattice::fcc_displacement(t));
            double e = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 2; j < n; ++j) {
                    const int d = (pos[j] - pos[i]).norm2();
                    if (d == 0) e += kDefaultCollisionPenalty;
                    if (d == 2) e += mj().at(pep[i], pep[j]);
                }
            r.energies.push_back(e);
            r.best = std::min(r.best, e);
        }
        int k = free - 1;
        while (k >= 0 && ++digits[static_cast<std::size_t>(k)] == lattice::kFccTurnCount) digits[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    std::sort(r.energies.begin(), r.energies.end());
    return r;
}

}  // namespace

TEST_CASE("enumeration sizes") {
    CHECK(enumeration_size(LatticeKind::FCC, 6) == 5324);
    CHECK(enumeration_size(LatticeKind::FCC, 3) == 4);
    CHECK(enumeration_size(LatticeKind::TET, 6) == 27);
    CHECK(enumeration_size(LatticeKind::FCC, 40) > boost::multiprecision::cpp_int(1) << 64);
}

TEST_CASE("search visits every sequence") {
    for (int n = 3; n <= 7; ++n) {
        const std::string pep = std::string("KLVFFAG").substr(0, static_cast<std::size_t>(n));
        for (auto lat : {LatticeKind::FCC, LatticeKind::TET}) {
            const auto res = qfold::search::search(config(pep, 1, lat));
            CHECK(res.visited == enumeration_size(lat, n));
        }
    }
}

TEST_CASE("search agrees with the brute-force oracle") {
    // Frozen from the oracle with the bundled MJ matrix.
    const std::vector<std::pair<std::string, double>> cases{{"KLVF", -13.13}, {"GNLVS", -14.29}, {"KLVFFA", -30.57}};
    for (const auto& [pep, frozen] : cases) {
        const auto oracle = fcc_oracle(pep);
        auto cfg = config(pep, 1000000);
        const auto res = qfold::search::search(cfg);
        INFO(pep);
        CHECK(oracle.walks == res.visited);
        CHECK(res.top[0].energy == Catch::Approx(oracle.best).margin(1e-9));
        CHECK(res.top[0].energy == Catch::Approx(frozen).margin(1e-9));
        // every non-colliding walk is retained; their energies match the oracle's
        std::vector<double> ours;
        for (const auto& r : res.top.records()) ours.push_back(r.energy);
        std::vector<double> theirs;
        for (double e : oracle.energies)
            if (e < kDefaultCollisionPenalty / 2) theirs.push_back(e);
        REQUIRE(ours.size() == theirs.size());
        for (std::size_t i = 0; i < ours.size(); ++i) CHECK(ours[i] == Catch::Approx(theirs[i]).margin(1e-9));
    }
}

TEST_CASE("TopK is independent of the worker count") {
    for (auto lat : {LatticeKind::FCC, LatticeKind::TET}) {
        auto cfg = config("KLVFFAG", 25, lat);
        cfg.workers = 1;
        const auto one = qfold::search::search(cfg);
        cfg.workers = 3;
        const auto three = qfold::search::search(cfg);
        CHECK(one.top.records() == three.top.records());
        CHECK(one.visited == three.visited);
    }
}

TEST_CASE("records are sorted and re-score exactly") {
    auto cfg = config("KLVFFA", 50);
    const auto res = qfold::search::search(cfg);
    REQUIRE(res.top.size() == 50);
    CHECK(std::is_sorted(res.top.records().begin(), res.top.records().end(), record_less));
    for (const auto& r : res.top.records()) {
        CHECK(conformation_energy(r.coords, cfg.peptide, cfg) == r.energy);
        CHECK(r.coords == lattice::coords_from_turns(r.turns));
        CHECK(r.bits == lattice::pack_configuration(r.turns));
        CHECK(collision_count(r.coords) == 0);
    }
}

TEST_CASE("conformation energy examples") {
    auto cfg = config("KLVFFA");
    CHECK(conformation_energy(lattice::coords_from_turns({LatticeKind::FCC, {0, 0, 0, 0, 0}}), "KLVFFA", cfg) == 0.0);
    const auto clash = lattice::coords_from_turns({LatticeKind::FCC, {0, 9, 8, 0, 0}});
    CHECK(collision_count(clash) == 1);
    // penalty dominates any contact energy a six-bead chain can collect
    CHECK(conformation_energy(clash, "KLVFFA", cfg) > 0.9 * kDefaultCollisionPenalty);

    // A compact fold scored against contacts counted by hand from its coordinates.
    const auto fold = lattice::coords_from_turns({LatticeKind::FCC, {0, 7, 1, 3, 11}});
    REQUIRE(collision_count(fold) == 0);
    double hand = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 2; j < 6; ++j)
            if ((fold.coords[j] - fold.coords[i]).norm2() == 2)
                hand += scoring::pair_energy(mj(), cfg.peptide[i], cfg.peptide[j], scoring::nn_scaling(LatticeKind::FCC, 1));
    CHECK(hand < 0.0);
    CHECK(conformation_energy(fold, "KLVFFA", cfg) == Catch::Approx(hand).margin(1e-9));
}

TEST_CASE("second-neighbor level adds scaled d^2 = 4 contacts") {
    auto cfg = config("KLVFFA");
    const auto fold = lattice::coords_from_turns({LatticeKind::FCC, {0, 7, 1, 3, 11}});
    double extra = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 2; j < 6; ++j)
            if ((fold.coords[j] - fold.coords[i]).norm2() == 4) extra += mj().at(cfg.peptide[i], cfg.peptide[j]);
    const double e1 = conformation_energy(fold, cfg.peptide, cfg);
    cfg.nn_level = 2;
    CHECK(conformation_energy(fold, cfg.peptide, cfg) == Catch::Approx(e1 + extra / std::sqrt(2.0)).margin(1e-9));
}

TEST_CASE("HP peptide without H-H pairs has zero ground energy") {
    auto cfg = config("KGS", 1);
    cfg.matrix = scoring::hp_matrix();
    CHECK(qfold::search::search(cfg).top[0].energy == 0.0);
}

TEST_CASE("TET search") {
    auto cfg = config("KLVFFAGK", 5, LatticeKind::TET);
    const auto res = qfold::search::search(cfg);
    CHECK(res.visited == 243);
    for (const auto& r : res.top.records()) {
        CHECK(r.turns.turns[0] == 0);
        CHECK(r.turns.turns[1] == 1);
        CHECK(conformation_energy(r.coords, cfg.peptide, cfg) == r.energy);
    }
}

TEST_CASE("TopK keeps the k best with deterministic ties") {
    TopK top(2);
    ConformerRecord a{1.0, {LatticeKind::FCC, {0, 0}}, "00", {}};
    ConformerRecord b{1.0, {LatticeKind::FCC, {0, 2}}, "01", {}};
    ConformerRecord c{0.5, {LatticeKind::FCC, {0, 8}}, "10", {}};
    top.insert(b);
    top.insert(a);
    top.insert(c);
    REQUIRE(top.size() == 2);
    CHECK(top[0] == c);
    CHECK(top[1] == a);
    TopK other(2);
    other.insert(b);
    top.merge(other);
    CHECK(top[1] == a);
    CHECK_THROWS_AS(TopK(0), Error);
}

TEST_CASE("search budgets raise BudgetExceeded") {
    auto cfg = config("KLVFFAGK", 1);
    cfg.max_sequences = 100;
    try {
        qfold::search::search(cfg);
        FAIL("expected BudgetExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BudgetExceeded);
    }
}
