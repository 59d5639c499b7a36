#include "qfold/error.hpp"
#include "qfold/polyfit.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

using namespace qfold;
using namespace qfold::polyfit;

namespace {

// R^2 of an unconstrained least-squares fit of the given degree, solved in the
// monomial basis of t with an SVD.
double oracle_r2(int s, double penalty, int degree) {
    const int m = s * s + 1;
    const double dmax = 2.0 * s * s;
    Eigen::MatrixXd v(m, degree + 1);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
    f(0) = penalty;
    for (int i = 0; i < m; ++i) {
        const double t = 2.0 * (2.0 * i) / dmax - 1.0;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            v(i, k) = p;
            p *= t;
        }
    }
    const Eigen::VectorXd c = v.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(f);
    const double mean = f.mean();
    return 1.0 - (f - v * c).squaredNorm() / (f.array() - mean).square().sum();
}

int oracle_degree(int s, double penalty, double r2_tol, int d0) {
    for (int d = d0;; ++d)
        if (d == s * s || oracle_r2(s, penalty, d) >= r2_tol) return d;
}

}  // namespace

TEST_CASE("two-point target gives an exact line") {
    const auto fit = fit_penalty({1, 50.0}, 0.999, 2);
    CHECK(fit.degree == 1);
    CHECK(fit.r2 == 1.0);
    CHECK(fit.interpolated);
    CHECK(fit.eval_cheb(0.0) == Catch::Approx(50.0));
    CHECK(fit.eval_cheb(2.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("minimal degrees agree with an independent least-squares oracle") {
    // Frozen from the oracle at P0 = 50, R^2 tolerance 0.999, d0 = 2.
    const std::vector<int> frozen{7, 10, 12, 15, 18, 20, 23, 26, 28};
    for (int s = 3; s <= 11; ++s) {
        const auto fit = fit_penalty({s, 50.0});
        INFO("separation " << s);
        CHECK(fit.degree == oracle_degree(s, 50.0, 0.999, 2));
        CHECK(fit.degree == frozen[static_cast<std::size_t>(s - 3)]);
        CHECK(fit.r2 == Catch::Approx(oracle_r2(s, 50.0, fit.degree)).margin(1e-9));
    }
}

TEST_CASE("fits meet the tolerance and stay near the target values") {
    const auto fits = fit_separations(11);
    int prev = 0;
    for (const auto& [s, fit] : fits) {
        INFO("separation " << s);
        CHECK(fit.r2 >= 0.999);
        CHECK(std::abs(fit.eval_cheb(0.0) - 50.0) <= 2.5);
        for (int k = 1; k <= s * s; ++k) CHECK(std::abs(fit.eval_cheb(2.0 * k)) <= 2.5);
        CHECK(fit.degree >= prev);
        prev = fit.degree;
    }
}

TEST_CASE("Chebyshev and monomial forms agree on the domain") {
    for (const auto& [s, fit] : fit_separations(11)) {
        for (int i = 0; i <= 200; ++i) {
            const double d = fit.domain_max * i / 200.0;
            const double c = fit.eval_cheb(d);
            CHECK(fit.eval_mono(d) == Catch::Approx(c).epsilon(1e-8).margin(1e-8 * fit.penalty));
        }
    }
}

TEST_CASE("fit_penalty is deterministic") {
    const auto a = fit_penalty({6, 50.0});
    const auto b = fit_penalty({6, 50.0});
    CHECK(a.coeffs_cheb == b.coeffs_cheb);
    CHECK(a.coeffs_mono == b.coeffs_mono);
}

TEST_CASE("fit_penalty validates inputs") {
    CHECK_THROWS_AS(fit_penalty({3, 50.0}, 0.0), Error);
    CHECK_THROWS_AS(fit_penalty({3, 50.0}, 0.999, 0), Error);
    try {
        fit_penalty({5, 50.0}, 0.999, 2, 4);
        FAIL("expected DegreeCeiling");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegreeCeiling);
    }
}

TEST_CASE("exact interpolation when the tolerance is 1") {
    const auto fit = fit_penalty({2, 50.0}, 1.0);
    CHECK(fit.degree == 4);
    CHECK(fit.interpolated);
    CHECK(fit.eval_cheb(0.0) == Catch::Approx(50.0));
}

TEST_CASE("Clenshaw matches the explicit recurrence") {
    const std::vector<double> c{0.5, -1.0, 0.25, 2.0};
    for (double t : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
        const double t2 = 2 * t * t - 1;
        const double t3 = 2 * t * t2 - t;
        CHECK(clenshaw(c, t) == Catch::Approx(0.5 - t + 0.25 * t2 + 2.0 * t3));
    }
    CHECK(chebyshev_to_monomial({0, 0, 1}) == std::vector<double>{-1, 0, 2});
}

TEST_CASE("olap penalty composition examples") {
    ChebyshevFit constant;
    constant.separation = 3;
    constant.penalty = 50.0;
    constant.domain_max = 18.0;
    constant.coeffs_cheb = {50.0};
    constant.coeffs_mono = {50.0};
    const auto q = pb::Polynomial::variable(4, 0) + pb::Polynomial::variable(4, 1);
    CHECK(build_olap_penalty(constant, q) == pb::Polynomial::constant(4, 50.0));

    // identity in D: P(D) = D is t * dmax/2 + dmax/2
    ChebyshevFit identity = constant;
    identity.coeffs_cheb = {9.0, 9.0};
    identity.coeffs_mono = {9.0, 9.0};
    const auto two = pb::Polynomial::constant(4, 2.0);
    CHECK(build_olap_penalty(identity, two) == two);
    CHECK(build_olap_penalty_horner(identity, two) == two);
}

TEST_CASE("value-table and Horner penalty routes agree") {
    const auto fit = fit_penalty({3, 50.0});
    pb::Polynomial d(10);
    for (int i = 0; i < 10; ++i) d += static_cast<double>(2 * (i % 3)) * pb::Polynomial::variable(10, i);
    const auto a = build_olap_penalty(fit, d);
    const auto b = build_olap_penalty_horner(fit, d);
    for (pb::VarMask x = 0; x < 1024; ++x) CHECK(a.evaluate(x) == Catch::Approx(b.evaluate(x)).margin(1e-6));
}

TEST_CASE("fit report lists one row per separation") {
    std::ostringstream s;
    write_fit_report(s, fit_separations(5));
    std::string line;
    std::istringstream in(s.str());
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}
