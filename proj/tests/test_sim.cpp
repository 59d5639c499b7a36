#include "qfold/error.hpp"
#include "qfold/sim.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace qfold;
using namespace qfold::sim;

namespace {

std::vector<double> random_params(const Ansatz& a, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    std::vector<double> p(static_cast<std::size_t>(a.param_count()));
    for (auto& x : p) x = u(rng);
    return p;
}

std::vector<double> random_table(int bits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> t(std::size_t{1} << bits);
    for (auto& x : t) x = u(rng);
    return t;
}

// Dense unitary of the ansatz built from Kronecker products; qubit k is bit k
// of the basis index, so it is the rightmost factor for k = 0.
Eigen::MatrixXd dense_ansatz(const Ansatz& a, const std::vector<double>& p) {
    const int n = a.n_qubits;
    const Eigen::Index dim = Eigen::Index{1} << n;
    auto single = [&](int q, const Eigen::Matrix2d& g) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(1, 1);
        for (int k = n - 1; k >= 0; --k) {
            const Eigen::MatrixXd f = k == q ? Eigen::MatrixXd(g) : Eigen::MatrixXd::Identity(2, 2);
            Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j) next.block(i * 2, j * 2, 2, 2) = m(i, j) * f;
            m = next;
        }
        return m;
    };
    auto cnot = [&](int c, int t) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index x = 0; x < dim; ++x) {
            const Eigen::Index y = ((x >> c) & 1) ? (x ^ (Eigen::Index{1} << t)) : x;
            m(y, x) = 1.0;
        }
        return m;
    };
    Eigen::MatrixXd u = Eigen::MatrixXd::Identity(dim, dim);
    for (int l = 0; l <= a.layers; ++l) {
        for (int q = 0; q < n; ++q) {
            const double th = p[static_cast<std::size_t>(l * n + q)];
            Eigen::Matrix2d ry;
            ry << std::cos(th / 2), -std::sin(th / 2), std::sin(th / 2), std::cos(th / 2);
            u = single(q, ry) * u;
        }
        if (l < a.layers)
            for (int q = 0; q + 1 < n; ++q) u = cnot(q, q + 1) * u;
    }
    return u;
}

}  // namespace

TEST_CASE("zero angles leave the all-zero state") {
    const Ansatz a{5, 2};
    const std::vector<double> zeros(static_cast<std::size_t>(a.param_count()), 0.0);
    const auto s = evolve(a, zeros);
    CHECK(s[0] == 1.0);
    CHECK(norm2(s) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("a half turn flips a single qubit") {
    const auto s = evolve({1, 0}, std::vector<double>{std::numbers::pi});
    CHECK(std::abs(s[0]) < 1e-15);
    CHECK(std::abs(s[1]) == Catch::Approx(1.0));
}

TEST_CASE("evolve matches the dense-matrix oracle") {
    for (int n = 1; n <= 6; ++n) {
        const Ansatz a{n, 2};
        const auto p = random_params(a, static_cast<std::uint64_t>(n));
        const auto s = evolve(a, p);
        const Eigen::VectorXd ref = dense_ansatz(a, p).col(0);
        for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == Catch::Approx(ref(static_cast<Eigen::Index>(i))).margin(1e-12));
    }
}

TEST_CASE("norm is preserved on random circuits") {
    for (int n : {2, 8, 12, 16}) {
        const Ansatz a{n, 3};
        CHECK(std::abs(norm2(evolve(a, random_params(a, 77))) - 1.0) <= 1e-10);
    }
}

TEST_CASE("evolve validates its inputs") {
    CHECK_THROWS_AS(evolve({3, 2}, std::vector<double>(4, 0.0)), Error);
    StateVector s(4, 0.0);
    CHECK_THROWS_AS(apply_ry(s, 2, 0.1), Error);
    CHECK_THROWS_AS(apply_cnot(s, 0, 0), Error);
}

TEST_CASE("diagonal expectations") {
    const int n = 4;
    const auto table = random_table(n, 3);
    const DiagonalOperator op(table, n, n);
    StateVector zero(16, 0.0);
    zero[0] = 1.0;
    CHECK(expectation(zero, op) == table[0]);

    StateVector uniform(16, 0.25);
    double mean = 0.0;
    for (double v : table) mean += v / 16.0;
    CHECK(expectation(uniform, op) == Catch::Approx(mean));

    // linearity and consistent relabeling
    const auto s = evolve({n, 2}, random_params({n, 2}, 9));
    const auto t2 = random_table(n, 4);
    std::vector<double> mix(table.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * table[i] - 3.0 * t2[i];
    CHECK(expectation(s, DiagonalOperator(mix, n, n)) ==
          Catch::Approx(2.0 * expectation(s, op) - 3.0 * expectation(s, DiagonalOperator(t2, n, n))));
    StateVector perm(s.size());
    std::vector<double> ptable(table.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        perm[i ^ 0b1010] = s[i];
        ptable[i ^ 0b1010] = table[i];
    }
    CHECK(expectation(perm, DiagonalOperator(ptable, n, n)) == Catch::Approx(expectation(s, op)));
}

TEST_CASE("diagonal operator from a polynomial") {
    const auto p = pb::Polynomial::variable(3, 0) * 2.0 + pb::Polynomial::variable(3, 2) * pb::Polynomial::variable(3, 1);
    const DiagonalOperator op(p, 3);
    for (std::uint64_t x = 0; x < 8; ++x) CHECK(op(x) == p.evaluate(x));
}

TEST_CASE("CVaR examples and properties") {
    CHECK(cvar({{0.0, 0.05}, {10.0, 0.95}}, 0.1) == Catch::Approx(5.0));
    const std::vector<std::pair<double, double>> v{{3.0, 0.2}, {-1.0, 0.3}, {7.0, 0.5}};
    const double mean = 0.6 - 0.3 + 3.5;
    CHECK(std::abs(cvar(v, 1.0) - mean) <= 1e-12);
    CHECK(cvar(v, 1e-9) == Catch::Approx(-1.0));
    double prev = -1e300;
    for (double a = 0.05; a <= 1.0; a += 0.05) {
        const double c = cvar(v, a);
        CHECK(c >= prev - 1e-12);
        CHECK(c <= mean + 1e-12);
        prev = c;
    }
    CHECK_THROWS_AS(cvar({}, 0.5), Error);
    CHECK_THROWS_AS(cvar(v, 0.0), Error);
}

TEST_CASE("CVaR evaluator matches the pairwise definition") {
    const int n = 6;
    const Ansatz a{n, 2};
    const DiagonalOperator op(random_table(n, 1), n, n);
    const auto s = evolve(a, random_params(a, 2));
    const auto pr = probabilities(s);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < pr.size(); ++i) pairs.emplace_back(op(i), pr[i]);
    for (double alpha : {0.01, 0.1, 0.5, 1.0}) CHECK(CvarEvaluator(op, alpha)(s) == Catch::Approx(cvar(pairs, alpha)).margin(1e-12));
    CHECK(std::abs(CvarEvaluator(op, 1.0)(s) - expectation(s, op)) <= 1e-12);
}

TEST_CASE("sampling") {
    StateVector zero(8, 0.0);
    zero[0] = 1.0;
    const auto z = sample(zero, 1000, 1);
    CHECK(z.counts.size() == 1);
    CHECK(z.counts.at(0) == 1000);

    StateVector uniform(4, 0.5);
    const auto t = sample(uniform, 100000, 42);
    const double sigma = std::sqrt(100000 * 0.25 * 0.75);
    for (std::uint64_t b = 0; b < 4; ++b) CHECK(std::abs(static_cast<double>(t.counts.at(b)) - 25000.0) <= 5 * sigma);

    const auto s = evolve({5, 2}, random_params({5, 2}, 8));
    const auto a1 = sample(s, 5000, 123);
    const auto a2 = sample(s, 5000, 123);
    CHECK(a1.counts == a2.counts);
    std::uint64_t total = 0;
    for (const auto& [k, c] : a1.counts) total += c;
    CHECK(total == 5000);
}

TEST_CASE("shot tables round-trip through text") {
    const auto s = evolve({5, 2}, random_params({5, 2}, 8));
    const auto t = sample(s, 2000, 5);
    std::ostringstream out;
    write_shots(out, t);
    std::istringstream in(out.str());
    const auto back = read_shots(in);
    CHECK(back.n_qubits == t.n_qubits);
    CHECK(back.shots == t.shots);
    CHECK(back.counts == t.counts);
    CHECK(index_to_bits(0b110, 4) == "0110");
    CHECK(bits_to_index("0110") == 0b110);
    std::istringstream bad("bitstring\tcount\n01x\t3\n");
    CHECK_THROWS_AS(read_shots(bad), Error);
}

TEST_CASE("parameter-shift gradient examples") {
    const Ansatz one{1, 0};
    const auto p1 = [](const StateVector& s) { return s[1] * s[1]; };
    CHECK(parameter_shift_gradient(one, std::vector<double>{0.0}, p1)[0] == Catch::Approx(0.0).margin(1e-15));
    const auto constant = [](const StateVector&) { return 4.0; };
    const Ansatz a{3, 1};
    for (double g : parameter_shift_gradient(a, random_params(a, 1), constant)) CHECK(g == 0.0);
}

TEST_CASE("parameter-shift gradients match central finite differences") {
    const double h = 1e-5;
    for (std::uint64_t inst = 0; inst < 20; ++inst) {
        const int n = 6;
        const Ansatz a{n, 2};
        const DiagonalOperator op(random_table(n, 100 + inst), n, n);
        const auto f = [&](const StateVector& s) { return expectation(s, op); };
        auto p = random_params(a, 200 + inst);
        const auto g = parameter_shift_gradient(a, p, f);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double x = p[k];
            p[k] = x + h;
            const double up = f(evolve(a, p));
            p[k] = x - h;
            const double dn = f(evolve(a, p));
            p[k] = x;
            const double fd = (up - dn) / (2 * h);
            CHECK(std::abs(g[k] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("jacobian and adjoint gradients agree with parameter shift") {
    const int n = 7;
    const Ansatz a{n, 2};
    const DiagonalOperator o0(random_table(n, 1), n, n);
    const DiagonalOperator o1(random_table(n, 2), n, n);
    const auto p = random_params(a, 3);
    const std::vector<const DiagonalOperator*> ops{&o0, &o1};
    const auto jac = parameter_shift_jacobian(a, p, ops);
    const std::vector<double> w{1.0, 0.7};
    const auto adj = adjoint_gradient(a, p, ops, w);
    const auto g0 = parameter_shift_gradient(a, p, [&](const StateVector& s) { return expectation(s, o0); });
    const auto g1 = parameter_shift_gradient(a, p, [&](const StateVector& s) { return expectation(s, o1); });
    for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(jac[0][k] == Catch::Approx(g0[k]).margin(1e-12));
        CHECK(jac[1][k] == Catch::Approx(g1[k]).margin(1e-12));
        CHECK(adj[k] == Catch::Approx(g0[k] + 0.7 * g1[k]).margin(1e-10));
    }
}
