#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qfold::pb {

/// A monomial's variable set as a bit mask; variable i is bit i. Instances are
/// therefore limited to 64 binary variables.
using VarMask = std::uint64_t;
inline constexpr int kMaxVars = 64;
inline constexpr double kDropThreshold = 1e-12;
inline constexpr std::size_t kDefaultTermCeiling = 5'000'000;

struct Term {
    VarMask vars = 0;
    double coeff = 0.0;

    int degree() const { return __builtin_popcountll(vars); }
    bool operator==(const Term&) const = default;
};

std::vector<int> vars_of(VarMask mask);

/// Multilinear polynomial over binary variables in canonical form: terms are
/// unique per variable set, sorted by (degree, mask), and no |coeff| < 1e-12.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int n_vars);
    Polynomial(int n_vars, std::vector<Term> terms);

    static Polynomial constant(int n_vars, double c);
    static Polynomial variable(int n_vars, int index);
    /// q_index when positive, 1 - q_index otherwise.
    static Polynomial literal(int n_vars, int index, bool positive);

    int n_vars() const { return n_vars_; }
    std::span<const Term> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    double constant_term() const;
    VarMask support() const;

    double evaluate(VarMask assignment) const;
    /// Throws MissingVariable when a used variable lies beyond bits.size().
    double evaluate(std::span<const std::uint8_t> bits) const;

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(double scale);

    bool operator==(const Polynomial&) const = default;

private:
    int n_vars_ = 0;
    std::vector<Term> terms_;
};

Polynomial operator+(Polynomial a, const Polynomial& b);
Polynomial operator-(Polynomial a, const Polynomial& b);
Polynomial operator*(Polynomial a, double s);
Polynomial operator*(double s, Polynomial a);
Polynomial operator*(const Polynomial& a, const Polynomial& b);

Polynomial sum(const Polynomial& p, const Polynomial& q);
Polynomial product(const Polynomial& p, const Polynomial& q);
double evaluate(const Polynomial& p, std::span<const std::uint8_t> bits);

/// Horner evaluation of outer(inner) for outer given in the monomial basis,
/// outer[k] being the coefficient of x^k. Throws DegreeOverflow if an
/// intermediate exceeds max_terms.
Polynomial compose_scalar_poly(std::span<const double> outer, const Polynomial& inner,
                               std::size_t max_terms = kDefaultTermCeiling);

/// outer(inner) computed on the value table of inner over its support. When
/// inner is integer valued, coefficients are assembled from exact integer
/// Moebius transforms of the level sets, so structurally absent monomials stay
/// absent instead of surviving as rounding noise.
Polynomial compose_on_values(const std::function<double(double)>& outer, const Polynomial& inner,
                             std::size_t max_terms = kDefaultTermCeiling);

struct Stats {
    std::size_t term_count = 0;
    int degree = 0;
    int n_vars_used = 0;

    bool operator==(const Stats&) const = default;
};

Stats stats(const Polynomial& p);

/// Dense value table over the low n_bits variables: table[x] = p(x). Uses a
/// subset-sum transform, O(n_bits 2^n_bits).
std::vector<double> value_table(const Polynomial& p, int n_bits);

/// Inverse of value_table.
Polynomial from_value_table(std::span<const double> table, int n_bits, int n_vars);

/// In-place subset-sum (zeta) and Moebius transforms over 2^n_bits entries.
void zeta_transform(std::span<double> data, int n_bits);
void moebius_transform(std::span<double> data, int n_bits);

}  // namespace qfold::pb
