#include "qfold/pb_poly.hpp"

#include "qfold/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

namespace qfold::pb {

namespace {

bool term_less(const Term& a, const Term& b) {
    const int da = a.degree();
    const int db = b.degree();
    if (da != db) return da < db;
    return a.vars < b.vars;
}

void check_n_vars(int n_vars) {
    if (n_vars < 0 || n_vars > kMaxVars)
        throw Error(ErrorCode::InvalidArgument, "polynomials support at most 64 variables, got " +
                                                    std::to_string(n_vars));
}

void check_index(int n_vars, int index) {
    if (index < 0 || index >= n_vars)
        throw Error(ErrorCode::IndexOutOfRange, "variable " + std::to_string(index) + " of " +
                                                    std::to_string(n_vars));
}

std::vector<Term> canonical_from_map(const std::unordered_map<VarMask, double>& acc) {
    std::vector<Term> out;
    out.reserve(acc.size());
    for (const auto& [mask, c] : acc)
        if (std::abs(c) >= kDropThreshold) out.push_back({mask, c});
    std::sort(out.begin(), out.end(), term_less);
    return out;
}

std::vector<Term> merge_terms(std::span<const Term> a, std::span<const Term> b, double sign) {
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && term_less(a[i], b[j]))) {
            out.push_back(a[i++]);
        } else if (i == a.size() || term_less(b[j], a[i])) {
            out.push_back({b[j].vars, sign * b[j].coeff});
            ++j;
        } else {
            const double c = a[i].coeff + sign * b[j].coeff;
            if (std::abs(c) >= kDropThreshold) out.push_back({a[i].vars, c});
            ++i;
            ++j;
        }
    }
    return out;
}

int common_n_vars(const Polynomial& a, const Polynomial& b) {
    return std::max(a.n_vars(), b.n_vars());
}

// Maps the support of p onto dense bit positions 0..k-1.
struct Compression {
    std::vector<int> vars;  // dense position -> original variable

    VarMask compress(VarMask mask) const {
        VarMask out = 0;
        for (std::size_t b = 0; b < vars.size(); ++b)
            if (mask & (VarMask{1} << vars[b])) out |= VarMask{1} << b;
        return out;
    }

    VarMask expand(VarMask dense) const {
        VarMask out = 0;
        for (std::size_t b = 0; b < vars.size(); ++b)
            if (dense & (VarMask{1} << b)) out |= VarMask{1} << vars[b];
        return out;
    }
};

template <typename T>
void zeta_impl(std::span<T> data, int n_bits) {
    const std::size_t size = std::size_t{1} << n_bits;
    for (int i = 0; i < n_bits; ++i) {
        const std::size_t step = std::size_t{1} << i;
        for (std::size_t base = 0; base < size; base += 2 * step)
            for (std::size_t x = base; x < base + step; ++x) data[x + step] += data[x];
    }
}

template <typename T>
void moebius_impl(std::span<T> data, int n_bits) {
    const std::size_t size = std::size_t{1} << n_bits;
    for (int i = 0; i < n_bits; ++i) {
        const std::size_t step = std::size_t{1} << i;
        for (std::size_t base = 0; base < size; base += 2 * step)
            for (std::size_t x = base; x < base + step; ++x) data[x + step] -= data[x];
    }
}

constexpr int kMaxTableBits = 30;

}  // namespace

std::vector<int> vars_of(VarMask mask) {
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

Polynomial::Polynomial(int n_vars) : n_vars_(n_vars) { check_n_vars(n_vars); }

Polynomial::Polynomial(int n_vars, std::vector<Term> terms) : n_vars_(n_vars) {
    check_n_vars(n_vars);
    const VarMask allowed = n_vars == kMaxVars ? ~VarMask{0} : (VarMask{1} << n_vars) - 1;
    std::unordered_map<VarMask, double> acc;
    for (const auto& t : terms) {
        if (t.vars & ~allowed)
            throw Error(ErrorCode::IndexOutOfRange, "term uses a variable beyond n_vars");
        acc[t.vars] += t.coeff;
    }
    terms_ = canonical_from_map(acc);
}

Polynomial Polynomial::constant(int n_vars, double c) {
    Polynomial p(n_vars);
    if (std::abs(c) >= kDropThreshold) p.terms_.push_back({0, c});
    return p;
}

Polynomial Polynomial::variable(int n_vars, int index) {
    check_index(n_vars, index);
    Polynomial p(n_vars);
    p.terms_.push_back({VarMask{1} << index, 1.0});
    return p;
}

Polynomial Polynomial::literal(int n_vars, int index, bool positive) {
    check_index(n_vars, index);
    Polynomial p(n_vars);
    if (positive) {
        p.terms_.push_back({VarMask{1} << index, 1.0});
    } else {
        p.terms_.push_back({0, 1.0});
        p.terms_.push_back({VarMask{1} << index, -1.0});
    }
    return p;
}

double Polynomial::constant_term() const {
    return (!terms_.empty() && terms_.front().vars == 0) ? terms_.front().coeff : 0.0;
}

VarMask Polynomial::support() const {
    VarMask s = 0;
    for (const auto& t : terms_) s |= t.vars;
    return s;
}

double Polynomial::evaluate(VarMask assignment) const {
    double v = 0.0;
    for (const auto& t : terms_)
        if ((t.vars & ~assignment) == 0) v += t.coeff;
    return v;
}

double Polynomial::evaluate(std::span<const std::uint8_t> bits) const {
    const VarMask used = support();
    if (used != 0) {
        const int highest = 63 - std::countl_zero(used);
        if (highest >= static_cast<int>(bits.size()))
            throw Error(ErrorCode::MissingVariable, "assignment lacks variable " + std::to_string(highest));
    }
    VarMask assignment = 0;
    for (std::size_t i = 0; i < bits.size() && i < static_cast<std::size_t>(kMaxVars); ++i)
        if (bits[i]) assignment |= VarMask{1} << i;
    return evaluate(assignment);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    n_vars_ = common_n_vars(*this, other);
    terms_ = merge_terms(terms_, other.terms_, 1.0);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
    n_vars_ = common_n_vars(*this, other);
    terms_ = merge_terms(terms_, other.terms_, -1.0);
    return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        const double c = t.coeff * scale;
        if (std::abs(c) >= kDropThreshold) out.push_back({t.vars, c});
    }
    terms_ = std::move(out);
    return *this;
}

Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
Polynomial operator*(Polynomial a, double s) { return a *= s; }
Polynomial operator*(double s, Polynomial a) { return a *= s; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::unordered_map<VarMask, double> acc;
    acc.reserve(a.size() * b.size() / 2 + 1);
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms()) acc[ta.vars | tb.vars] += ta.coeff * tb.coeff;
    const int n = common_n_vars(a, b);
    Polynomial out(n);
    out += Polynomial(n, canonical_from_map(acc));
    return out;
}

Polynomial sum(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial product(const Polynomial& p, const Polynomial& q) { return p * q; }
double evaluate(const Polynomial& p, std::span<const std::uint8_t> bits) { return p.evaluate(bits); }

Polynomial compose_scalar_poly(std::span<const double> outer, const Polynomial& inner, std::size_t max_terms) {
    const int n = inner.n_vars();
    if (outer.empty()) return Polynomial(n);
    Polynomial acc = Polynomial::constant(n, outer.back());
    for (std::size_t k = outer.size() - 1; k-- > 0;) {
        acc = acc * inner;
        acc += Polynomial::constant(n, outer[k]);
        if (acc.size() > max_terms)
            throw Error(ErrorCode::DegreeOverflow, "composition exceeded " + std::to_string(max_terms) + " terms");
    }
    return acc;
}

Polynomial compose_on_values(const std::function<double(double)>& outer, const Polynomial& inner,
                             std::size_t max_terms) {
    Compression comp{vars_of(inner.support())};
    const int k = static_cast<int>(comp.vars.size());
    if (k > kMaxTableBits)
        throw Error(ErrorCode::DegreeOverflow, "inner polynomial depends on " + std::to_string(k) +
                                                   " variables; value-table composition supports 30");
    std::vector<Term> dense;
    dense.reserve(inner.size());
    for (const auto& t : inner.terms()) dense.push_back({comp.compress(t.vars), t.coeff});
    const auto values = value_table(Polynomial(k, dense), k);
    const std::size_t size = values.size();

    bool integral = true;
    for (double v : values)
        if (std::abs(v - std::round(v)) > 1e-9) {
            integral = false;
            break;
        }

    std::vector<Term> terms;
    if (!integral) {
        std::vector<double> f(size);
        for (std::size_t x = 0; x < size; ++x) f[x] = outer(values[x]);
        moebius_transform(f, k);
        for (std::size_t s = 0; s < size; ++s)
            if (std::abs(f[s]) >= kDropThreshold) terms.push_back({comp.expand(s), f[s]});
    } else {
        std::map<long long, double> levels;
        for (double v : values) levels.emplace(std::llround(v), 0.0);
        for (auto& [level, g] : levels) g = outer(static_cast<double>(level));

        std::vector<double> coeff(size, 0.0);
        std::vector<std::uint8_t> present(size, 0);
        std::vector<long long> indicator(size);
        for (const auto& [level, g] : levels) {
            for (std::size_t x = 0; x < size; ++x) indicator[x] = std::llround(values[x]) == level ? 1 : 0;
            moebius_impl<long long>(indicator, k);
            for (std::size_t s = 0; s < size; ++s) {
                if (indicator[s] == 0) continue;
                coeff[s] += g * static_cast<double>(indicator[s]);
                present[s] = 1;
            }
        }
        for (std::size_t s = 0; s < size; ++s)
            if (present[s] && std::abs(coeff[s]) >= kDropThreshold) terms.push_back({comp.expand(s), coeff[s]});
    }
    if (terms.size() > max_terms)
        throw Error(ErrorCode::DegreeOverflow, "composition exceeded " + std::to_string(max_terms) + " terms");
    return Polynomial(inner.n_vars(), std::move(terms));
}

Stats stats(const Polynomial& p) {
    Stats s;
    s.term_count = p.size();
    for (const auto& t : p.terms()) s.degree = std::max(s.degree, t.degree());
    s.n_vars_used = std::popcount(p.support());
    return s;
}

void zeta_transform(std::span<double> data, int n_bits) { zeta_impl<double>(data, n_bits); }
void moebius_transform(std::span<double> data, int n_bits) { moebius_impl<double>(data, n_bits); }

std::vector<double> value_table(const Polynomial& p, int n_bits) {
    if (n_bits < 0 || n_bits > kMaxTableBits)
        throw Error(ErrorCode::InvalidArgument, "value table of " + std::to_string(n_bits) + " bits");
    const VarMask limit = VarMask{1} << n_bits;
    std::vector<double> table(static_cast<std::size_t>(limit), 0.0);
    for (const auto& t : p.terms()) {
        if (t.vars >= limit)
            throw Error(ErrorCode::MissingVariable, "term uses a variable beyond bit " + std::to_string(n_bits - 1));
        table[static_cast<std::size_t>(t.vars)] += t.coeff;
    }
    zeta_transform(table, n_bits);
    return table;
}

Polynomial from_value_table(std::span<const double> table, int n_bits, int n_vars) {
    if (table.size() != (std::size_t{1} << n_bits))
        throw Error(ErrorCode::LengthMismatch, "table size does not match bit count");
    std::vector<double> coeff(table.begin(), table.end());
    moebius_transform(coeff, n_bits);
    std::vector<Term> terms;
    for (std::size_t s = 0; s < coeff.size(); ++s)
        if (std::abs(coeff[s]) >= kDropThreshold) terms.push_back({static_cast<VarMask>(s), coeff[s]});
    return Polynomial(n_vars, std::move(terms));
}

}  // namespace qfold::pb
