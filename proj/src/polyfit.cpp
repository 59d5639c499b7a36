#include "qfold/polyfit.hpp"

#include "qfold/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>

namespace qfold::polyfit {

std::vector<std::pair<double, double>> PenaltyTarget::points() const {
    if (separation < 1) throw Error(ErrorCode::InvalidArgument, "separation must be positive");
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(0.0, penalty);
    for (int k = 1; k <= separation * separation; ++k) pts.emplace_back(2.0 * k, 0.0);
    return pts;
}

double clenshaw(const std::vector<double>& cheb, double t) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = cheb.size(); k-- > 1;) {
        const double b0 = 2.0 * t * b1 - b2 + cheb[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + (cheb.empty() ? 0.0 : cheb[0]);
}

std::vector<double> chebyshev_to_monomial(const std::vector<double>& cheb) {
    const std::size_t n = cheb.size();
    std::vector<double> mono(n, 0.0);
    if (n == 0) return mono;
    std::vector<double> prev(n, 0.0);  // T_{k-1}
    std::vector<double> cur(n, 0.0);   // T_k
    prev[0] = 1.0;
    mono[0] += cheb[0];
    if (n == 1) return mono;
    cur[1] = 1.0;
    mono[1] += cheb[1];
    for (std::size_t k = 2; k < n; ++k) {
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) next[i + 1] += 2.0 * cur[i];
        for (std::size_t i = 0; i < n; ++i) next[i] -= prev[i];
        for (std::size_t i = 0; i < n; ++i) mono[i] += cheb[k] * next[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return mono;
}

double ChebyshevFit::eval_cheb(double d) const { return clenshaw(coeffs_cheb, mapped(d)); }

double ChebyshevFit::eval_mono(double d) const {
    const double t = mapped(d);
    double v = 0.0;
    for (std::size_t k = coeffs_mono.size(); k-- > 0;) v = v * t + coeffs_mono[k];
    return v;
}

ChebyshevFit fit_penalty(const PenaltyTarget& target, double r2_tol, int d0, int max_degree) {
    if (!(r2_tol > 0.0 && r2_tol <= 1.0)) throw Error(ErrorCode::InvalidArgument, "r2_tol must lie in (0, 1]");
    if (d0 < 1) throw Error(ErrorCode::InvalidArgument, "d0 must be at least 1");
    const auto pts = target.points();
    const int m = static_cast<int>(pts.size());
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "need at least two target points");

    ChebyshevFit fit;
    fit.separation = target.separation;
    fit.penalty = target.penalty;
    fit.domain_max = target.domain_max();

    Eigen::VectorXd t(m);
    Eigen::VectorXd f(m);
    for (int i = 0; i < m; ++i) {
        t(i) = fit.mapped(pts[static_cast<std::size_t>(i)].first);
        f(i) = pts[static_cast<std::size_t>(i)].second;
    }
    const double mean = f.mean();
    const double ss_tot = (f.array() - mean).square().sum();

    int d = std::min(d0, m - 1);
    while (true) {
        Eigen::MatrixXd basis(m, d + 1);
        for (int i = 0; i < m; ++i) {
            basis(i, 0) = 1.0;
            if (d >= 1) basis(i, 1) = t(i);
            for (int k = 2; k <= d; ++k) basis(i, k) = 2.0 * t(i) * basis(i, k - 1) - basis(i, k - 2);
        }
        const Eigen::VectorXd coeffs = basis.colPivHouseholderQr().solve(f);
        const Eigen::VectorXd resid = f - basis * coeffs;
        const double ss_res = resid.squaredNorm();
        const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        const bool exact = d == m - 1;
        if (r2 >= r2_tol || exact) {
            fit.degree = d;
            fit.coeffs_cheb.assign(coeffs.data(), coeffs.data() + coeffs.size());
            fit.coeffs_mono = chebyshev_to_monomial(fit.coeffs_cheb);
            fit.r2 = exact ? 1.0 : r2;
            fit.max_residual = resid.cwiseAbs().maxCoeff();
            fit.interpolated = exact;
            return fit;
        }
        if (max_degree >= 0 && d >= max_degree)
            throw Error(ErrorCode::DegreeCeiling, "separation " + std::to_string(target.separation) +
                                                      " needs degree above " + std::to_string(max_degree));
        ++d;
    }
}

pb::Polynomial build_olap_penalty_horner(const ChebyshevFit& fit, const pb::Polynomial& dist_poly,
                                         std::size_t max_terms) {
    const int n = dist_poly.n_vars();
    const pb::Polynomial mapped = dist_poly * (2.0 / fit.domain_max) - pb::Polynomial::constant(n, 1.0);
    return pb::compose_scalar_poly(fit.coeffs_mono, mapped, max_terms);
}

pb::Polynomial build_olap_penalty(const ChebyshevFit& fit, const pb::Polynomial& dist_poly, std::size_t max_terms) {
    if (std::popcount(dist_poly.support()) > 30) return build_olap_penalty_horner(fit, dist_poly, max_terms);
    return pb::compose_on_values([&fit](double d) { return fit.eval_cheb(d); }, dist_poly, max_terms);
}

std::map<int, ChebyshevFit> fit_separations(int max_separation, double penalty, double r2_tol, int d0) {
    std::map<int, ChebyshevFit> fits;
    for (int s = 3; s <= max_separation; ++s) fits.emplace(s, fit_penalty({s, penalty}, r2_tol, d0));
    return fits;
}

void write_fit_report(std::ostream& out, const std::map<int, ChebyshevFit>& fits, char delimiter) {
    out << "separation" << delimiter << "points" << delimiter << "degree" << delimiter << "r2" << delimiter
        << "max_residual" << delimiter << "p_at_zero" << delimiter << "interpolated" << '\n';
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(10);
    for (const auto& [s, fit] : fits) {
        out << s << delimiter << (s * s + 1) << delimiter << fit.degree << delimiter << fit.r2 << delimiter
            << fit.max_residual << delimiter << fit.eval_cheb(0.0) << delimiter << (fit.interpolated ? 1 : 0) << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace qfold::polyfit
