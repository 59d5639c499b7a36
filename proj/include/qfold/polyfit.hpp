#pragma once

#include "qfold/pb_poly.hpp"

#include <map>
#include <ostream>
#include <utility>
#include <vector>

namespace qfold::polyfit {

/// Overlap-penalty target for beads s = |m - n| apart: `penalty` at D = 0 and
/// zero at every achievable squared distance 2, 4, ..., 2 s^2.
struct PenaltyTarget {
    int separation = 3;
    double penalty = 50.0;

    std::vector<std::pair<double, double>> points() const;
    double domain_max() const { return 2.0 * separation * separation; }
};

/// Fitted penalty polynomial. Both coefficient sets are expressed in the mapped
/// coordinate t = 2 D / domain_max - 1, t in [-1, 1].
struct ChebyshevFit {
    int separation = 0;
    double penalty = 0.0;
    int degree = 0;
    double domain_max = 0.0;
    std::vector<double> coeffs_cheb;
    std::vector<double> coeffs_mono;
    double r2 = 0.0;
    double max_residual = 0.0;
    bool interpolated = false;

    double mapped(double d) const { return 2.0 * d / domain_max - 1.0; }
    double eval_cheb(double d) const;
    double eval_mono(double d) const;
};

inline constexpr double kDefaultR2Tol = 0.999;
inline constexpr int kDefaultD0 = 2;
inline constexpr double kDefaultPenalty = 50.0;

/// Smallest degree d >= d0 whose least-squares Chebyshev fit reaches r2_tol.
/// Degree #points - 1 is exact interpolation. Passing max_degree below that
/// turns an unmet tolerance into DegreeCeiling.
ChebyshevFit fit_penalty(const PenaltyTarget& target, double r2_tol = kDefaultR2Tol, int d0 = kDefaultD0,
                         int max_degree = -1);

std::vector<double> chebyshev_to_monomial(const std::vector<double>& cheb);
double clenshaw(const std::vector<double>& cheb, double t);

/// Penalty polynomial P(D_mn): the fit composed with a squared-distance
/// polynomial. Uses the exact value-table route when D_mn depends on at most
/// 30 variables and Horner composition otherwise.
pb::Polynomial build_olap_penalty(const ChebyshevFit& fit, const pb::Polynomial& dist_poly,
                                  std::size_t max_terms = pb::kDefaultTermCeiling);

/// Horner route: compose the monomial coefficients with the mapped distance.
pb::Polynomial build_olap_penalty_horner(const ChebyshevFit& fit, const pb::Polynomial& dist_poly,
                                         std::size_t max_terms = pb::kDefaultTermCeiling);

/// Fits for separations 3..max_separation keyed by separation.
std::map<int, ChebyshevFit> fit_separations(int max_separation, double penalty = kDefaultPenalty,
                                            double r2_tol = kDefaultR2Tol, int d0 = kDefaultD0);

void write_fit_report(std::ostream& out, const std::map<int, ChebyshevFit>& fits, char delimiter = '\t');

}  // namespace qfold::polyfit
