#pragma once

#include <array>

#include "qksub/geometry.hpp"
#include "qksub/report.hpp"

namespace qksub {

// A triple of (1,1)-tensor fields satisfying the quaternionic relations
// J_a^2 = -id, J_a J_{a+1} = -J_{a+1} J_a = J_{a+2} (indices mod 3) and
// compatible with the metric. One-forms entering the structure equation for
// grad J are never supplied: they are fitted numerically per point.
struct QuaternionicBasis {
    std::array<MatExpr, 3> J;
};

// Per-point least-squares fit of the three local one-forms omega_b in
//   del_X J_a = omega_{a+2}(X) J_{a+1} - omega_{a+1}(X) J_{a+2},
// jointly over a = 1..3 with Frobenius inner products. `defect` is the
// worst-case Frobenius residual of the fitted equation at the point.
struct QKPointFit {
    Vec point;
    std::array<Vec, 3> omega;  // omega[b](i) = omega_{b+1}(d/dx_i)
    double defect = 0.0;

    double omega_of(int beta, const Vec& direction) const { return omega[static_cast<size_t>(beta)].dot(direction); }
};

struct QKFitResult {
    std::vector<QKPointFit> fits;
    double residual = 0.0;  // max defect over points
};

TangentVector apply_J(const DiffEngine& eng, const QuaternionicBasis& B, int alpha,
                      const TangentVector& X);

CheckReport check_quaternionic_algebra(const DiffEngine& eng, const QuaternionicBasis& B,
                                       const std::vector<Vec>& points, double tol = 1e-9);

CheckReport check_hermitian_metric(const DiffEngine& eng, const ManifoldSpec& M,
                                   const QuaternionicBasis& B, const std::vector<Vec>& points,
                                   const std::vector<Vec>& directions, double tol = 1e-9);

// (del_X J_alpha)(p) assembled as a matrix over the coordinate frame.
Mat covariant_derivative_J(const DiffEngine& eng, const ManifoldSpec& M, const QuaternionicBasis& B,
                           int alpha, const VecExpr& X, const Vec& p);

QKPointFit fit_qk_oneforms_at(const DiffEngine& eng, const ManifoldSpec& M,
                              const QuaternionicBasis& B, const Vec& p);

QKFitResult fit_qk_oneforms(const DiffEngine& eng, const ManifoldSpec& M, const QuaternionicBasis& B,
                            const std::vector<Vec>& points);

CheckReport check_quaternionic_kahler(const DiffEngine& eng, const ManifoldSpec& M,
                                      const QuaternionicBasis& B, const std::vector<Vec>& points,
                                      double tol = 1e-6);

CheckReport check_hyperkahler(const DiffEngine& eng, const ManifoldSpec& M,
                              const QuaternionicBasis& B, const std::vector<Vec>& points,
                              double tol = 1e-8);

}  // namespace qksub
