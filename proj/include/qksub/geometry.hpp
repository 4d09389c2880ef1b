#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qksub/engine.hpp"

namespace qksub {

struct TangentVector {
    Vec base;
    Vec comp;  // coordinate-frame components
};

// Chart-based manifold: dimension, metric field, admissibility predicate and
// optional named frame fields. The metric must evaluate symmetric positive
// definite at every admissible point.
struct ManifoldSpec {
    int dim = 0;
    MatExpr metric;
    std::function<bool(const Vec&)> domain = [](const Vec&) { return true; };
    std::vector<std::pair<std::string, VecExpr>> frames;

    void require_inside(const Vec& p) const;
    const VecExpr& frame(const std::string& name) const;
};

// Metric value with symmetry / positive-definiteness validation.
Mat metric_value(const DiffEngine& eng, const ManifoldSpec& M, const Vec& p);

double directional_derivative(const DiffEngine& eng, const ManifoldSpec& M, const Expr& f,
                              const TangentVector& X);

TangentVector lie_bracket(const DiffEngine& eng, const ManifoldSpec& M, const VecExpr& X,
                          const VecExpr& Y, const Vec& p);

// Christoffel symbols from metric derivatives; Gamma[k](i,j) is the
// coefficient of the k-th coordinate field in the derivative of the j-th
// along the i-th.
std::vector<Mat> christoffels(const DiffEngine& eng, const ManifoldSpec& M, const Vec& p);
std::vector<Mat> christoffels(const J1Mat& metric_jet);

TangentVector levi_civita(const DiffEngine& eng, const ManifoldSpec& M, const VecExpr& X,
                          const VecExpr& Y, const Vec& p);

TangentVector gradient(const DiffEngine& eng, const ManifoldSpec& M, const Expr& f, const Vec& p);

// Metric Gram-Schmidt applied to the coordinate frame.
std::vector<TangentVector> orthonormal_frame(const DiffEngine& eng, const ManifoldSpec& M,
                                             const Vec& p);

// Directional covariant derivative of a field known through its first-order
// jet: (del_dir Y)^k = dY^k . dir + Gamma^k(dir, Y).
Vec covariant_derivative(const std::vector<Mat>& gamma, const Vec& dir, const J1Vec& field);

// Metric Gram-Schmidt of arbitrary spanning vectors; drops near-dependent
// directions below `tol` and returns an orthonormal basis of the span.
std::vector<Vec> gram_schmidt(const Mat& g, const std::vector<Vec>& span, double tol = 1e-10);

// Principal angles (radians) between two subspaces given g-orthonormal bases.
std::vector<double> principal_angles(const Mat& g, const std::vector<Vec>& a,
                                     const std::vector<Vec>& b);

inline double g_norm(const Mat& g, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

}  // namespace qksub
