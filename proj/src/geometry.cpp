#include "qksub/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace qksub {

namespace {

std::string point_string(const Vec& p) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p(i);
    os << ")";
    return os.str();
}

}  // namespace

void ManifoldSpec::require_inside(const Vec& p) const {
    if (static_cast<int>(p.size()) != dim)
        throw DomainError("point dimension " + std::to_string(p.size()) + " != manifold dimension " +
                          std::to_string(dim));
    if (!domain(p)) throw DomainError("point outside chart domain: " + point_string(p));
}

const VecExpr& ManifoldSpec::frame(const std::string& name) const {
    for (const auto& [n, f] : frames)
        if (n == name) return f;
    throw std::out_of_range("unknown frame field: " + name);
}

Mat metric_value(const DiffEngine& eng, const ManifoldSpec& M, const Vec& p) {
    M.require_inside(p);
    Mat g = eng.value(M.metric, p);
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw NumericError("metric not symmetric at " + point_string(p));
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success)
        throw NumericError("metric not positive definite at " + point_string(p));
    return g;
}

double directional_derivative(const DiffEngine& eng, const ManifoldSpec& M, const Expr& f,
                              const TangentVector& X) {
    M.require_inside(X.base);
    const J1 j = eng.jet1(f, X.base);
    const double v = j.g.dot(X.comp);
    if (!std::isfinite(v)) throw NumericError("non-finite directional derivative");
    return v;
}

TangentVector lie_bracket(const DiffEngine& eng, const ManifoldSpec& M, const VecExpr& X,
                          const VecExpr& Y, const Vec& p) {
    M.require_inside(p);
    const J1Vec xj = eng.jet1(X, p);
    const J1Vec yj = eng.jet1(Y, p);
    return TangentVector{p, yj.g * xj.v - xj.g * yj.v};
}

std::vector<Mat> christoffels(const J1Mat& metric_jet) {
    const int n = static_cast<int>(metric_jet.v.rows());
    const Mat ginv = metric_jet.v.inverse();
    std::vector<Mat> gamma(static_cast<size_t>(n), Mat::Zero(n, n));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) {
                    s += ginv(k, l) * (metric_jet.g[static_cast<size_t>(i)](j, l) +
                                       metric_jet.g[static_cast<size_t>(j)](i, l) -
                                       metric_jet.g[static_cast<size_t>(l)](i, j));
                }
                gamma[static_cast<size_t>(k)](i, j) = 0.5 * s;
            }
        }
    }
    return gamma;
}

std::vector<Mat> christoffels(const DiffEngine& eng, const ManifoldSpec& M, const Vec& p) {
    M.require_inside(p);
    return christoffels(eng.jet1(M.metric, p));
}

Vec covariant_derivative(const std::vector<Mat>& gamma, const Vec& dir, const J1Vec& field) {
    const int n = static_cast<int>(dir.size());
    Vec r = field.g * dir;
    for (int k = 0; k < n; ++k) r(k) += dir.dot(gamma[static_cast<size_t>(k)] * field.v);
    return r;
}

TangentVector levi_civita(const DiffEngine& eng, const ManifoldSpec& M, const VecExpr& X,
                          const VecExpr& Y, const Vec& p) {
    M.require_inside(p);
    const auto gamma = christoffels(eng, M, p);
    const Vec xv = eng.value(X, p);
    const J1Vec yj = eng.jet1(Y, p);
    return TangentVector{p, covariant_derivative(gamma, xv, yj)};
}

TangentVector gradient(const DiffEngine& eng, const ManifoldSpec& M, const Expr& f, const Vec& p) {
    const Mat g = metric_value(eng, M, p);
    const J1 fj = eng.jet1(f, p);
    return TangentVector{p, g.inverse() * fj.g};
}

std::vector<Vec> gram_schmidt(const Mat& g, const std::vector<Vec>& span, double tol) {
    std::vector<Vec> basis;
    for (const Vec& v0 : span) {
        Vec v = v0;
        for (const Vec& b : basis) v -= b.dot(g * v) * b;
        // second pass for numerical orthogonality
        for (const Vec& b : basis) v -= b.dot(g * v) * b;
        const double nrm = g_norm(g, v);
        if (nrm > tol) basis.push_back(v / nrm);
    }
    return basis;
}

std::vector<TangentVector> orthonormal_frame(const DiffEngine& eng, const ManifoldSpec& M,
                                             const Vec& p) {
    const Mat g = metric_value(eng, M, p);
    std::vector<Vec> span;
    for (int i = 0; i < M.dim; ++i) span.push_back(Vec::Unit(M.dim, i));
    const auto basis = gram_schmidt(g, span);
    if (static_cast<int>(basis.size()) != M.dim)
        throw NumericError("orthonormal frame degenerated: metric near-singular");
    std::vector<TangentVector> frame;
    for (const Vec& b : basis) frame.push_back(TangentVector{p, b});
    return frame;
}

std::vector<double> principal_angles(const Mat& g, const std::vector<Vec>& a,
                                     const std::vector<Vec>& b) {
    if (a.empty() || b.empty()) return {};
    Mat inner(static_cast<int>(a.size()), static_cast<int>(b.size()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            inner(static_cast<int>(i), static_cast<int>(j)) = a[i].dot(g * b[j]);
    Eigen::JacobiSVD<Mat> svd(inner);
    std::vector<double> angles;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        const double s = std::min(1.0, std::max(-1.0, svd.singularValues()(i)));
        angles.push_back(std::acos(s));
    }
    return angles;
}

}  // namespace qksub
