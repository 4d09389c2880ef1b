#include "qksub/quaternionic.hpp"

#include <cmath>

namespace qksub {

namespace {

// Christoffel contraction as matrices: G[i](k, m) = Gamma^k_{i m}.
std::vector<Mat> gamma_slices(const std::vector<Mat>& gamma, int n) {
    std::vector<Mat> slices(static_cast<size_t>(n), Mat::Zero(n, n));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int m = 0; m < n; ++m) slices[static_cast<size_t>(i)](k, m) = gamma[static_cast<size_t>(k)](i, m);
    return slices;
}

// del_{d/dx_i} J as a matrix: dJ_i + [G_i, J].
Mat nabla_J_coordinate(const J1Mat& J, const std::vector<Mat>& slices, int i) {
    return J.g[static_cast<size_t>(i)] + slices[static_cast<size_t>(i)] * J.v - J.v * slices[static_cast<size_t>(i)];
}

}  // namespace

TangentVector apply_J(const DiffEngine& eng, const QuaternionicBasis& B, int alpha,
                      const TangentVector& X) {
    const Mat J = eng.value(B.J[static_cast<size_t>(alpha)], X.base);
    return TangentVector{X.base, J * X.comp};
}

CheckReport check_quaternionic_algebra(const DiffEngine& eng, const QuaternionicBasis& B,
                                       const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    double worst_square = 0.0, worst_comp = 0.0, worst_anti = 0.0;
    for (const Vec& p : points) {
        const int n = static_cast<int>(p.size());
        const Mat id = Mat::Identity(n, n);
        std::array<Mat, 3> J;
        for (int a = 0; a < 3; ++a) J[static_cast<size_t>(a)] = eng.value(B.J[static_cast<size_t>(a)], p);
        for (int a = 0; a < 3; ++a) {
            const Mat& Ja = J[static_cast<size_t>(a)];
            const Mat& Jb = J[static_cast<size_t>((a + 1) % 3)];
            const Mat& Jc = J[static_cast<size_t>((a + 2) % 3)];
            const double sq = (Ja * Ja + id).norm();
            const double comp = (Ja * Jb - Jc).norm();
            const double anti = (Ja * Jb + Jb * Ja).norm();
            worst_square = std::max(worst_square, sq);
            worst_comp = std::max(worst_comp, comp);
            worst_anti = std::max(worst_anti, anti);
            worst.update(std::max({sq, comp, anti}), p);
        }
    }
    CheckReport r = make_check("quaternionic-algebra", worst.residual, tol, worst.point);
    r.notes.push_back("square defect " + std::to_string(worst_square) + ", composition defect " +
                      std::to_string(worst_comp) + ", anticommutation defect " + std::to_string(worst_anti));
    return r;
}

CheckReport check_hermitian_metric(const DiffEngine& eng, const ManifoldSpec& M,
                                   const QuaternionicBasis& B, const std::vector<Vec>& points,
                                   const std::vector<Vec>& directions, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        const Mat g = metric_value(eng, M, p);
        for (int a = 0; a < 3; ++a) {
            const Mat J = eng.value(B.J[static_cast<size_t>(a)], p);
            for (size_t i = 0; i + 1 < directions.size(); i += 2) {
                const Vec& x = directions[i];
                const Vec& y = directions[i + 1];
                const double defect = std::abs((J * x).dot(g * (J * y)) - x.dot(g * y));
                worst.update(defect, p);
            }
        }
    }
    return make_check("hermitian-metric", worst.residual, tol, worst.point);
}

Mat covariant_derivative_J(const DiffEngine& eng, const ManifoldSpec& M, const QuaternionicBasis& B,
                           int alpha, const VecExpr& X, const Vec& p) {
    M.require_inside(p);
    const int n = M.dim;
    const J1Mat J = eng.jet1(B.J[static_cast<size_t>(alpha)], p);
    const auto gamma = christoffels(eng, M, p);
    const auto slices = gamma_slices(gamma, n);
    const Vec xv = eng.value(X, p);
    Mat out = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) out += xv(i) * nabla_J_coordinate(J, slices, i);
    if (!out.allFinite()) throw NumericError("non-finite covariant derivative of structure tensor");
    return out;
}

QKPointFit fit_qk_oneforms_at(const DiffEngine& eng, const ManifoldSpec& M,
                              const QuaternionicBasis& B, const Vec& p) {
    M.require_inside(p);
    const int n = M.dim;
    std::array<J1Mat, 3> J;
    for (int a = 0; a < 3; ++a) J[static_cast<size_t>(a)] = eng.jet1(B.J[static_cast<size_t>(a)], p);
    const auto gamma = christoffels(eng, M, p);
    const auto slices = gamma_slices(gamma, n);

    QKPointFit fit;
    fit.point = p;
    for (auto& w : fit.omega) w = Vec::Zero(n);

    // Derivatives of the structure equation with respect to the unknown
    // coefficients a = (omega_1(X), omega_2(X), omega_3(X)):
    //   rhs_a = a_{a+2} J_{a+1} - a_{a+1} J_{a+2}.
    std::array<std::array<Mat, 3>, 3> basis;  // basis[a][k] = d rhs_a / d a_k
    for (int a = 0; a < 3; ++a) {
        for (int k = 0; k < 3; ++k) basis[static_cast<size_t>(a)][static_cast<size_t>(k)] = Mat::Zero(n, n);
        basis[static_cast<size_t>(a)][static_cast<size_t>((a + 2) % 3)] = J[static_cast<size_t>((a + 1) % 3)].v;
        basis[static_cast<size_t>(a)][static_cast<size_t>((a + 1) % 3)] = -J[static_cast<size_t>((a + 2) % 3)].v;
    }
    Mat normal = Mat::Zero(3, 3);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
            for (int a = 0; a < 3; ++a)
                normal(k, l) += (basis[static_cast<size_t>(a)][static_cast<size_t>(k)].transpose() *
                                 basis[static_cast<size_t>(a)][static_cast<size_t>(l)])
                                    .trace();

    for (int dir = 0; dir < n; ++dir) {
        std::array<Mat, 3> lhs;
        for (int a = 0; a < 3; ++a) lhs[static_cast<size_t>(a)] = nabla_J_coordinate(J[static_cast<size_t>(a)], slices, dir);
        Vec rhs = Vec::Zero(3);
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 3; ++a)
                rhs(k) += (lhs[static_cast<size_t>(a)].transpose() * basis[static_cast<size_t>(a)][static_cast<size_t>(k)]).trace();
        const Vec coeff = normal.ldlt().solve(rhs);
        for (int k = 0; k < 3; ++k) fit.omega[static_cast<size_t>(k)](dir) = coeff(k);
        for (int a = 0; a < 3; ++a) {
            Mat model = Mat::Zero(n, n);
            for (int k = 0; k < 3; ++k) model += coeff(k) * basis[static_cast<size_t>(a)][static_cast<size_t>(k)];
            fit.defect = std::max(fit.defect, (lhs[static_cast<size_t>(a)] - model).norm());
        }
    }
    return fit;
}

QKFitResult fit_qk_oneforms(const DiffEngine& eng, const ManifoldSpec& M, const QuaternionicBasis& B,
                            const std::vector<Vec>& points) {
    QKFitResult result;
    for (const Vec& p : points) {
        result.fits.push_back(fit_qk_oneforms_at(eng, M, B, p));
        result.residual = std::max(result.residual, result.fits.back().defect);
    }
    return result;
}

CheckReport check_quaternionic_kahler(const DiffEngine& eng, const ManifoldSpec& M,
                                      const QuaternionicBasis& B, const std::vector<Vec>& points,
                                      double tol) {
    const QKFitResult fit = fit_qk_oneforms(eng, M, B, points);
    WorstCase worst;
    for (const auto& f : fit.fits) worst.update(f.defect, f.point);
    CheckReport r = make_check("qk-structure-equation", worst.residual, tol, worst.point);
    if (!fit.fits.empty()) {
        const auto& f = fit.fits.front();
        std::string table = "fitted one-forms at " + format_point(f.point) + ":";
        for (int b = 0; b < 3; ++b) {
            table += " w" + std::to_string(b + 1) + "=(";
            for (int i = 0; i < f.omega[static_cast<size_t>(b)].size(); ++i)
                table += (i ? "," : "") + std::to_string(f.omega[static_cast<size_t>(b)](i));
            table += ")";
        }
        r.notes.push_back(table);
    }
    return r;
}

CheckReport check_hyperkahler(const DiffEngine& eng, const ManifoldSpec& M,
                              const QuaternionicBasis& B, const std::vector<Vec>& points,
                              double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        const int n = M.dim;
        const auto gamma = christoffels(eng, M, p);
        const auto slices = gamma_slices(gamma, n);
        for (int a = 0; a < 3; ++a) {
            const J1Mat J = eng.jet1(B.J[static_cast<size_t>(a)], p);
            for (int i = 0; i < n; ++i) worst.update(nabla_J_coordinate(J, slices, i).norm(), p);
        }
    }
    CheckReport r = make_check("hyperkahler", worst.residual, tol, worst.point, /*gates_exit=*/false);
    r.notes.push_back("descriptive: reports whether the structure tensors are parallel");
    return r;
}

}  // namespace qksub
