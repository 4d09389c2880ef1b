#include "qksub/submersion.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace qksub {

namespace {

constexpr double kRankThreshold = 1e-9;  // relative to the largest singular value

std::vector<Vec> kernel_basis(const Mat& jacobian, int& rank) {
    Eigen::JacobiSVD<Mat> svd(jacobian, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? kRankThreshold * sv(0) : 0.0;
    rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
    std::vector<Vec> kernel;
    for (int i = rank; i < svd.matrixV().cols(); ++i) kernel.push_back(svd.matrixV().col(i));
    return kernel;
}

}  // namespace

MapCtx::MapCtx(const DiffEngine& engine, std::shared_ptr<const ManifoldSpec> source,
               const SmoothMap& map, const Vec& point)
    : eng(engine), src(std::move(source)), F(map), n(src->dim),
      d(static_cast<int>(map.coords.size())), p(point) {
    src->require_inside(p);
    g = eng.jet1(src->metric, p);
    if ((g.v - g.v.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw NumericError("metric not symmetric at " + format_point(p));
    Eigen::LLT<Mat> llt(g.v);
    if (llt.info() != Eigen::Success)
        throw NumericError("metric not positive definite at " + format_point(p));
    gamma = christoffels(g);
    ginv = inverse(g);

    const J2Vec Fj = eng.jet2(F.coords, p);
    q = Fj.v;
    dF = differential_jet(Fj);

    std::vector<Vec> kernel = kernel_basis(dF.v, rank);
    submersion = (rank == d) && (d <= n);

    F.target->require_inside(q);
    const J1Mat gNj = eng.jet1(F.target->metric, q);
    gN = gNj.v;
    gammaN = christoffels(gNj);

    vertical_basis = gram_schmidt(g.v, kernel);
    if (submersion) {
        // g-orthogonal projector onto the horizontal space, as a closed-form
        // field of the differential: ginv dF^T (dF ginv dF^T)^-1 dF.
        const J1Mat K = dF * ginv * transpose(dF);
        H = ginv * transpose(dF) * inverse(K) * dF;
        V = J1Mat::constant(Mat::Identity(n, n), n) - H;

        std::vector<Vec> hcand;
        for (int i = 0; i < n; ++i) hcand.push_back(H.v * Vec::Unit(n, i));
        horizontal_basis = gram_schmidt(g.v, hcand);

        // Squared dilation as a smooth field: over a g-orthonormal horizontal
        // basis the least-squares fit of g_N(F_* ., F_* .) = s * g_M(., .)
        // reduces to trace(g_N dF g^-1 dF^T) / d.
        J1Mat gNF(d, d, n);  // target metric along the map, source derivatives
        gNF.v = gN;
        for (int k = 0; k < n; ++k) {
            gNF.g[static_cast<size_t>(k)] = Mat::Zero(d, d);
            for (int a = 0; a < d; ++a)
                gNF.g[static_cast<size_t>(k)] += gNj.g[static_cast<size_t>(a)] * dF.v(a, k);
        }
        lam2 = trace(gNF * (dF * ginv * transpose(dF)));
        lam2.v /= d;
        lam2.g /= d;
        if (lam2.v <= 0.0) throw NumericError("nonpositive squared dilation at " + format_point(p));
        lnl = 0.5 * log(lam2);
        grad_lnl = ginv.v * lnl.g;
    }
}

Vec MapCtx::oneill_T(const Vec& X, const J1Vec& Y) const {
    const Vec dir = V.v * X;
    return H.v * covd(dir, V * Y) + V.v * covd(dir, H * Y);
}

Vec MapCtx::oneill_A(const Vec& X, const J1Vec& Y) const {
    const Vec dir = H.v * X;
    return H.v * covd(dir, V * Y) + V.v * covd(dir, H * Y);
}

Vec MapCtx::pullback_nabla(const Vec& X, const J1Vec& W) const {
    Vec r = W.g * X;
    const Vec dFX = dF.v * X;
    for (int c = 0; c < d; ++c) r(c) += dFX.dot(gammaN[static_cast<size_t>(c)] * W.v);
    return r;
}

Vec MapCtx::sff(const Vec& X, const J1Vec& Y) const {
    return pullback_nabla(X, pushforward(Y)) - dF.v * covd(X, Y);
}

Mat differential(const DiffEngine& eng, const ManifoldSpec& src, const SmoothMap& F, const Vec& p) {
    src.require_inside(p);
    const J2Vec Fj = eng.jet2(F.coords, p);
    return Fj.g;
}

SubmersionAnalysis analyze(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                           const SmoothMap& F, const Vec& p) {
    SubmersionAnalysis a;
    a.point = p;
    src->require_inside(p);
    const Mat jac = differential(eng, *src, F, p);
    a.jacobian = jac;
    const Mat g = metric_value(eng, *src, p);

    std::vector<Vec> kernel = kernel_basis(jac, a.rank);
    a.critical = (a.rank == 0);
    a.submersion = (a.rank == static_cast<int>(jac.rows())) && (jac.rows() <= jac.cols());
    a.vertical = gram_schmidt(g, kernel);
    if (!a.submersion) return a;

    const int dn = static_cast<int>(jac.rows());
    const Mat ginv = g.inverse();
    // columns of ginv jac^T span the g-orthocomplement of the kernel
    std::vector<Vec> hcand;
    for (int i = 0; i < dn; ++i) hcand.push_back(ginv * jac.transpose() * Vec::Unit(dn, i));
    a.horizontal = gram_schmidt(g, hcand);

    const Vec q = eng.value(F.coords, p);
    const Mat gN = metric_value(eng, *F.target, q);
    Mat gramN(static_cast<int>(a.horizontal.size()), static_cast<int>(a.horizontal.size()));
    for (size_t i = 0; i < a.horizontal.size(); ++i)
        for (size_t j = 0; j < a.horizontal.size(); ++j)
            gramN(static_cast<int>(i), static_cast<int>(j)) =
                (jac * a.horizontal[i]).dot(gN * (jac * a.horizontal[j]));
    // least squares of gramN = s * I
    const double s = gramN.trace() / dn;
    a.has_dilation = s > 0.0;
    if (a.has_dilation) {
        a.dilation = std::sqrt(s);
        a.conformality_residual = (gramN - s * Mat::Identity(gramN.rows(), gramN.cols())).cwiseAbs().maxCoeff();
    }
    return a;
}

Vec tension_field(const MapCtx& ctx) {
    // trace over g^{ij} of the (tensorial) second fundamental form on
    // coordinate fields.
    Vec tau = Vec::Zero(ctx.d);
    for (int i = 0; i < ctx.n; ++i) {
        const Vec ei = Vec::Unit(ctx.n, i);
        for (int j = 0; j < ctx.n; ++j) {
            const double w = ctx.ginv.v(i, j);
            if (w == 0.0) continue;
            tau += w * ctx.sff(ei, ctx.constant_field(Vec::Unit(ctx.n, j)));
        }
    }
    return tau;
}

FiberGeometry fiber_geometry(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                             const SmoothMap& F, const std::vector<Vec>& points) {
    FiberGeometry out;
    WorstCase umb, geo, mean;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) throw NumericError("fiber geometry requires a submersion at " + format_point(p));
        const auto& vert = ctx.vertical_basis;
        const int m = static_cast<int>(vert.size());
        if (m == 0) continue;
        Vec h = Vec::Zero(ctx.n);
        for (const Vec& u : vert) h += ctx.oneill_T(u, ctx.V * ctx.constant_field(u));
        h /= m;
        const double hn = ctx.norm_M(h);
        if (!mean.point || hn > mean.residual) out.mean_curvature = h;
        mean.update(hn, p);
        for (const Vec& u : vert) {
            for (const Vec& w : vert) {
                const Vec t = ctx.oneill_T(u, ctx.V * ctx.constant_field(w));
                geo.update(ctx.norm_M(t), p);
                umb.update(ctx.norm_M(t - ctx.gM(u, w) * h), p);
            }
        }
    }
    out.mean_curvature_norm = mean.residual;
    out.umbilicity_residual = umb.residual;
    out.geodesy_residual = geo.residual;
    out.worst_point = umb.point;
    return out;
}

CheckReport check_h_homothetic(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion)
            return skipped_check("h-homothetic", "dilation absent at " + format_point(p) + " (not a submersion)");
        const Vec grad_lambda = ctx.dilation() * ctx.grad_lnl;
        worst.update(ctx.norm_M(ctx.H.v * grad_lambda), p);
    }
    return make_check("h-homothetic", worst.residual, tol, worst.point, /*gates_exit=*/false);
}

std::vector<VecExpr> direction_field_pool(const ManifoldSpec& src, uint64_t seed, int extra) {
    std::vector<VecExpr> pool;
    for (int i = 0; i < src.dim; ++i) pool.push_back(coordinate_field(src.dim, i));
    for (const auto& [name, f] : src.frames) pool.push_back(f);
    Sampler s(seed);
    for (int k = 0; k < extra; ++k) {
        const Vec c = s.direction(src.dim);
        VecExpr f;
        for (int i = 0; i < src.dim; ++i) f.push_back(Expr::constant(c(i)));
        pool.push_back(f);
    }
    return pool;
}

CheckReport check_conformality(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    bool all_submersion = true;
    for (const Vec& p : points) {
        const SubmersionAnalysis a = analyze(eng, src, F, p);
        if (!a.submersion) {
            all_submersion = false;
            continue;
        }
        worst.update(a.conformality_residual, p);
    }
    CheckReport r = make_check("conformality", worst.residual, tol, worst.point);
    if (!all_submersion) {
        r.verdict = Verdict::Fail;
        r.notes.push_back("rank deficiency at some sampled points");
    }
    return r;
}

CheckReport check_projectors(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                             const SmoothMap& F, const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) return skipped_check("projectors", "not a submersion at " + format_point(p));
        const Mat I = Mat::Identity(ctx.n, ctx.n);
        const double defect = std::max({(ctx.V.v + ctx.H.v - I).cwiseAbs().maxCoeff(),
                                        (ctx.V.v * ctx.H.v).cwiseAbs().maxCoeff(),
                                        (ctx.V.v * ctx.V.v - ctx.V.v).cwiseAbs().maxCoeff(),
                                        (ctx.H.v * ctx.H.v - ctx.H.v).cwiseAbs().maxCoeff()});
        worst.update(defect, p);
    }
    return make_check("projector-identities", worst.residual, tol, worst.point);
}

CheckReport check_sff_symmetry(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const std::vector<Vec>& points,
                               const std::vector<VecExpr>& fields, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        for (size_t i = 0; i < fields.size(); ++i) {
            for (size_t j = i + 1; j < fields.size(); ++j) {
                const J1Vec X = ctx.field(fields[i]);
                const J1Vec Y = ctx.field(fields[j]);
                const Vec lhs = ctx.sff(X.v, Y);
                const Vec rhs = ctx.sff(Y.v, X);
                worst.update(ctx.norm_N(lhs - rhs), p);
            }
        }
    }
    return make_check("sff-symmetry", worst.residual, tol, worst.point);
}

CheckReport check_pushforward_bracket(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                      const SmoothMap& F, const std::vector<Vec>& points,
                                      const std::vector<VecExpr>& fields, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        for (size_t i = 0; i < fields.size(); ++i) {
            for (size_t j = i + 1; j < fields.size(); ++j) {
                const J1Vec X = ctx.field(fields[i]);
                const J1Vec Y = ctx.field(fields[j]);
                const Vec bracket = Y.g * X.v - X.g * Y.v;
                const Vec defect = ctx.pullback_nabla(X.v, ctx.pushforward(Y)) -
                                   ctx.pullback_nabla(Y.v, ctx.pushforward(X)) -
                                   ctx.pushforward_value(bracket);
                worst.update(ctx.norm_N(defect), p);
            }
        }
    }
    return make_check("pushforward-bracket", worst.residual, tol, worst.point);
}

CheckReport check_horizontal_pair_rule(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                       const SmoothMap& F, const std::vector<Vec>& points,
                                       const std::vector<VecExpr>& fields, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) return skipped_check("horizontal-pair-rule", "not a submersion");
        for (size_t i = 0; i < fields.size(); ++i) {
            for (size_t j = i; j < fields.size(); ++j) {
                const J1Vec Vf = ctx.H * ctx.field(fields[i]);
                const J1Vec Wf = ctx.H * ctx.field(fields[j]);
                if (ctx.norm_M(Vf.v) < 1e-9 || ctx.norm_M(Wf.v) < 1e-9) continue;
                const Vec lhs = ctx.sff(Vf.v, Wf);
                const Vec rhs = ctx.lnl_along(Vf.v) * ctx.pushforward_value(Wf.v) +
                                ctx.lnl_along(Wf.v) * ctx.pushforward_value(Vf.v) -
                                ctx.gM(Vf.v, Wf.v) * ctx.pushforward_value(ctx.grad_lnl);
                worst.update(ctx.norm_N(lhs - rhs), p);
            }
        }
    }
    return make_check("horizontal-pair-rule", worst.residual, tol, worst.point);
}

CheckReport check_basic_bracket_vertical(const DiffEngine& eng,
                                         std::shared_ptr<const ManifoldSpec> src, const SmoothMap& F,
                                         const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) return skipped_check("basic-bracket-vertical", "not a submersion");
        for (int i = 0; i < ctx.n; ++i) {
            const J1Vec Xf = ctx.V * ctx.field(coordinate_field(ctx.n, i));
            if (ctx.norm_M(Xf.v) < 1e-9) continue;
            for (int j = 0; j < ctx.n; ++j) {
                // basic candidates: horizontal coordinate fields (constant
                // pushforward coefficients in the registered charts)
                const J1Vec Vf = ctx.H * ctx.field(coordinate_field(ctx.n, j));
                if (ctx.norm_M(Vf.v) < 1e-9) continue;
                const Vec bracket = Vf.g * Xf.v - Xf.g * Vf.v;
                worst.update(ctx.norm_M(ctx.H.v * bracket), p);
            }
        }
    }
    return make_check("basic-bracket-vertical", worst.residual, tol, worst.point);
}

CheckReport check_basic_a_tensor(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                 const SmoothMap& F, const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) return skipped_check("basic-a-tensor", "not a submersion");
        for (int i = 0; i < ctx.n; ++i) {
            const J1Vec Xf = ctx.V * ctx.field(coordinate_field(ctx.n, i));
            if (ctx.norm_M(Xf.v) < 1e-9) continue;
            for (int j = 0; j < ctx.n; ++j) {
                const J1Vec Vf = ctx.H * ctx.field(coordinate_field(ctx.n, j));
                if (ctx.norm_M(Vf.v) < 1e-9) continue;
                const Vec lhs = ctx.oneill_A(Vf.v, Xf);
                const Vec rhs = ctx.h_nabla(Xf.v, Vf);
                worst.update(ctx.norm_M(lhs - rhs), p);
            }
        }
    }
    return make_check("basic-a-tensor", worst.residual, tol, worst.point);
}

CheckReport check_tension_consistency(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                      const SmoothMap& F, const std::vector<Vec>& points, double tol) {
    WorstCase worst;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) return skipped_check("tension-consistency", "not a submersion");
        const Vec tau = tension_field(ctx);
        Vec h = Vec::Zero(ctx.n);
        const int m = static_cast<int>(ctx.vertical_basis.size());
        for (const Vec& u : ctx.vertical_basis) h += ctx.oneill_T(u, ctx.V * ctx.constant_field(u));
        if (m > 0) h /= m;
        const Vec rhs = -static_cast<double>(m) * ctx.pushforward_value(h) +
                        (2.0 - ctx.d) * ctx.pushforward_value(ctx.grad_lnl);
        worst.update(ctx.norm_N(tau - rhs), p);
    }
    return make_check("tension-consistency", worst.residual, tol, worst.point);
}

TotallyGeodesicSplit totally_geodesic_residuals(const MapCtx& ctx) {
    TotallyGeodesicSplit s;
    for (const Vec& u : ctx.vertical_basis) {
        for (const Vec& w : ctx.vertical_basis)
            s.vertical = std::max(s.vertical, ctx.norm_N(ctx.sff(u, ctx.V * ctx.constant_field(w))));
        for (const Vec& h : ctx.horizontal_basis)
            s.mixed = std::max({s.mixed, ctx.norm_N(ctx.sff(u, ctx.H * ctx.constant_field(h))),
                                ctx.norm_N(ctx.sff(h, ctx.V * ctx.constant_field(u)))});
    }
    for (const Vec& h1 : ctx.horizontal_basis)
        for (const Vec& h2 : ctx.horizontal_basis)
            s.horizontal = std::max(s.horizontal, ctx.norm_N(ctx.sff(h1, ctx.H * ctx.constant_field(h2))));
    return s;
}

CheckReport check_totally_geodesic_map(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                       const SmoothMap& F, const std::vector<Vec>& points, double tol,
                                       bool gates_exit) {
    WorstCase worst;
    TotallyGeodesicSplit agg;
    for (const Vec& p : points) {
        MapCtx ctx(eng, src, F, p);
        if (!ctx.submersion) return skipped_check("totally-geodesic-map", "not a submersion");
        const TotallyGeodesicSplit s = totally_geodesic_residuals(ctx);
        agg.vertical = std::max(agg.vertical, s.vertical);
        agg.mixed = std::max(agg.mixed, s.mixed);
        agg.horizontal = std::max(agg.horizontal, s.horizontal);
        worst.update(s.overall(), p);
    }
    CheckReport r = make_check("totally-geodesic-map", worst.residual, tol, worst.point, gates_exit);
    r.notes.push_back("vertical-pair " + std::to_string(agg.vertical) + ", mixed " + std::to_string(agg.mixed) +
                      ", horizontal-pair " + std::to_string(agg.horizontal));
    return r;
}

}  // namespace qksub
