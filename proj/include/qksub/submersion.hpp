#pragma once

#include <memory>

#include "qksub/geometry.hpp"
#include "qksub/report.hpp"
#include "qksub/sampling.hpp"

namespace qksub {

struct SmoothMap {
    std::string key;
    VecExpr coords;
    std::shared_ptr<const ManifoldSpec> target;
};

struct SubmersionAnalysis {
    Vec point;
    Mat jacobian;
    int rank = 0;
    bool submersion = false;
    bool critical = false;  // vanishing differential
    std::vector<Vec> vertical;    // g-orthonormal kernel basis
    std::vector<Vec> horizontal;  // g-orthonormal complement basis
    bool has_dilation = false;
    double dilation = 0.0;
    double conformality_residual = 0.0;
};

struct FiberGeometry {
    Vec mean_curvature;  // at the worst point, coordinate components
    double mean_curvature_norm = 0.0;
    double umbilicity_residual = 0.0;
    double geodesy_residual = 0.0;
    std::optional<Vec> worst_point;
};

// All per-point derived geometry of a map between manifolds, kept as
// first-order jets so composite sections (projected fields, structure
// tensors applied to sections) stay differentiable. Pure value type; every
// member function is const.
class MapCtx {
  public:
    MapCtx(const DiffEngine& engine, std::shared_ptr<const ManifoldSpec> source, const SmoothMap& map,
           const Vec& point);

    const DiffEngine& eng;
    std::shared_ptr<const ManifoldSpec> src;
    const SmoothMap& F;
    int n = 0;  // source dimension
    int d = 0;  // target dimension
    Vec p, q;   // point and image

    J1Mat g, ginv;           // source metric
    std::vector<Mat> gamma;  // source Christoffels at p
    J1Mat dF;                // differential with first derivatives
    int rank = 0;
    bool submersion = false;

    J1Mat H, V;  // horizontal / vertical projector fields (jets at p)
    std::vector<Vec> vertical_basis, horizontal_basis;

    Mat gN;                   // target metric at q
    std::vector<Mat> gammaN;  // target Christoffels at q
    J1 lam2;                  // squared dilation as a field jet
    J1 lnl;                   // log dilation
    Vec grad_lnl;             // gradient of log dilation (value)

    double dilation() const { return std::sqrt(lam2.v); }

    J1Vec field(const VecExpr& Y) const { return eng.jet1(Y, p); }
    J1Vec constant_field(const Vec& v) const { return J1Vec::constant(v, n); }

    Vec covd(const Vec& dir, const J1Vec& Y) const { return covariant_derivative(gamma, dir, Y); }
    Vec hat_nabla(const Vec& X, const J1Vec& Y) const { return V.v * covd(X, Y); }
    Vec h_nabla(const Vec& X, const J1Vec& Y) const { return H.v * covd(X, Y); }

    // Configuration tensors; tensorial in X, field-valued in Y.
    Vec oneill_T(const Vec& X, const J1Vec& Y) const;
    Vec oneill_A(const Vec& X, const J1Vec& Y) const;

    // Along-map sections: value and first derivatives of x -> dF(x) Y(x).
    J1Vec pushforward(const J1Vec& Y) const { return dF * Y; }
    Vec pushforward_value(const Vec& v) const { return dF.v * v; }

    // Pullback connection applied to an along-map section W in direction X.
    Vec pullback_nabla(const Vec& X, const J1Vec& W) const;

    // Second fundamental form (del F*)(X, Y), target components.
    Vec sff(const Vec& X, const J1Vec& Y) const;

    double gM(const Vec& a, const Vec& b) const { return a.dot(g.v * b); }
    double norm_M(const Vec& a) const { return g_norm(g.v, a); }
    double gN_at(const Vec& a, const Vec& b) const { return a.dot(gN * b); }
    double norm_N(const Vec& a) const { return g_norm(gN, a); }
    double lnl_along(const Vec& X) const { return lnl.g.dot(X); }
};

Mat differential(const DiffEngine& eng, const ManifoldSpec& src, const SmoothMap& F, const Vec& p);

SubmersionAnalysis analyze(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                           const SmoothMap& F, const Vec& p);

Vec tension_field(const MapCtx& ctx);

FiberGeometry fiber_geometry(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                             const SmoothMap& F, const std::vector<Vec>& points);

CheckReport check_h_homothetic(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const std::vector<Vec>& points, double tol = 1e-8);

// Pool of section fields used to quantify map identities: coordinate
// fields, registered frame fields, and seeded constant-coefficient mixes.
std::vector<VecExpr> direction_field_pool(const ManifoldSpec& src, uint64_t seed, int extra = 4);

CheckReport check_conformality(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const std::vector<Vec>& points, double tol = 1e-8);

CheckReport check_projectors(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                             const SmoothMap& F, const std::vector<Vec>& points, double tol = 1e-10);

CheckReport check_sff_symmetry(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const std::vector<Vec>& points,
                               const std::vector<VecExpr>& fields, double tol = 1e-5);

CheckReport check_pushforward_bracket(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                      const SmoothMap& F, const std::vector<Vec>& points,
                                      const std::vector<VecExpr>& fields, double tol = 1e-5);

CheckReport check_horizontal_pair_rule(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                       const SmoothMap& F, const std::vector<Vec>& points,
                                       const std::vector<VecExpr>& fields, double tol = 1e-5);

CheckReport check_basic_bracket_vertical(const DiffEngine& eng,
                                         std::shared_ptr<const ManifoldSpec> src, const SmoothMap& F,
                                         const std::vector<Vec>& points, double tol = 1e-6);

CheckReport check_basic_a_tensor(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                 const SmoothMap& F, const std::vector<Vec>& points, double tol = 1e-6);

CheckReport check_tension_consistency(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                      const SmoothMap& F, const std::vector<Vec>& points,
                                      double tol = 1e-5);

// Direct totally-geodesic-map residual, partitioned into vertical-vertical,
// mixed and horizontal-horizontal direction pairs.
struct TotallyGeodesicSplit {
    double vertical = 0.0;
    double mixed = 0.0;
    double horizontal = 0.0;
    double overall() const { return std::max({vertical, mixed, horizontal}); }
};

TotallyGeodesicSplit totally_geodesic_residuals(const MapCtx& ctx);

CheckReport check_totally_geodesic_map(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                       const SmoothMap& F, const std::vector<Vec>& points,
                                       double tol = 1e-6, bool gates_exit = false);

}  // namespace qksub
