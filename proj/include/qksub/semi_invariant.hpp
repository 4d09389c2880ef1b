#pragma once

#include "qksub/examples.hpp"
#include "qksub/quaternionic.hpp"
#include "qksub/submersion.hpp"

namespace qksub {

// Per-structure-tensor split machinery at one point: the tensor jet, the
// smooth projector fields onto the invariant part of the kernel (PD1), its
// complement in the kernel (PD2), the image of the complement (PJD2) and
// the remaining horizontal directions (Pmu). phi/omega take vertical
// arguments, B/C horizontal ones; *_f variants act on section jets.
struct AlphaCtx {
    const MapCtx* m = nullptr;
    J1Mat J;
    J1Mat PD1, PD2, PJD2, Pmu;

    Vec phi(const Vec& v) const { return m->V.v * (J.v * v); }
    Vec om(const Vec& v) const { return m->H.v * (J.v * v); }
    Vec Bof(const Vec& z) const { return m->V.v * (J.v * z); }
    Vec Cof(const Vec& z) const { return m->H.v * (J.v * z); }

    J1Vec phi_f(const J1Vec& y) const { return m->V * (J * y); }
    J1Vec om_f(const J1Vec& y) const { return m->H * (J * y); }
    J1Vec B_f(const J1Vec& z) const { return m->V * (J * z); }
    J1Vec C_f(const J1Vec& z) const { return m->H * (J * z); }
};

AlphaCtx make_alpha_ctx(const MapCtx& m, const QuaternionicBasis& B, int alpha);

// Pointwise detected bases (g-orthonormal) plus structure defects.
struct AlphaSplit {
    std::vector<Vec> d1, d2, jd2, mu;
    double invariance_defect = 0.0;      // eigenvalue mass away from {0,1}
    double d2_horizontal_defect = 0.0;   // vertical leakage of J applied to d2
};

struct DistributionSplit {
    Vec point;
    std::array<AlphaSplit, 3> alpha;
    std::vector<Vec> common_d1;  // largest simultaneously invariant subspace
    std::vector<Vec> common_d2;  // kernel complement of common_d1
    bool valid = true;           // all three splits clean at this point
};

DistributionSplit detect_split(const MapCtx& ctx, const QuaternionicBasis& B,
                               double gap_tol = 1e-6);

struct DecompositionResult {
    bool vertical_input = false;
    Vec phi, omega;  // set for vertical inputs
    Vec b, c;        // set for horizontal inputs
    double orthogonality_defect = 0.0;  // g(C x, J v) over detected d2
};

DecompositionResult decompose(const MapCtx& ctx, const QuaternionicBasis& B, int alpha,
                              const Vec& x);

struct ClassificationVerdict {
    std::string kind;
    bool submersion = true;
    bool conformal = true;
    bool anti_invariant = false;
    bool anti_holomorphic = false;
    bool dims_stable = true;
    std::array<int, 3> d1_dims{0, 0, 0};
    std::array<int, 3> d2_dims{0, 0, 0};
    int common_d1_dim = 0;
    int common_d2_dim = 0;
    double dilation_at_ref = 0.0;
    double h_homothety_residual = 0.0;
    std::vector<std::string> notes;
};

ClassificationVerdict classify(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                               const SmoothMap& F, const QuaternionicBasis& B,
                               const std::vector<Vec>& points);

struct CheckerConfig {
    double tol_identity = 1e-5;  // structure identities
    double tol_a = 1e-6;         // direct sides of stated equivalences
    double tol_b = 1e-4;         // derived sides of stated equivalences
    double tol_closure = 1e-6;   // bracket closure
    double qk_gate = 1e-5;       // skip identity checks above this fit defect
    int fault = 0;               // 1 = swap the B/C roles in one identity (detector sanity)
};

std::vector<CheckReport> verify_lemma_identities(const DiffEngine& eng,
                                                 std::shared_ptr<const ManifoldSpec> src,
                                                 const SmoothMap& F, const QuaternionicBasis& B,
                                                 const std::vector<Vec>& points,
                                                 const CheckerConfig& cfg = {});

std::vector<CheckReport> verify_nabla_phi_omega(const DiffEngine& eng,
                                                std::shared_ptr<const ManifoldSpec> src,
                                                const SmoothMap& F, const QuaternionicBasis& B,
                                                const std::vector<Vec>& points,
                                                const CheckerConfig& cfg = {});

std::vector<CheckReport> check_d2_integrability(const DiffEngine& eng,
                                                std::shared_ptr<const ManifoldSpec> src,
                                                const SmoothMap& F, const QuaternionicBasis& B,
                                                const std::vector<Vec>& points,
                                                const CheckerConfig& cfg = {});

std::vector<CheckReport> check_d1_integrability(const DiffEngine& eng,
                                                std::shared_ptr<const ManifoldSpec> src,
                                                const SmoothMap& F, const QuaternionicBasis& B,
                                                const std::vector<Vec>& points,
                                                const CheckerConfig& cfg = {});

std::vector<CheckReport> check_horizontal_integrability(const DiffEngine& eng,
                                                        std::shared_ptr<const ManifoldSpec> src,
                                                        const SmoothMap& F,
                                                        const QuaternionicBasis& B,
                                                        const std::vector<Vec>& points,
                                                        const CheckerConfig& cfg = {});

std::vector<CheckReport> check_foliation_conditions(const DiffEngine& eng,
                                                    std::shared_ptr<const ManifoldSpec> src,
                                                    const SmoothMap& F, const QuaternionicBasis& B,
                                                    const std::vector<Vec>& points,
                                                    const CheckerConfig& cfg = {});

std::vector<CheckReport> check_homothety_equivalences(const DiffEngine& eng,
                                                      std::shared_ptr<const ManifoldSpec> src,
                                                      const SmoothMap& F, const QuaternionicBasis& B,
                                                      const std::vector<Vec>& points,
                                                      const CheckerConfig& cfg = {});

std::vector<CheckReport> check_totally_geodesic_criterion(const DiffEngine& eng,
                                                          std::shared_ptr<const ManifoldSpec> src,
                                                          const SmoothMap& F,
                                                          const QuaternionicBasis& B,
                                                          const std::vector<Vec>& points,
                                                          const CheckerConfig& cfg = {});

CheckReport check_classification(const DiffEngine& eng, std::shared_ptr<const ManifoldSpec> src,
                                 const SmoothMap& F, const QuaternionicBasis& B,
                                 const std::vector<Vec>& points, const Expectation* expected);

}  // namespace qksub
