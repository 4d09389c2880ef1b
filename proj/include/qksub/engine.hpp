#pragma once

#include <stdexcept>
#include <string>

#include "qksub/expr.hpp"
#include "qksub/linalg1.hpp"

namespace qksub {

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

enum class EngineMode { Dual, FiniteDifference };

struct J2Scalar {
    double v = 0.0;
    Vec g;
    Mat h;
};

struct J2Vec {
    Vec v;
    Mat g;               // g(i, k) = d_k v_i
    std::vector<Mat> h;  // h[i](j, k) = d_j d_k v_i
};

// Differentiation engine. Dual mode propagates Jet2 through expression
// trees; finite-difference mode evaluates the same expressions at central
// stencils (step fd_step for first derivatives, 10*fd_step for second ones,
// where the larger step keeps the h^-2 roundoff amplification in check).
// Both modes fill identical jet structures, so everything downstream is
// mode-agnostic and the two modes cross-validate each other.
struct DiffEngine {
    EngineMode mode = EngineMode::Dual;
    double fd_step = 1e-5;

    double fd_step2() const { return 10.0 * fd_step; }

    double value(const Expr& f, const Vec& p) const;
    J1 jet1(const Expr& f, const Vec& p) const;
    J2Scalar jet2(const Expr& f, const Vec& p) const;

    Vec value(const VecExpr& f, const Vec& p) const;
    J1Vec jet1(const VecExpr& f, const Vec& p) const;
    J2Vec jet2(const VecExpr& f, const Vec& p) const;

    Mat value(const MatExpr& f, const Vec& p) const;
    J1Mat jet1(const MatExpr& f, const Vec& p) const;

    std::string mode_name() const { return mode == EngineMode::Dual ? "dual" : "fd"; }
};

// The differential of a map as a first-order jet, extracted from the map's
// second-order jet: value = Jacobian, derivatives = second partials.
J1Mat differential_jet(const J2Vec& map_jet2);

}  // namespace qksub
