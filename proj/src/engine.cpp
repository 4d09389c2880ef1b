#include "qksub/engine.hpp"

#include <cmath>

namespace qksub {

namespace {

std::vector<double> to_std(const Vec& p) {
    return std::vector<double>(p.data(), p.data() + p.size());
}

std::vector<Jet2> seed_all(const Vec& p) {
    const int n = static_cast<int>(p.size());
    std::vector<Jet2> xs;
    xs.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) xs.push_back(Jet2::seed(p(i), n, i));
    return xs;
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

}  // namespace

double DiffEngine::value(const Expr& f, const Vec& p) const {
    const double v = f.eval(to_std(p));
    check_finite(v, "field evaluation");
    return v;
}

J1 DiffEngine::jet1(const Expr& f, const Vec& p) const {
    const int n = static_cast<int>(p.size());
    J1 r(0.0, n);
    if (mode == EngineMode::Dual) {
        const Jet2 j = f.eval(seed_all(p));
        r.v = j.v;
        r.g = j.g;
    } else {
        auto xs = to_std(p);
        r.v = f.eval(xs);
        const double h = fd_step;
        for (int k = 0; k < n; ++k) {
            xs[static_cast<size_t>(k)] = p(k) + h;
            const double fp = f.eval(xs);
            xs[static_cast<size_t>(k)] = p(k) - h;
            const double fm = f.eval(xs);
            xs[static_cast<size_t>(k)] = p(k);
            r.g(k) = (fp - fm) / (2.0 * h);
        }
    }
    check_finite(r.v, "jet1 value");
    check_finite(r.g.sum(), "jet1 gradient");
    return r;
}

J2Scalar DiffEngine::jet2(const Expr& f, const Vec& p) const {
    const int n = static_cast<int>(p.size());
    J2Scalar r;
    r.g = Vec::Zero(n);
    r.h = Mat::Zero(n, n);
    if (mode == EngineMode::Dual) {
        const Jet2 j = f.eval(seed_all(p));
        r.v = j.v;
        r.g = j.g;
        r.h = j.h;
    } else {
        auto xs = to_std(p);
        r.v = f.eval(xs);
        const double h1 = fd_step;
        for (int k = 0; k < n; ++k) {
            xs[static_cast<size_t>(k)] = p(k) + h1;
            const double fp = f.eval(xs);
            xs[static_cast<size_t>(k)] = p(k) - h1;
            const double fm = f.eval(xs);
            xs[static_cast<size_t>(k)] = p(k);
            r.g(k) = (fp - fm) / (2.0 * h1);
        }
        const double h = fd_step2();
        for (int k = 0; k < n; ++k) {
            xs[static_cast<size_t>(k)] = p(k) + h;
            const double fp = f.eval(xs);
            xs[static_cast<size_t>(k)] = p(k) - h;
            const double fm = f.eval(xs);
            xs[static_cast<size_t>(k)] = p(k);
            r.h(k, k) = (fp - 2.0 * r.v + fm) / (h * h);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                auto eval_at = [&](double si, double sj) {
                    xs[static_cast<size_t>(i)] = p(i) + si * h;
                    xs[static_cast<size_t>(j)] = p(j) + sj * h;
                    const double v = f.eval(xs);
                    xs[static_cast<size_t>(i)] = p(i);
                    xs[static_cast<size_t>(j)] = p(j);
                    return v;
                };
                const double mixed =
                    (eval_at(1, 1) - eval_at(1, -1) - eval_at(-1, 1) + eval_at(-1, -1)) / (4.0 * h * h);
                r.h(i, j) = mixed;
                r.h(j, i) = mixed;
            }
        }
    }
    check_finite(r.v + r.g.sum() + r.h.sum(), "jet2");
    return r;
}

Vec DiffEngine::value(const VecExpr& f, const Vec& p) const {
    Vec r(static_cast<int>(f.size()));
    const auto xs = to_std(p);
    for (size_t i = 0; i < f.size(); ++i) r(static_cast<int>(i)) = f[i].eval(xs);
    check_finite(r.sum(), "vector field evaluation");
    return r;
}

J1Vec DiffEngine::jet1(const VecExpr& f, const Vec& p) const {
    const int n = static_cast<int>(p.size());
    J1Vec r(static_cast<int>(f.size()), n);
    for (size_t i = 0; i < f.size(); ++i) {
        const J1 ji = jet1(f[i], p);
        r.v(static_cast<int>(i)) = ji.v;
        r.g.row(static_cast<int>(i)) = ji.g.transpose();
    }
    return r;
}

J2Vec DiffEngine::jet2(const VecExpr& f, const Vec& p) const {
    const int n = static_cast<int>(p.size());
    J2Vec r;
    r.v = Vec::Zero(static_cast<int>(f.size()));
    r.g = Mat::Zero(static_cast<int>(f.size()), n);
    r.h.assign(f.size(), Mat::Zero(n, n));
    for (size_t i = 0; i < f.size(); ++i) {
        const J2Scalar ji = jet2(f[i], p);
        r.v(static_cast<int>(i)) = ji.v;
        r.g.row(static_cast<int>(i)) = ji.g.transpose();
        r.h[i] = ji.h;
    }
    return r;
}

Mat DiffEngine::value(const MatExpr& f, const Vec& p) const {
    Mat r(f.rows, f.cols);
    const auto xs = to_std(p);
    for (int i = 0; i < f.rows; ++i)
        for (int j = 0; j < f.cols; ++j) r(i, j) = f.at(i, j).eval(xs);
    check_finite(r.sum(), "matrix field evaluation");
    return r;
}

J1Mat DiffEngine::jet1(const MatExpr& f, const Vec& p) const {
    const int n = static_cast<int>(p.size());
    J1Mat r(f.rows, f.cols, n);
    for (int i = 0; i < f.rows; ++i) {
        for (int j = 0; j < f.cols; ++j) {
            const J1 e = jet1(f.at(i, j), p);
            r.v(i, j) = e.v;
            for (int k = 0; k < n; ++k) r.g[static_cast<size_t>(k)](i, j) = e.g(k);
        }
    }
    return r;
}

J1Mat differential_jet(const J2Vec& map_jet2) {
    const int d = static_cast<int>(map_jet2.v.size());
    const int n = static_cast<int>(map_jet2.g.cols());
    J1Mat r(d, n, n);
    r.v = map_jet2.g;
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < d; ++a)
            for (int j = 0; j < n; ++j) r.g[static_cast<size_t>(k)](a, j) = map_jet2.h[static_cast<size_t>(a)](j, k);
    return r;
}

}  // namespace qksub
