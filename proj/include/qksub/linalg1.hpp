#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qksub {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// First-order jets of scalars / vectors / matrices at a point: value plus
// one partial derivative per chart coordinate. Products follow the Leibniz
// rule, so composite fields (projectors applied to frames, structure tensors
// applied to sections) stay differentiable through every algebraic step.
struct J1 {
    double v = 0.0;
    Vec g;

    J1() = default;
    J1(double value, int n) : v(value), g(Vec::Zero(n)) {}
};

struct J1Vec {
    Vec v;
    Mat g;  // g(i, k) = d_k v_i

    J1Vec() = default;
    J1Vec(int m, int n) : v(Vec::Zero(m)), g(Mat::Zero(m, n)) {}
    static J1Vec constant(const Vec& value, int n) {
        J1Vec r(static_cast<int>(value.size()), n);
        r.v = value;
        return r;
    }
    int dirs() const { return static_cast<int>(g.cols()); }
};

struct J1Mat {
    Mat v;
    std::vector<Mat> g;  // g[k] = d_k A

    J1Mat() = default;
    J1Mat(int r, int c, int n) : v(Mat::Zero(r, c)), g(static_cast<size_t>(n), Mat::Zero(r, c)) {}
    static J1Mat constant(const Mat& value, int n) {
        J1Mat r(static_cast<int>(value.rows()), static_cast<int>(value.cols()), n);
        r.v = value;
        return r;
    }
    int dirs() const { return static_cast<int>(g.size()); }
};

inline J1 operator+(const J1& a, const J1& b) { J1 r = a; r.v += b.v; r.g += b.g; return r; }
inline J1 operator-(const J1& a, const J1& b) { J1 r = a; r.v -= b.v; r.g -= b.g; return r; }
inline J1 operator*(const J1& a, const J1& b) {
    J1 r(a.v * b.v, static_cast<int>(a.g.size()));
    r.g = a.g * b.v + b.g * a.v;
    return r;
}
inline J1 operator*(double c, const J1& a) { J1 r = a; r.v *= c; r.g *= c; return r; }
inline J1 operator/(const J1& a, const J1& b) {
    J1 r(a.v / b.v, static_cast<int>(a.g.size()));
    r.g = (a.g * b.v - b.g * a.v) / (b.v * b.v);
    return r;
}
inline J1 log(const J1& a) {
    J1 r(std::log(a.v), static_cast<int>(a.g.size()));
    r.g = a.g / a.v;
    return r;
}

inline J1Vec operator+(const J1Vec& a, const J1Vec& b) { J1Vec r = a; r.v += b.v; r.g += b.g; return r; }
inline J1Vec operator-(const J1Vec& a, const J1Vec& b) { J1Vec r = a; r.v -= b.v; r.g -= b.g; return r; }
inline J1Vec operator-(const J1Vec& a) { J1Vec r = a; r.v = -r.v; r.g = -r.g; return r; }
inline J1Vec operator*(double c, const J1Vec& a) { J1Vec r = a; r.v *= c; r.g *= c; return r; }

// (s * Y)_i = s Y_i with the product rule in every direction.
inline J1Vec operator*(const J1& s, const J1Vec& y) {
    J1Vec r(static_cast<int>(y.v.size()), y.dirs());
    r.v = s.v * y.v;
    r.g = s.v * y.g + y.v * s.g.transpose();
    return r;
}

inline J1Mat operator+(const J1Mat& a, const J1Mat& b) {
    J1Mat r = a;
    r.v += b.v;
    for (int k = 0; k < r.dirs(); ++k) r.g[k] += b.g[k];
    return r;
}
inline J1Mat operator-(const J1Mat& a, const J1Mat& b) {
    J1Mat r = a;
    r.v -= b.v;
    for (int k = 0; k < r.dirs(); ++k) r.g[k] -= b.g[k];
    return r;
}
inline J1Mat operator-(const J1Mat& a) {
    J1Mat r = a;
    r.v = -r.v;
    for (auto& m : r.g) m = -m;
    return r;
}
inline J1Mat operator*(const J1Mat& a, const J1Mat& b) {
    J1Mat r(static_cast<int>(a.v.rows()), static_cast<int>(b.v.cols()), a.dirs());
    r.v = a.v * b.v;
    for (int k = 0; k < a.dirs(); ++k) r.g[k] = a.g[k] * b.v + a.v * b.g[k];
    return r;
}
inline J1Vec operator*(const J1Mat& a, const J1Vec& x) {
    J1Vec r(static_cast<int>(a.v.rows()), a.dirs());
    r.v = a.v * x.v;
    for (int k = 0; k < a.dirs(); ++k) r.g.col(k) = a.g[k] * x.v + a.v * x.g.col(k);
    return r;
}
inline J1Mat transpose(const J1Mat& a) {
    J1Mat r(static_cast<int>(a.v.cols()), static_cast<int>(a.v.rows()), a.dirs());
    r.v = a.v.transpose();
    for (int k = 0; k < a.dirs(); ++k) r.g[k] = a.g[k].transpose();
    return r;
}
// d(A^-1) = -A^-1 (dA) A^-1
inline J1Mat inverse(const J1Mat& a) {
    J1Mat r(static_cast<int>(a.v.rows()), static_cast<int>(a.v.cols()), a.dirs());
    r.v = a.v.inverse();
    for (int k = 0; k < a.dirs(); ++k) r.g[k] = -r.v * a.g[k] * r.v;
    return r;
}
inline J1 trace(const J1Mat& a) {
    J1 r(a.v.trace(), a.dirs());
    for (int k = 0; k < a.dirs(); ++k) r.g(k) = a.g[k].trace();
    return r;
}

// x^T A y with full product rule.
inline J1 inner(const J1Mat& a, const J1Vec& x, const J1Vec& y) {
    J1 r(x.v.dot(a.v * y.v), a.dirs());
    for (int k = 0; k < a.dirs(); ++k)
        r.g(k) = x.g.col(k).dot(a.v * y.v) + x.v.dot(a.g[k] * y.v) + x.v.dot(a.v * y.g.col(k));
    return r;
}

}  // namespace qksub
