#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace qksub {

// Second-order forward-mode scalar: value, gradient and Hessian with
// respect to the chart coordinates. Seed coordinates with seed(); all
// arithmetic then carries exact first and second derivatives.
struct Jet2 {
    double v = 0.0;
    Eigen::VectorXd g;  // size n
    Eigen::MatrixXd h;  // n x n, symmetric

    Jet2() = default;
    Jet2(double value, int n)
        : v(value), g(Eigen::VectorXd::Zero(n)), h(Eigen::MatrixXd::Zero(n, n)) {}

    static Jet2 seed(double value, int n, int direction) {
        Jet2 j(value, n);
        j.g(direction) = 1.0;
        return j;
    }

    int dim() const { return static_cast<int>(g.size()); }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r(a.v + b.v, a.dim());
    r.g = a.g + b.g;
    r.h = a.h + b.h;
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r(a.v - b.v, a.dim());
    r.g = a.g - b.g;
    r.h = a.h - b.h;
    return r;
}

inline Jet2 operator-(const Jet2& a) {
    Jet2 r(-a.v, a.dim());
    r.g = -a.g;
    r.h = -a.h;
    return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r(a.v * b.v, a.dim());
    r.g = a.g * b.v + b.g * a.v;
    r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
    return r;
}

inline Jet2 operator+(const Jet2& a, double c) { Jet2 r = a; r.v += c; return r; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { Jet2 r = a; r.v -= c; return r; }
inline Jet2 operator-(double c, const Jet2& a) { return -(a - c); }
inline Jet2 operator*(const Jet2& a, double c) {
    Jet2 r(a.v * c, a.dim());
    r.g = a.g * c;
    r.h = a.h * c;
    return r;
}
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }

// Chain rule for f(u) given f(u.v), f'(u.v), f''(u.v).
inline Jet2 chain(const Jet2& u, double f, double df, double ddf) {
    Jet2 r(f, u.dim());
    r.g = df * u.g;
    r.h = df * u.h + ddf * u.g * u.g.transpose();
    return r;
}

inline Jet2 inv(const Jet2& a) {
    const double iv = 1.0 / a.v;
    return chain(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& a) { return inv(a) * c; }

inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}

inline Jet2 log(const Jet2& a) {
    return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

inline Jet2 sin(const Jet2& a) {
    return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}

inline Jet2 cos(const Jet2& a) {
    return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}

inline Jet2 sqrt(const Jet2& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

}  // namespace qksub
