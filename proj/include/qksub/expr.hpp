#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qksub/jet.hpp"

namespace qksub {

// Immutable scalar expression tree over chart coordinates. All registered
// fields (metrics, frames, almost complex structures, map coordinates) are
// built from these, so one definition evaluates at plain doubles, at Jet2
// for forward-mode derivatives, or at stencil points for finite differences.
class Expr {
  public:
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Exp, Log, Sin, Cos, Sqrt, Pow };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double c) {
        Expr e;
        e.n_ = std::make_shared<Node>(Node{Kind::Const, c, 0, 0, {}});
        return e;
    }
    static Expr var(int index) {
        Expr e;
        e.n_ = std::make_shared<Node>(Node{Kind::Var, 0.0, index, 0, {}});
        return e;
    }

    Expr pow(int exponent) const { return unary(Kind::Pow, *this, exponent); }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(Kind::Add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(Kind::Sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(Kind::Mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(Kind::Div, a, b); }
    friend Expr operator-(const Expr& a) { return unary(Kind::Neg, a); }
    friend Expr operator+(const Expr& a, double c) { return a + constant(c); }
    friend Expr operator+(double c, const Expr& a) { return constant(c) + a; }
    friend Expr operator-(const Expr& a, double c) { return a - constant(c); }
    friend Expr operator-(double c, const Expr& a) { return constant(c) - a; }
    friend Expr operator*(const Expr& a, double c) { return a * constant(c); }
    friend Expr operator*(double c, const Expr& a) { return constant(c) * a; }
    friend Expr operator/(const Expr& a, double c) { return a / constant(c); }
    friend Expr operator/(double c, const Expr& a) { return constant(c) / a; }

    friend Expr exp(const Expr& a) { return unary(Kind::Exp, a); }
    friend Expr log(const Expr& a) { return unary(Kind::Log, a); }
    friend Expr sin(const Expr& a) { return unary(Kind::Sin, a); }
    friend Expr cos(const Expr& a) { return unary(Kind::Cos, a); }
    friend Expr sqrt(const Expr& a) { return unary(Kind::Sqrt, a); }

    // T is double or Jet2. `make_const` adapts constants to the scalar type.
    template <class T>
    T eval(const std::vector<T>& x) const {
        switch (n_->kind) {
            case Kind::Const: return adapt(n_->c, x);
            case Kind::Var:
                if (n_->index < 0 || n_->index >= static_cast<int>(x.size()))
                    throw std::out_of_range("Expr: coordinate index " + std::to_string(n_->index));
                return x[static_cast<size_t>(n_->index)];
            case Kind::Add: return n_->kid[0].eval(x) + n_->kid[1].eval(x);
            case Kind::Sub: return n_->kid[0].eval(x) - n_->kid[1].eval(x);
            case Kind::Mul: return n_->kid[0].eval(x) * n_->kid[1].eval(x);
            case Kind::Div: return n_->kid[0].eval(x) / n_->kid[1].eval(x);
            case Kind::Neg: return -n_->kid[0].eval(x);
            case Kind::Exp: { using std::exp; return exp(n_->kid[0].eval(x)); }
            case Kind::Log: { using std::log; return log(n_->kid[0].eval(x)); }
            case Kind::Sin: { using std::sin; return sin(n_->kid[0].eval(x)); }
            case Kind::Cos: { using std::cos; return cos(n_->kid[0].eval(x)); }
            case Kind::Sqrt: { using std::sqrt; return sqrt(n_->kid[0].eval(x)); }
            case Kind::Pow: return ipow(n_->kid[0].eval(x), n_->exponent, x);
        }
        throw std::logic_error("Expr: unreachable");
    }

  private:
    struct Node {
        Kind kind;
        double c;
        int index;
        int exponent;
        std::vector<Expr> kid;
    };

    static Expr binary(Kind k, const Expr& a, const Expr& b) {
        Expr e;
        e.n_ = std::make_shared<Node>(Node{k, 0.0, 0, 0, {a, b}});
        return e;
    }
    static Expr unary(Kind k, const Expr& a, int exponent = 0) {
        Expr e;
        e.n_ = std::make_shared<Node>(Node{k, 0.0, 0, exponent, {a}});
        return e;
    }

    static double adapt(double c, const std::vector<double>&) { return c; }
    static Jet2 adapt(double c, const std::vector<Jet2>& x) {
        return Jet2(c, x.empty() ? 0 : x.front().dim());
    }

    template <class T>
    static T ipow(const T& base, int e, const std::vector<T>& x) {
        if (e == 0) return adapt(1.0, x);
        const bool neg = e < 0;
        int k = neg ? -e : e;
        T acc = base;
        for (int i = 1; i < k; ++i) acc = acc * base;
        return neg ? adapt(1.0, x) / acc : acc;
    }

    std::shared_ptr<const Node> n_;
};

using VecExpr = std::vector<Expr>;

struct MatExpr {
    int rows = 0;
    int cols = 0;
    std::vector<Expr> entries;  // row-major

    MatExpr() = default;
    MatExpr(int r, int c) : rows(r), cols(c), entries(static_cast<size_t>(r) * c, Expr::constant(0.0)) {}

    Expr& at(int i, int j) { return entries[static_cast<size_t>(i) * cols + j]; }
    const Expr& at(int i, int j) const { return entries[static_cast<size_t>(i) * cols + j]; }

    static MatExpr constant(const Eigen::MatrixXd& m) {
        MatExpr e(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
        for (int i = 0; i < e.rows; ++i)
            for (int j = 0; j < e.cols; ++j) e.at(i, j) = Expr::constant(m(i, j));
        return e;
    }
    static MatExpr identity(int n) { return constant(Eigen::MatrixXd::Identity(n, n)); }
};

inline VecExpr coordinate_field(int n, int direction) {
    VecExpr f(static_cast<size_t>(n), Expr::constant(0.0));
    f[static_cast<size_t>(direction)] = Expr::constant(1.0);
    return f;
}

}  // namespace qksub
