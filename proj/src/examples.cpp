#include "qksub/examples.hpp"

#include <cmath>

namespace qksub {

namespace {

Vec frame_coeff(std::initializer_list<double> c) {
    Vec v(static_cast<int>(c.size()));
    int i = 0;
    for (double x : c) v(i++) = x;
    return v;
}

MatExpr conformal_metric(int n, const Expr& factor) {
    MatExpr m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = factor;
    return m;
}

MatExpr euclidean_metric(int n) { return MatExpr::identity(n); }

std::shared_ptr<ManifoldSpec> euclidean_space(int n) {
    auto m = std::make_shared<ManifoldSpec>();
    m->dim = n;
    m->metric = euclidean_metric(n);
    return m;
}

// Structure tensors acting quaternionically on the scaled frame
// {x3 d1, x3 d2, -x3 d3, x3 d4}; constant matrices on the chart.
std::array<Mat, 3> quaternionic_triple_4() {
    Mat J1(4, 4), J2(4, 4), J3(4, 4);
    J1 << 0, -1, 0, 0,
          1,  0, 0, 0,
          0,  0, 0, 1,
          0,  0, -1, 0;
    J2 << 0, 0, 1, 0,
          0, 0, 0, 1,
         -1, 0, 0, 0,
          0, -1, 0, 0;
    J3 << 0, 0, 0, -1,
          0, 0, 1, 0,
          0, -1, 0, 0,
          1, 0, 0, 0;
    return {J1, J2, J3};
}

std::vector<GoldenEntry> golden_r4();

ExampleEntry make_r4qk() {
    ExampleEntry e;
    e.key = "r4-qk";
    e.metric_variants = {"frame-orthonormal", "euclidean"};

    const Expr x3 = Expr::var(2);
    auto domain = [](const Vec& p) { return std::abs(p(2)) > 1e-9; };

    auto frames = [&]() {
        std::vector<std::pair<std::string, VecExpr>> f;
        VecExpr e1{x3, Expr::constant(0), Expr::constant(0), Expr::constant(0)};
        VecExpr e2{Expr::constant(0), x3, Expr::constant(0), Expr::constant(0)};
        VecExpr e3{Expr::constant(0), Expr::constant(0), -x3, Expr::constant(0)};
        VecExpr e4{Expr::constant(0), Expr::constant(0), Expr::constant(0), x3};
        f.emplace_back("e1", e1);
        f.emplace_back("e2", e2);
        f.emplace_back("e3", e3);
        f.emplace_back("e4", e4);
        return f;
    }();

    {
        auto m = std::make_shared<ManifoldSpec>();
        m->dim = 4;
        m->metric = conformal_metric(4, x3.pow(-2));
        m->domain = domain;
        m->frames = frames;
        e.manifolds["frame-orthonormal"] = m;
    }
    {
        auto m = std::make_shared<ManifoldSpec>();
        m->dim = 4;
        m->metric = euclidean_metric(4);
        m->domain = domain;
        m->frames = frames;
        e.manifolds["euclidean"] = m;
    }

    const auto J = quaternionic_triple_4();
    for (int a = 0; a < 3; ++a) e.basis.J[static_cast<size_t>(a)] = MatExpr::constant(J[static_cast<size_t>(a)]);

    const Expr x4 = Expr::var(3);
    e.maps.push_back(SmoothMap{"ex-c", VecExpr{exp(x3)}, euclidean_space(1)});
    e.maps.push_back(SmoothMap{"ex-b", VecExpr{exp(x3) * sin(x4), exp(x3) * cos(x4)}, euclidean_space(2)});
    e.maps.push_back(SmoothMap{"proj-3", VecExpr{Expr::var(1), Expr::var(2), Expr::var(3)}, euclidean_space(3)});

    e.sampling.lo = frame_coeff({-2, -2, -2, -2});
    e.sampling.hi = frame_coeff({2, 2, 2, 2});
    e.sampling.min_abs = {{2, 0.5}};

    e.golden_metric = "frame-orthonormal";
    e.golden = golden_r4();

    const Expr abs_x3 = sqrt(x3 * x3);
    auto expect_dilation = [&](const std::string& map_metric, Expr lam, const std::string& prov) {
        Expectation& x = e.expected[map_metric];
        x.has_dilation = true;
        x.dilation = std::move(lam);
        x.dilation_provenance = prov;
    };
    expect_dilation("ex-b|euclidean", exp(x3), "published");
    expect_dilation("ex-b|frame-orthonormal", abs_x3 * exp(x3), "derived");
    expect_dilation("ex-c|euclidean", exp(x3), "published");
    expect_dilation("ex-c|frame-orthonormal", abs_x3 * exp(x3), "derived");
    expect_dilation("proj-3|euclidean", Expr::constant(1.0), "published");
    expect_dilation("proj-3|frame-orthonormal", abs_x3, "derived");

    auto expect_kind = [&](const std::string& map_key, const std::string& kind, bool anti,
                           std::array<int, 3> d1, std::array<int, 3> d2, const std::string& prov) {
        for (const auto& variant : e.metric_variants) {
            Expectation& x = e.expected[map_key + "|" + variant];
            x.has_classification = true;
            x.kind = kind;
            x.anti_invariant = anti;
            x.d1_dims = d1;
            x.d2_dims = d2;
            x.kind_provenance = prov;
        }
    };
    expect_kind("proj-3", "h-conformal semi-invariant", true, {0, 0, 0}, {1, 1, 1}, "published");
    expect_kind("ex-b", "h-conformal semi-invariant", false, {2, 0, 0}, {0, 2, 2}, "published");
    expect_kind("ex-c", "almost h-conformal semi-invariant", false, {2, 2, 2}, {1, 1, 1}, "derived");

    auto span4 = [](std::initializer_list<int> axes) {
        std::vector<Vec> b;
        for (int a : axes) b.push_back(Vec::Unit(4, a));
        return b;
    };
    for (const auto& variant : e.metric_variants) {
        Expectation& xc = e.expected["ex-c|" + variant];
        xc.d1_bases[0] = span4({0, 1});
        xc.d2_bases[0] = span4({3});
        Expectation& xb = e.expected["ex-b|" + variant];
        xb.d2_bases[1] = span4({0, 1});
        xb.d2_bases[2] = span4({0, 1});
        xb.d1_bases[0] = span4({0, 1});
        Expectation& xp = e.expected["proj-3|" + variant];
        for (int a = 0; a < 3; ++a) xp.d2_bases[static_cast<size_t>(a)] = span4({0});
    }
    return e;
}

ExampleEntry make_r8block() {
    ExampleEntry e;
    e.key = "synthetic/r8-block";
    e.synthetic = true;
    e.metric_variants = {"euclidean"};
    e.manifolds["euclidean"] = euclidean_space(8);

    const auto J4 = quaternionic_triple_4();
    for (int a = 0; a < 3; ++a) {
        Mat J = Mat::Zero(8, 8);
        J.topLeftCorner(4, 4) = J4[static_cast<size_t>(a)];
        J.bottomRightCorner(4, 4) = J4[static_cast<size_t>(a)];
        e.basis.J[static_cast<size_t>(a)] = MatExpr::constant(J);
    }

    // Kernel spanned by d/dx1 and (d/dy1 + d/dy2)/sqrt(2): a two-dimensional
    // anti-invariant distribution that is not a coordinate plane.
    const double s = 1.0 / std::sqrt(2.0);
    Mat rows(6, 8);
    rows.setZero();
    rows(0, 1) = 1;
    rows(1, 2) = 1;
    rows(2, 3) = 1;
    rows(3, 4) = s;
    rows(3, 5) = -s;
    rows(4, 6) = 1;
    rows(5, 7) = 1;
    VecExpr coords;
    for (int r = 0; r < 6; ++r) {
        Expr c = Expr::constant(0.0);
        for (int j = 0; j < 8; ++j)
            if (rows(r, j) != 0.0) c = c + rows(r, j) * Expr::var(j);
        coords.push_back(c);
    }
    e.maps.push_back(SmoothMap{"tilted-6", coords, euclidean_space(6)});

    e.sampling.lo = Vec::Constant(8, -2.0);
    e.sampling.hi = Vec::Constant(8, 2.0);

    Expectation& x = e.expected["tilted-6|euclidean"];
    x.has_dilation = true;
    x.dilation = Expr::constant(1.0);
    x.dilation_provenance = "derived";
    x.has_classification = true;
    x.kind = "h-conformal semi-invariant";
    x.anti_invariant = true;
    x.d1_dims = {0, 0, 0};
    x.d2_dims = {2, 2, 2};
    x.kind_provenance = "derived";
    return e;
}

ExampleEntry make_warped_fiber() {
    ExampleEntry e;
    e.key = "synthetic/warped-fiber";
    e.synthetic = true;
    e.metric_variants = {"warped"};

    const Expr x3 = Expr::var(2);
    auto m = std::make_shared<ManifoldSpec>();
    m->dim = 4;
    MatExpr g(4, 4);
    g.at(0, 0) = exp(2.0 * x3);
    g.at(1, 1) = exp(2.0 * x3);
    g.at(2, 2) = Expr::constant(1.0);
    g.at(3, 3) = Expr::constant(1.0);
    m->metric = g;
    e.manifolds["warped"] = m;

    const auto J = quaternionic_triple_4();
    for (int a = 0; a < 3; ++a) e.basis.J[static_cast<size_t>(a)] = MatExpr::constant(J[static_cast<size_t>(a)]);

    const Expr x4 = Expr::var(3);
    e.maps.push_back(SmoothMap{"ex-b", VecExpr{exp(x3) * sin(x4), exp(x3) * cos(x4)}, euclidean_space(2)});

    e.sampling.lo = frame_coeff({-2, -2, -1, -2});
    e.sampling.hi = frame_coeff({2, 2, 1, 2});
    return e;
}

// Frame-coefficient table of (del_{e_i} J_alpha) e_j under the
// frame-orthonormal metric. The (alpha=1, i=3, j=2) entry is recorded as 0:
// the transcribed source gives -e1 there, which is incompatible with the
// structure equation and with every other entry of its row; the consistent
// value (and the computed one) is 0.
std::vector<GoldenEntry> golden_r4() {
    struct Row {
        int alpha, i, j;
        std::initializer_list<double> c;
    };
    const std::vector<Row> rows = {
        // alpha = 1
        {0, 0, 0, {0, 0, 0, 1}},  {0, 1, 0, {0, 0, -1, 0}}, {0, 2, 0, {0, 0, 0, 0}}, {0, 3, 0, {0, 0, 0, 0}},
        {0, 0, 1, {0, 0, 1, 0}},  {0, 1, 1, {0, 0, 0, 1}},  {0, 2, 1, {0, 0, 0, 0}}, {0, 3, 1, {0, 0, 0, 0}},
        {0, 0, 2, {0, -1, 0, 0}}, {0, 1, 2, {1, 0, 0, 0}},  {0, 2, 2, {0, 0, 0, 0}}, {0, 3, 2, {0, 0, 0, 0}},
        {0, 0, 3, {-1, 0, 0, 0}}, {0, 1, 3, {0, -1, 0, 0}}, {0, 2, 3, {0, 0, 0, 0}}, {0, 3, 3, {0, 0, 0, 0}},
        // alpha = 2
        {1, 0, 0, {0, 0, 0, 0}}, {1, 1, 0, {0, 1, 0, 0}},  {1, 2, 0, {0, 0, 0, 0}}, {1, 3, 0, {0, 0, 0, 1}},
        {1, 0, 1, {0, 0, 0, 0}}, {1, 1, 1, {-1, 0, 0, 0}}, {1, 2, 1, {0, 0, 0, 0}}, {1, 3, 1, {0, 0, 1, 0}},
        {1, 0, 2, {0, 0, 0, 0}}, {1, 1, 2, {0, 0, 0, 1}},  {1, 2, 2, {0, 0, 0, 0}}, {1, 3, 2, {0, -1, 0, 0}},
        {1, 0, 3, {0, 0, 0, 0}}, {1, 1, 3, {0, 0, -1, 0}}, {1, 2, 3, {0, 0, 0, 0}}, {1, 3, 3, {-1, 0, 0, 0}},
        // alpha = 3
        {2, 0, 0, {0, -1, 0, 0}}, {2, 1, 0, {0, 0, 0, 0}}, {2, 2, 0, {0, 0, 0, 0}}, {2, 3, 0, {0, 0, -1, 0}},
        {2, 0, 1, {1, 0, 0, 0}},  {2, 1, 1, {0, 0, 0, 0}}, {2, 2, 1, {0, 0, 0, 0}}, {2, 3, 1, {0, 0, 0, 1}},
        {2, 0, 2, {0, 0, 0, -1}}, {2, 1, 2, {0, 0, 0, 0}}, {2, 2, 2, {0, 0, 0, 0}}, {2, 3, 2, {1, 0, 0, 0}},
        {2, 0, 3, {0, 0, 1, 0}},  {2, 1, 3, {0, 0, 0, 0}}, {2, 2, 3, {0, 0, 0, 0}}, {2, 3, 3, {0, -1, 0, 0}},
    };
    std::vector<GoldenEntry> table;
    for (const auto& r : rows) {
        GoldenEntry g{r.alpha, r.i, r.j, frame_coeff(r.c), "published", ""};
        if (r.alpha == 0 && r.i == 2 && r.j == 1) {
            g.provenance = "derived";
            g.note = "transcribed value -e1 violates the structure equation; consistent value is 0";
        }
        table.push_back(std::move(g));
    }
    return table;
}

}  // namespace

std::shared_ptr<const ManifoldSpec> ExampleEntry::manifold(const std::string& variant) const {
    auto it = manifolds.find(variant);
    if (it == manifolds.end()) throw std::out_of_range("unknown metric variant: " + variant);
    return it->second;
}

const SmoothMap& ExampleEntry::map(const std::string& map_key) const {
    for (const auto& m : maps)
        if (m.key == map_key) return m;
    throw std::out_of_range("unknown map: " + map_key);
}

const Expectation* ExampleEntry::expectation(const std::string& map_key,
                                             const std::string& variant) const {
    auto it = expected.find(map_key + "|" + variant);
    return it == expected.end() ? nullptr : &it->second;
}

const std::vector<ExampleEntry>& registry() {
    static const std::vector<ExampleEntry> entries = [] {
        std::vector<ExampleEntry> v;
        v.push_back(make_r4qk());
        v.push_back(make_r8block());
        v.push_back(make_warped_fiber());
        return v;
    }();
    return entries;
}

const ExampleEntry& find_example(const std::string& key) {
    for (const auto& e : registry())
        if (e.key == key) return e;
    throw std::out_of_range("unknown example: " + key);
}

std::vector<GoldenEntry> golden_table(const std::string& key) {
    const ExampleEntry& e = find_example(key);
    if (e.golden.empty()) throw std::out_of_range("example has no golden table: " + key);
    return e.golden;
}

}  // namespace qksub
