#pragma once

#include <map>

#include "qksub/quaternionic.hpp"
#include "qksub/submersion.hpp"

namespace qksub {

// Expected covariant derivative of a structure tensor on the named frame:
// (del_{e_i} J_alpha) e_j with coefficients on the frame itself.
struct GoldenEntry {
    int alpha;    // 0-based structure index
    int frame_i;  // 0-based derivative direction
    int frame_j;  // 0-based argument
    Vec coeff;    // frame coefficients of the expected value
    std::string provenance;
    std::string note;
};

struct Expectation {
    bool has_dilation = false;
    Expr dilation;  // expected dilation as a function of the source point
    std::string dilation_provenance;

    bool has_classification = false;
    std::string kind;
    bool anti_invariant = false;
    std::array<int, 3> d1_dims{0, 0, 0};
    std::array<int, 3> d2_dims{0, 0, 0};
    std::array<std::vector<Vec>, 3> d1_bases;  // constant expected bases (may be empty)
    std::array<std::vector<Vec>, 3> d2_bases;
    std::string kind_provenance;
};

struct ExampleEntry {
    std::string key;
    bool synthetic = false;
    std::vector<std::string> metric_variants;  // first entry is the default
    std::map<std::string, std::shared_ptr<ManifoldSpec>> manifolds;
    QuaternionicBasis basis;
    std::vector<SmoothMap> maps;  // first entry is the default
    SampleSpec sampling;

    std::string golden_metric;
    std::vector<GoldenEntry> golden;

    std::map<std::string, Expectation> expected;  // key: "<map>|<metric>"

    std::shared_ptr<const ManifoldSpec> manifold(const std::string& variant) const;
    const SmoothMap& map(const std::string& map_key) const;
    const Expectation* expectation(const std::string& map_key, const std::string& variant) const;
};

const std::vector<ExampleEntry>& registry();
const ExampleEntry& find_example(const std::string& key);

std::vector<GoldenEntry> golden_table(const std::string& key);

}  // namespace qksub
