#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qksub/linalg1.hpp"

namespace qksub {

enum class Verdict { Pass, Fail, Vacuous, Skipped };

std::string verdict_name(Verdict v);

// One named check: residual against tolerance, with the worst sample point
// and free-form diagnostics. `gates_exit` distinguishes contract checks from
// purely descriptive ones (a structure may legitimately not be hyperkahler).
struct CheckReport {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::Pass;
    std::optional<Vec> worst_point;
    bool gates_exit = true;
    std::vector<std::string> notes;
};

CheckReport make_check(const std::string& name, double residual, double tolerance,
                       std::optional<Vec> worst_point = std::nullopt, bool gates_exit = true);
CheckReport vacuous_check(const std::string& name, const std::string& reason);
CheckReport skipped_check(const std::string& name, const std::string& reason);

// Running worst-case tracker: residual plus the point that produced it.
struct WorstCase {
    double residual = 0.0;
    std::optional<Vec> point;

    void update(double r, const Vec& p) {
        if (!point || r > residual) {
            residual = r;
            point = p;
        }
    }
};

std::string format_point(const Vec& p);

}  // namespace qksub
