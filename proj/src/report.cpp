#include "qksub/report.hpp"

#include <sstream>

namespace qksub {

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Vacuous: return "vacuous";
        case Verdict::Skipped: return "skipped";
    }
    return "unknown";
}

CheckReport make_check(const std::string& name, double residual, double tolerance,
                       std::optional<Vec> worst_point, bool gates_exit) {
    CheckReport r;
    r.name = name;
    r.residual = residual;
    r.tolerance = tolerance;
    r.verdict = residual < tolerance ? Verdict::Pass : Verdict::Fail;
    r.worst_point = std::move(worst_point);
    r.gates_exit = gates_exit;
    return r;
}

CheckReport vacuous_check(const std::string& name, const std::string& reason) {
    CheckReport r;
    r.name = name;
    r.verdict = Verdict::Vacuous;
    r.gates_exit = false;
    r.notes.push_back(reason);
    return r;
}

CheckReport skipped_check(const std::string& name, const std::string& reason) {
    CheckReport r;
    r.name = name;
    r.verdict = Verdict::Skipped;
    r.gates_exit = false;
    r.notes.push_back(reason);
    return r;
}

std::string format_point(const Vec& p) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p(i);
    os << ")";
    return os.str();
}

}  // namespace qksub
