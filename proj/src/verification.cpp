#include "fluctgeo/verification.hpp"

#include <algorithm>

namespace fluctgeo {

VerificationReport make_report(std::string id, const Eigen::MatrixXd& lhs,
                               const Eigen::MatrixXd& rhs, double tolerance, std::string note) {
    VerificationReport r;
    r.id = std::move(id);
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual = (lhs - rhs).cwiseAbs().maxCoeff();
    r.tolerance = tolerance;
    r.pass = r.residual <= tolerance;
    r.note = std::move(note);
    return r;
}

VerificationReport make_report(std::string id, double lhs, double rhs, double tolerance,
                               std::string note) {
    Eigen::MatrixXd l(1, 1), r(1, 1);
    l(0, 0) = lhs;
    r(0, 0) = rhs;
    return make_report(std::move(id), l, r, tolerance, std::move(note));
}

ReportSummary summarize(const std::vector<VerificationReport>& reports) {
    ReportSummary s;
    for (const auto& r : reports) {
        if (!r.applicable || r.informational) continue;
        ++s.total;
        if (r.pass) ++s.passed;
        s.max_residual = std::max(s.max_residual, r.residual);
    }
    return s;
}

}  // namespace fluctgeo
