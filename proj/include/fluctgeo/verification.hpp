#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace fluctgeo {

/// One verified identity: both sides, the worst residual, and the verdict.
/// `pass` is always residual <= tolerance. `applicable=false` marks checks
/// whose preconditions the input does not meet (recorded, not asserted);
/// `informational=true` marks diagnostics that never gate an exit status.
struct VerificationReport {
    std::string id;
    Eigen::MatrixXd lhs;
    Eigen::MatrixXd rhs;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool applicable = true;
    bool informational = false;
    bool quadrature_ok = true;
    std::string note;
};

/// Builds a report from both sides; residual is the max-abs difference.
VerificationReport make_report(std::string id, const Eigen::MatrixXd& lhs,
                               const Eigen::MatrixXd& rhs, double tolerance,
                               std::string note = {});

/// Scalar convenience overload.
VerificationReport make_report(std::string id, double lhs, double rhs, double tolerance,
                               std::string note = {});

struct ReportSummary {
    int total = 0;
    int passed = 0;
    double max_residual = 0.0;
};

/// Summary over applicable, non-informational entries.
ReportSummary summarize(const std::vector<VerificationReport>& reports);

}  // namespace fluctgeo
