#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// One CLI invocation. Exit statuses of run():
///   0  every executed check passed
///   1  at least one check failed (report still written)
///   2  configuration or parse error
///   3  numerical non-convergence
struct RunConfig {
    enum class Command { verify, geometry, geodesic, entropy, figure, inference };

    Command command = Command::verify;
    std::string family;          // inline JSON or "builtin:<name>"
    std::string suite = "all";   // fluctuation|uncertainty|covariant|reconstruction|
                                 // geodesic|entropy|all
    double tol = 0.0;            // 0 keeps the per-suite defaults
    std::string grid = "s:201";  // "lo:hi:n" in the variable, or "s:n" chart-uniform
    std::uint64_t seed = 20240817;
    std::string out;             // output path; empty writes beside the command name
    std::string format = "json"; // json|csv where a choice exists
    int m = 100;
    int trials = 10000;
    std::string from = "1.0";       // start point; comma-separated for products
    std::string direction = "1.0";  // initial direction; comma-separated for products
    double length = 1.0;
    int figure_id = 1;
    std::string estimator = "mean";  // mean|median|mle|moment
};

int run(const RunConfig& config);

/// The reports produced by `verify` for one family/suite, exposed for tests.
std::vector<VerificationReport> run_verify_suite(const std::string& family_spec,
                                                 const std::string& suite, double tol,
                                                 std::uint64_t seed);

}  // namespace fluctgeo
