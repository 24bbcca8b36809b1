#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "fluctgeo/families.hpp"
#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// Quadrature moments of a family: means, self-correlations of the
/// stochastic variables and of the differential forces, mean response.
struct MomentSet {
    Eigen::VectorXd mean_point;          // <I>
    Eigen::VectorXd mean_force;          // <eta>
    Eigen::MatrixXd force_correlation;   // M_ij = <eta_i eta_j>
    Eigen::MatrixXd covariance;          // C^ij = <dI^i dI^j> about <I>
    Eigen::MatrixXd mean_response;       // <chi_ij>
    bool quadrature_ok = true;
};

MomentSet compute_moments(const Family1D& family, const QuadratureSpec& spec = {});
MomentSet compute_moments(const ProductFamily& family, const QuadratureSpec& spec = {});

/// Differentiable observable with analytic gradient.
struct Observable {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> gradient;
};

struct ObservableN {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// Checks <dA/dI_i> = <eta_i A> component-wise by quadrature of both sides.
VerificationReport verify_identity(const Family1D& family, const Observable& obs,
                                   const QuadratureSpec& spec = {}, double tolerance = 1e-8);
VerificationReport verify_identity(const ProductFamily& family, const ObservableN& obs,
                                   const QuadratureSpec& spec = {}, double tolerance = 1e-8);

/// The three theorem checks: <eta_i> = 0, <eta_i dI^j> = delta_i^j,
/// <chi_ij> = <eta_i eta_j>.
std::vector<VerificationReport> verify_fluctuation_theorems(const Family1D& family,
                                                            const QuadratureSpec& spec = {},
                                                            double tolerance = 1e-8);
std::vector<VerificationReport> verify_fluctuation_theorems(const ProductFamily& family,
                                                            const QuadratureSpec& spec = {},
                                                            double tolerance = 1e-8);

/// Spread products and the matrix bound C - M^{-1}.
/// Throws std::runtime_error when the force correlation matrix is singular.
struct UncertaintyReport {
    Eigen::VectorXd position_spread;  // sqrt(C_ii)
    Eigen::VectorXd force_spread;     // sqrt(M_ii)
    Eigen::VectorXd product;          // position_spread[i] * force_spread[i]
    Eigen::MatrixXd bound_gap;        // C - M^{-1}
    double min_eigenvalue = 0.0;      // of the symmetrized bound gap
    bool quadrature_ok = true;
};

UncertaintyReport uncertainty_report(const Family1D& family, const QuadratureSpec& spec = {});
UncertaintyReport uncertainty_report(const ProductFamily& family, const QuadratureSpec& spec = {});

}  // namespace fluctgeo
