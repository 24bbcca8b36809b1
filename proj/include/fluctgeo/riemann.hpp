#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "fluctgeo/geometry1d.hpp"
#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// Dense rank-4 array of fixed small dimension.
class Tensor4 {
public:
    explicit Tensor4(int n) : n_(n), a_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

    double& operator()(int l, int i, int j, int k) { return a_[idx(l, i, j, k)]; }
    double operator()(int l, int i, int j, int k) const { return a_[idx(l, i, j, k)]; }
    int dim() const { return n_; }
    double max_abs() const;

private:
    std::size_t idx(int l, int i, int j, int k) const {
        return static_cast<std::size_t>(((l * n_ + i) * n_ + j) * n_ + k);
    }
    int n_;
    std::vector<double> a_;
};

/// Callable metric tensor with first and second derivative evaluators.
/// Derivatives are analytic for constructed geometries and central finite
/// differences for synthetic inputs.
struct MetricField {
    int dim = 0;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> components;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)> derivative;          // d_k g
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int, int)> second_derivative;
};

/// Wraps plain component closures with finite-difference derivatives
/// (first-derivative step h1*(1+|x|), second h2*(1+|x|)).
MetricField metric_from_components(int dim,
                                   std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> g,
                                   double h1 = 1e-5, double h2 = 1e-4);

/// Levi-Civita connection Gamma^k_ij = g^{km}(d_j g_im + d_i g_jm - d_m g_ij)/2,
/// returned as one matrix (i,j) per upper index k.
/// Throws std::runtime_error if the metric is singular at the point.
std::vector<Eigen::MatrixXd> christoffel(const MetricField& metric, const Eigen::VectorXd& x);

/// Curvature tensor R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
/// + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik, with Ricci contraction
/// and scalar curvature.
struct CurvatureResult {
    Tensor4 riemann;
    Eigen::MatrixXd ricci;
    double scalar = 0.0;
};
CurvatureResult curvature(const MetricField& metric, const Eigen::VectorXd& x);

// -- product geometries -------------------------------------------------------

/// External product of one-dimensional geometries: diagonal metric,
/// additive information potential, Euclidean distance in the joint chart.
class GeometryN {
public:
    explicit GeometryN(std::vector<Geometry1D> factors);

    int dim() const { return static_cast<int>(factors_.size()); }
    const Geometry1D& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }

    Eigen::VectorXd chart(const Eigen::VectorXd& x) const;
    Eigen::VectorXd inverse_chart(const Eigen::VectorXd& s) const;
    Eigen::VectorXd mode() const;
    double potential(const Eigen::VectorXd& x) const;
    double distance(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const;
    double partition() const { return 1.0; }
    double gaussian_potential() const { return 0.0; }
    Eigen::MatrixXd metric_components(const Eigen::VectorXd& x) const;
    double density(const Eigen::VectorXd& x) const;
    ProductFamily family() const;
    bool contains_open(const Eigen::VectorXd& x) const;

private:
    std::vector<Geometry1D> factors_;
};

GeometryN product_geometry(std::vector<Geometry1D> factors);

/// Metric fields of constructed geometries carry analytic derivatives.
MetricField metric_field(const Geometry1D& geom);
MetricField metric_field(const GeometryN& geom);

// -- gradiental field ----------------------------------------------------------

/// Covariant/contravariant gradient of the information potential, its norm,
/// the unit field away from the mode, and the restituting force.
struct GradientalField {
    Eigen::VectorXd covariant;      // psi_i = -d_i S
    Eigen::VectorXd contravariant;  // psi^i
    Eigen::VectorXd unit;           // psi^i / |psi| (zero at the mode)
    Eigen::VectorXd restituting;    // -psi_i
    double norm_squared = 0.0;
};

GradientalField gradiental(const Geometry1D& geom, double x);
GradientalField gradiental(const GeometryN& geom, const Eigen::VectorXd& x);

// -- covariant residual checks ----------------------------------------------------

struct CovariantCheckOptions {
    double s_lo = -4.0;
    double s_hi = 4.0;
    int points_per_dim = 81;
    double tolerance = 1e-6;         // scale-normalized residuals
    double radius_tolerance = 1e-9;  // |psi| versus distance-to-mode
};

/// Residual grids for: (a) metric + covariant Hessian of the potential,
/// (b) the covariant second-order PDE linking the metric to log rho,
/// (c) the decomposition S - P + psi^2/2 = 0, and (d) |psi| equal to the
/// distance to the mode. All derivative inputs are finite differences of
/// pointwise-evaluated quantities; residuals (a)-(c) are normalized by
/// max(1, |lhs|, |rhs|).
std::vector<VerificationReport> covariant_checks(const Geometry1D& geom,
                                                 const CovariantCheckOptions& opt = {});
std::vector<VerificationReport> covariant_checks(const GeometryN& geom,
                                                 const CovariantCheckOptions& opt = {});

// -- geodesics ----------------------------------------------------------------------

struct GeodesicState {
    double t = 0.0;                 // affine (arc-length) parameter
    Eigen::VectorXd point;
    Eigen::VectorXd velocity;
    double potential = 0.0;         // S at the point
    double dissipation = 0.0;       // Phi = dS/dt along the curve
    double affine_norm = 1.0;       // g_ij v^i v^j before renormalization
};

struct Trajectory {
    std::vector<GeodesicState> states;
    bool truncated = false;          // hit the support boundary early
    double max_affine_drift = 0.0;   // max |affine_norm - 1| seen
    double length = 0.0;             // arc length actually covered

    const GeodesicState& front() const { return states.front(); }
    const GeodesicState& back() const { return states.back(); }
};

struct GeodesicOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double initial_step = 1e-3;
    double sample_every = 0.0;  // 0: record every accepted step
};

/// Integrates the geodesic equation from `start` in unit direction
/// `direction` (normalized under the metric) for arc length `length`.
Trajectory geodesic_integrate(const Geometry1D& geom, double start, int direction, double length,
                              const GeodesicOptions& opt = {});
Trajectory geodesic_integrate(const GeometryN& geom, const Eigen::VectorXd& start,
                              const Eigen::VectorXd& direction, double length,
                              const GeodesicOptions& opt = {});

/// Gradient-flow relaxation dI/ds = -unit(I): the geodesic toward the mode.
/// Starting at the mode returns a zero-length trajectory.
Trajectory hydrodynamic_relax(const Geometry1D& geom, double start,
                              const GeodesicOptions& opt = {});
Trajectory hydrodynamic_relax(const GeometryN& geom, const Eigen::VectorXd& start,
                              const GeodesicOptions& opt = {});

// -- density reconstruction ------------------------------------------------------------

/// Exact reconstruction rho = (1/Z) exp(-dist^2/2) sqrt(|g|/(2 pi)^n).
double reconstruct_density(const Geometry1D& geom, double x);
double reconstruct_density(const GeometryN& geom, const Eigen::VectorXd& x);

/// Local gaussian approximation about the mode (reported for comparison,
/// exact only for gaussian families).
double gaussian_approx_density(const Geometry1D& geom, double x);
double gaussian_approx_density(const GeometryN& geom, const Eigen::VectorXd& x);

}  // namespace fluctgeo
