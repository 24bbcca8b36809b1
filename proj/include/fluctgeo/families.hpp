#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fluctgeo/numerics.hpp"
#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// Open interval of admissible values; endpoints may be infinite.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    bool contains_open(double x) const { return x > lo && x < hi; }
    bool contains_closed(double x) const { return x >= lo && x <= hi; }
    bool bounded_below() const { return lo != -kInf; }
    bool bounded_above() const { return hi != kInf; }
};

/// Density, differential force and response of a one-dimensional family at
/// one point: force = -d/dx log(rho), response = d/dx force.
struct FamilyEval {
    double density = 0.0;
    double force = 0.0;
    double response = 0.0;
};

/// A one-dimensional continuous distribution dp = rho(x) dx on an open
/// interval, with log-density derivatives available analytically or by
/// central finite differences. Immutable value; cheap to copy.
class Family1D {
public:
    class Model;

    explicit Family1D(std::shared_ptr<const Model> m) : model_(std::move(m)) {}

    const std::string& name() const;
    const Interval& support() const;

    double density(double x) const;
    double log_density(double x) const;
    double force(double x) const;     // -d/dx log rho
    double response(double x) const;  // d/dx force

    bool has_cdf() const;
    /// Cumulative probability below x. Analytic when the model provides it,
    /// otherwise tail-anchored adaptive quadrature of the density.
    double cdf(double x) const;

    /// Upper-tail probability with full relative accuracy (1 - cdf loses it).
    double survival(double x) const;

    bool has_quantile() const;
    /// Inverse of cdf on (0,1). Analytic when available, otherwise monotone
    /// root finding on cdf.
    double quantile(double u) const;

    /// Interior points where the density is not differentiable (excluded
    /// from theorem-verification grids).
    std::vector<double> non_smooth_points() const;

    const std::shared_ptr<const Model>& model() const { return model_; }

private:
    std::shared_ptr<const Model> model_;
};

class Family1D::Model {
public:
    virtual ~Model() = default;

    virtual const std::string& name() const = 0;
    virtual const Interval& support() const = 0;
    virtual double density(double x) const = 0;
    virtual double log_density(double x) const;
    virtual double force(double x) const;     // default: central FD of log_density
    virtual double response(double x) const;  // default: central FD of force
    virtual bool has_cdf() const { return false; }
    virtual double cdf(double) const;
    virtual double survival(double) const;
    virtual bool has_quantile() const { return false; }
    virtual double quantile(double) const;
    virtual std::vector<double> non_smooth_points() const { return {}; }
};

/// Evaluates density/force/response at an interior point.
/// Throws std::domain_error outside the open support.
FamilyEval evaluate(const Family1D& family, double x);

// -- corpus constructors ----------------------------------------------------

Family1D make_normal(double mu, double sigma);
Family1D make_uniform(double lo, double hi);
/// Triangle density (a - |x|)/a^2 on [-a, a]; apex at 0 is one-sided.
Family1D make_triangle(double a);

struct MixtureComponent {
    double weight;
    double mu;
    double sigma;
};
Family1D make_gaussian_mixture(std::vector<MixtureComponent> components);

/// Family from closures, for synthetic and test inputs. Missing derivative
/// or cdf closures fall back to finite differences / quadrature.
struct GenericFamilySpec {
    std::string name;
    Interval support;
    std::function<double(double)> density;                       // required
    std::function<double(double)> log_density;                   // optional
    std::function<double(double)> force;                         // optional
    std::function<double(double)> response;                      // optional
    std::function<double(double)> cdf;                           // optional
    std::function<double(double)> survival;                      // optional
    std::function<double(double)> quantile;                      // optional
    std::vector<double> non_smooth;
};
Family1D make_generic(GenericFamilySpec spec);

// -- exponential family -----------------------------------------------------

/// Parametric family exp[P(theta) - theta^a A_a(x) + B(x)] dx in natural
/// coordinates.
class ExponentialFamily {
public:
    struct Spec {
        std::string name;
        Interval support;
        int dim = 0;
        std::function<double(const Eigen::VectorXd&)> log_normalizer;  // P(theta)
        // optional analytic gradient of P; FD fallback otherwise
        std::function<Eigen::VectorXd(const Eigen::VectorXd&)> log_normalizer_gradient;
        std::vector<std::function<double(double)>> statistics;          // A_a
        std::vector<std::function<double(double)>> statistic_gradients; // dA_a/dx
        std::function<double(double)> carrier;                          // B(x)
        std::function<double(double)> carrier_gradient;                 // dB/dx
        std::function<bool(const Eigen::VectorXd&)> theta_valid;
    };

    explicit ExponentialFamily(Spec spec);

    const std::string& name() const { return spec_.name; }
    int dim() const { return spec_.dim; }
    const Interval& support() const { return spec_.support; }
    bool theta_valid(const Eigen::VectorXd& theta) const;

    double log_normalizer(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd log_normalizer_gradient(const Eigen::VectorXd& theta) const;
    double statistic(int a, double x) const { return spec_.statistics[a](x); }
    double statistic_gradient(int a, double x) const { return spec_.statistic_gradients[a](x); }
    double carrier(double x) const { return spec_.carrier ? spec_.carrier(x) : 0.0; }
    double carrier_gradient(double x) const {
        return spec_.carrier_gradient ? spec_.carrier_gradient(x) : 0.0;
    }

    /// The member distribution at fixed theta.
    Family1D at(const Eigen::VectorXd& theta) const;

private:
    Spec spec_;
};

/// Gaussian family in natural coordinates: statistics (x, x^2), no carrier,
/// closed-form log-normalizer. Valid for theta2 > 0.
ExponentialFamily gaussian_natural_family();

// -- product families ---------------------------------------------------------

/// Joint distribution factorized over independent one-dimensional families.
class ProductFamily {
public:
    explicit ProductFamily(std::vector<Family1D> factors);

    int dim() const { return static_cast<int>(factors_.size()); }
    const Family1D& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }
    const std::vector<Family1D>& factors() const { return factors_; }
    const std::string& name() const { return name_; }

    double density(const Eigen::VectorXd& x) const;
    double log_density(const Eigen::VectorXd& x) const;
    Eigen::VectorXd force(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd response(const Eigen::VectorXd& x) const;  // diagonal
    bool contains_open(const Eigen::VectorXd& x) const;

private:
    std::vector<Family1D> factors_;
    std::string name_;
};

// -- sampling -----------------------------------------------------------------

/// m i.i.d. outcomes plus the stream that generated them.
struct OutcomeSet {
    std::vector<double> outcomes;
    RngStream generator;

    int m() const { return static_cast<int>(outcomes.size()); }
};

struct OutcomeSetN {
    std::vector<Eigen::VectorXd> outcomes;
    RngStream generator;

    int m() const { return static_cast<int>(outcomes.size()); }
};

/// Inverse-cumulant sampling: u -> quantile(u). Deterministic per stream.
/// Throws std::invalid_argument for n < 1.
OutcomeSet sample(const Family1D& family, int n, RngStream rng);
OutcomeSetN sample(const ProductFamily& family, int n, RngStream rng);

// -- boundary validation --------------------------------------------------------

/// Density and density-derivative magnitudes approaching one side of the
/// support, probed at the 1e-6 / 1e-9 / 1e-12 quantile tails.
struct BoundarySide {
    std::array<double, 3> density_values{};
    std::array<double, 3> derivative_values{};
    bool density_vanishes = false;
    bool derivative_vanishes = false;
};

struct BoundaryCheck {
    BoundarySide left, right;
    bool conforming = false;

    VerificationReport to_report(const std::string& family_name) const;
};

/// Checks the decay of rho and d(rho)/dx toward both boundary points.
/// Violations are recorded, never thrown.
BoundaryCheck validate_boundary(const Family1D& family);

// -- reparametrization ------------------------------------------------------------

/// Strictly monotone differentiable coordinate change with explicit inverse.
struct Diffeo {
    std::string name;
    std::function<double(double)> forward;     // Theta(x)
    std::function<double(double)> derivative;  // dTheta/dx
    std::function<double(double)> inverse;     // x(Theta)
};

Diffeo affine_diffeo(double scale, double shift);
Diffeo probit_diffeo();  // Theta = Phi^{-1}(x) on (0,1)

/// Transformed family with density rho(Theta) = rho(x) |dTheta/dx|^{-1}.
/// Throws std::domain_error if the map is not strictly monotone with finite
/// nonzero derivative on the support.
Family1D reparametrize(const Family1D& family, const Diffeo& diffeo);

// -- expectation values -------------------------------------------------------------

/// <f> = integral of f * rho. Unbounded supports are truncated at the
/// spec's tail-quantile cutoff of the family itself when a quantile is
/// available, otherwise integrated by variable substitution.
QuadratureResult expectation(const Family1D& family, const std::function<double(double)>& f,
                             const QuadratureSpec& spec = {});

/// Iterated (tensorized) quadrature over the factors.
QuadratureResult expectation(const ProductFamily& family,
                             const std::function<double(const Eigen::VectorXd&)>& f,
                             const QuadratureSpec& spec = {});

}  // namespace fluctgeo
