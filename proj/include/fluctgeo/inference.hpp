#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fluctgeo/families.hpp"
#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// A family with free control parameters, for likelihood inference.
/// The per-outcome score is upsilon_a(x|theta) = -d/dtheta_a log rho(x|theta).
class ParametricFamily {
public:
    struct Spec {
        std::string name;
        int dim_theta = 0;
        std::function<Family1D(const Eigen::VectorXd&)> member;
        std::function<bool(const Eigen::VectorXd&)> theta_valid;
        /// Analytic per-outcome score; finite differences in theta otherwise.
        std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> score;
        /// Starting point for the likelihood ascent.
        std::function<Eigen::VectorXd(const OutcomeSet&)> moment_estimate;
        /// Closed-form efficient estimator when one exists.
        std::function<Eigen::VectorXd(const OutcomeSet&)> efficient_estimator;
        /// False when the score is undefined (support moves with theta).
        bool regular_score = true;
    };

    explicit ParametricFamily(Spec spec);

    const std::string& name() const { return spec_.name; }
    int dim_theta() const { return spec_.dim_theta; }
    bool regular_score() const { return spec_.regular_score; }
    bool theta_valid(const Eigen::VectorXd& theta) const;
    Family1D member(const Eigen::VectorXd& theta) const;

    /// Per-outcome score, analytic or central FD with step 1e-4*(1+|theta|).
    Eigen::VectorXd score(double x, const Eigen::VectorXd& theta) const;

    bool has_moment_estimate() const { return static_cast<bool>(spec_.moment_estimate); }
    Eigen::VectorXd moment_estimate(const OutcomeSet& data) const;
    bool has_efficient_estimator() const { return static_cast<bool>(spec_.efficient_estimator); }
    Eigen::VectorXd efficient_estimate(const OutcomeSet& data) const;

private:
    Spec spec_;
};

ParametricFamily parametric_normal();                          // theta = (mu, sigma)
ParametricFamily parametric_normal_location(double sigma);     // theta = (mu)
ParametricFamily parametric_expfam(const ExponentialFamily&);  // natural coordinates
/// Uniform on [theta, theta+width]: the score does not exist; fisher_matrix
/// rejects it.
ParametricFamily parametric_uniform_location(double width);

// -- likelihood ---------------------------------------------------------------

struct ScoreResult {
    double log_likelihood = 0.0;
    Eigen::VectorXd score;  // additive over outcomes
};

/// Throws std::domain_error when an outcome falls outside the member support.
ScoreResult log_likelihood_and_score(const ParametricFamily& pf, const OutcomeSet& data,
                                     const Eigen::VectorXd& theta);

/// Per-outcome Fisher matrix <upsilon_a upsilon_b> by quadrature. The
/// m-outcome matrix is m times this. Throws std::domain_error for families
/// without a regular score.
Eigen::MatrixXd fisher_matrix(const ParametricFamily& pf, const Eigen::VectorXd& theta,
                              const QuadratureSpec& spec = {});

/// <d upsilon_a / d theta_b> by quadrature; equals the Fisher matrix.
Eigen::MatrixXd fisher_from_score_gradient(const ParametricFamily& pf,
                                           const Eigen::VectorXd& theta,
                                           const QuadratureSpec& spec = {});

// -- maximum likelihood ---------------------------------------------------------

struct MleOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;  // times m
    int restarts = 3;
};

struct MleResult {
    Eigen::VectorXd theta;
    bool converged = false;
    bool stable = false;        // FD Hessian of -logL positive definite
    bool boundary_hit = false;  // ascent kept leaving the parameter domain
    int iterations = 0;
    double log_likelihood = 0.0;
};

/// Newton ascent on the log-likelihood with backtracking line search,
/// started from the moment estimate (restarted from perturbed starts on
/// failure).
MleResult mle_fit(const ParametricFamily& pf, const OutcomeSet& data, const MleOptions& opt = {});

// -- estimators ---------------------------------------------------------------------

struct EstimatorSpec {
    std::string name;
    std::function<Eigen::VectorXd(const OutcomeSet&)> estimate;
    bool unbiased = true;
};

EstimatorSpec sample_mean_estimator();
EstimatorSpec sample_median_estimator();
EstimatorSpec mle_estimator(const ParametricFamily& pf);

// -- Monte Carlo theorem checks -----------------------------------------------------

struct InferenceCheckResult {
    std::vector<VerificationReport> reports;
    Eigen::VectorXd score_mean;          // over trials
    Eigen::VectorXd score_se;            // standard error per component
    Eigen::MatrixXd estimator_score_cov; // <d theta-hat upsilon>
    Eigen::MatrixXd estimator_cov;       // Cov(theta-hat)
    Eigen::MatrixXd cr_bound;            // (m g)^{-1}
};

/// Monte Carlo over `trials` outcome sets of size m: vanishing mean score,
/// estimator-score correlation equal to minus the identity, and the
/// covariance bound Cov(theta-hat) >= (m g)^{-1}. Stochastic assertions use
/// 3-sigma bands from trial-level variances (reports carry normalized
/// residuals with tolerance 3).
InferenceCheckResult verify_inference_theorems(const ParametricFamily& pf,
                                               const Eigen::VectorXd& theta,
                                               const EstimatorSpec& est, int m, int trials,
                                               RngStream rng);

/// Standardized deviations sqrt(m) g^{1/2} (theta-hat - theta) of the
/// efficient estimator: mean within 3-sigma of zero and covariance within
/// 5% of the identity. Marked not-applicable for m < 1000.
std::vector<VerificationReport> asymptotic_check(const ParametricFamily& pf,
                                                 const Eigen::VectorXd& theta, int m, int trials,
                                                 RngStream rng);

// -- Amari connections -----------------------------------------------------------------

/// One-parameter family of affine connections on the parameter manifold,
/// evaluated per outcome by quadrature; returned as one matrix (alpha,beta)
/// per lowered third index gamma.
std::vector<Eigen::MatrixXd> amari_connection(const ExponentialFamily& ef,
                                              const Eigen::VectorXd& theta, double sigma,
                                              const QuadratureSpec& spec = {});

/// First-kind Levi-Civita Christoffels of the inference metric
/// g_ab = -d^2 P by finite differences of the gradient of P.
std::vector<Eigen::MatrixXd> fisher_metric_christoffels(const ExponentialFamily& ef,
                                                        const Eigen::VectorXd& theta);

}  // namespace fluctgeo
