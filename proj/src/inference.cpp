#include "fluctgeo/inference.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fluctgeo {

namespace {

double theta_step(double t) { return 1e-4 * (1.0 + std::abs(t)); }

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& rows) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(rows.front().size());
    for (const auto& r : rows) m += r;
    return m / static_cast<double>(rows.size());
}

}  // namespace

ParametricFamily::ParametricFamily(Spec spec) : spec_(std::move(spec)) {
    if (spec_.dim_theta < 1)
        throw std::invalid_argument("parametric family: dim_theta must be >= 1");
    if (!spec_.member) throw std::invalid_argument("parametric family: member map required");
}

bool ParametricFamily::theta_valid(const Eigen::VectorXd& theta) const {
    if (theta.size() != spec_.dim_theta) return false;
    return spec_.theta_valid ? spec_.theta_valid(theta) : true;
}

Family1D ParametricFamily::member(const Eigen::VectorXd& theta) const {
    if (!theta_valid(theta))
        throw std::domain_error(spec_.name + ": theta outside parameter domain");
    return spec_.member(theta);
}

Eigen::VectorXd ParametricFamily::score(double x, const Eigen::VectorXd& theta) const {
    if (spec_.score) return spec_.score(x, theta);
    Eigen::VectorXd s(spec_.dim_theta);
    for (int a = 0; a < spec_.dim_theta; ++a) {
        double h = theta_step(theta[a]);
        Eigen::VectorXd tp = theta, tm = theta;
        tp[a] += h;
        tm[a] -= h;
        s[a] = -(spec_.member(tp).log_density(x) - spec_.member(tm).log_density(x)) / (2.0 * h);
    }
    return s;
}

Eigen::VectorXd ParametricFamily::moment_estimate(const OutcomeSet& data) const {
    if (!spec_.moment_estimate)
        throw std::logic_error(spec_.name + ": no moment estimate available");
    return spec_.moment_estimate(data);
}

Eigen::VectorXd ParametricFamily::efficient_estimate(const OutcomeSet& data) const {
    if (!spec_.efficient_estimator)
        throw std::logic_error(spec_.name + ": no efficient estimator available");
    return spec_.efficient_estimator(data);
}

// -- builtin parametric families ------------------------------------------------

namespace {

Eigen::VectorXd normal_mle(const OutcomeSet& data) {
    double m = 0.0;
    for (double x : data.outcomes) m += x;
    m /= data.m();
    double v = 0.0;
    for (double x : data.outcomes) v += (x - m) * (x - m);
    v /= data.m();
    Eigen::VectorXd t(2);
    t << m, std::sqrt(v);
    return t;
}

}  // namespace

ParametricFamily parametric_normal() {
    ParametricFamily::Spec s;
    s.name = "normal(mu,sigma)";
    s.dim_theta = 2;
    s.member = [](const Eigen::VectorXd& t) { return make_normal(t[0], t[1]); };
    s.theta_valid = [](const Eigen::VectorXd& t) { return t.size() == 2 && t[1] > 0.0; };
    s.score = [](double x, const Eigen::VectorXd& t) {
        double z = (x - t[0]) / t[1];
        Eigen::VectorXd v(2);
        v[0] = -z / t[1];
        v[1] = -(z * z - 1.0) / t[1];
        return v;
    };
    s.moment_estimate = normal_mle;
    s.efficient_estimator = normal_mle;
    return ParametricFamily(std::move(s));
}

ParametricFamily parametric_normal_location(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("normal location: sigma must be positive");
    ParametricFamily::Spec s;
    std::ostringstream os;
    os << "normal(mu|sigma=" << sigma << ")";
    s.name = os.str();
    s.dim_theta = 1;
    s.member = [sigma](const Eigen::VectorXd& t) { return make_normal(t[0], sigma); };
    s.score = [sigma](double x, const Eigen::VectorXd& t) {
        return Eigen::VectorXd::Constant(1, -(x - t[0]) / (sigma * sigma)).eval();
    };
    auto mean_est = [](const OutcomeSet& data) {
        double m = 0.0;
        for (double x : data.outcomes) m += x;
        return Eigen::VectorXd::Constant(1, m / data.m()).eval();
    };
    s.moment_estimate = mean_est;
    s.efficient_estimator = mean_est;
    return ParametricFamily(std::move(s));
}

ParametricFamily parametric_expfam(const ExponentialFamily& ef) {
    ParametricFamily::Spec s;
    s.name = ef.name();
    s.dim_theta = ef.dim();
    s.member = [ef](const Eigen::VectorXd& t) { return ef.at(t); };
    s.theta_valid = [ef](const Eigen::VectorXd& t) { return ef.theta_valid(t); };
    // upsilon_a = -dP/dtheta_a + A_a(x)
    s.score = [ef](double x, const Eigen::VectorXd& t) {
        Eigen::VectorXd v = -ef.log_normalizer_gradient(t);
        for (int a = 0; a < ef.dim(); ++a) v[a] += ef.statistic(a, x);
        return v;
    };
    if (ef.name() == "gaussian-natural") {
        auto match = [](const OutcomeSet& data) {
            double m1 = 0.0, m2 = 0.0;
            for (double x : data.outcomes) {
                m1 += x;
                m2 += x * x;
            }
            m1 /= data.m();
            m2 /= data.m();
            double var = std::max(m2 - m1 * m1, 1e-12);
            Eigen::VectorXd t(2);
            t[1] = 1.0 / (2.0 * var);
            t[0] = -m1 / var;
            return t;
        };
        s.moment_estimate = match;
        s.efficient_estimator = match;
    }
    return ParametricFamily(std::move(s));
}

ParametricFamily parametric_uniform_location(double width) {
    if (!(width > 0.0)) throw std::invalid_argument("uniform location: width must be positive");
    ParametricFamily::Spec s;
    std::ostringstream os;
    os << "uniform-location(width=" << width << ")";
    s.name = os.str();
    s.dim_theta = 1;
    s.member = [width](const Eigen::VectorXd& t) { return make_uniform(t[0], t[0] + width); };
    s.regular_score = false;  // support depends on theta; no square-integrable score
    return ParametricFamily(std::move(s));
}

// -- likelihood ------------------------------------------------------------------

ScoreResult log_likelihood_and_score(const ParametricFamily& pf, const OutcomeSet& data,
                                     const Eigen::VectorXd& theta) {
    Family1D fam = pf.member(theta);
    ScoreResult res;
    res.score = Eigen::VectorXd::Zero(pf.dim_theta());
    for (double x : data.outcomes) {
        if (!fam.support().contains_open(x)) {
            std::ostringstream os;
            os << pf.name() << ": outcome " << x << " outside member support";
            throw std::domain_error(os.str());
        }
        res.log_likelihood += fam.log_density(x);
        res.score += pf.score(x, theta);
    }
    return res;
}

Eigen::MatrixXd fisher_matrix(const ParametricFamily& pf, const Eigen::VectorXd& theta,
                              const QuadratureSpec& spec) {
    if (!pf.regular_score())
        throw std::domain_error(pf.name() +
                                ": score is undefined at the support boundary; "
                                "Fisher matrix does not exist");
    Family1D fam = pf.member(theta);
    const int d = pf.dim_theta();
    Eigen::MatrixXd g(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            QuadratureResult r = expectation(
                fam,
                [&](double x) {
                    Eigen::VectorXd v = pf.score(x, theta);
                    return v[a] * v[b];
                },
                spec);
            if (!r.converged)
                throw std::runtime_error(pf.name() + ": Fisher matrix quadrature did not converge");
            g(a, b) = g(b, a) = r.value;
        }
    return g;
}

Eigen::MatrixXd fisher_from_score_gradient(const ParametricFamily& pf,
                                           const Eigen::VectorXd& theta,
                                           const QuadratureSpec& spec) {
    if (!pf.regular_score())
        throw std::domain_error(pf.name() + ": score is undefined at the support boundary");
    Family1D fam = pf.member(theta);
    const int d = pf.dim_theta();
    Eigen::MatrixXd g(d, d);
    for (int b = 0; b < d; ++b) {
        double h = theta_step(theta[b]);
        Eigen::VectorXd tp = theta, tm = theta, tp2 = theta, tm2 = theta;
        tp[b] += h;
        tm[b] -= h;
        tp2[b] += 2.0 * h;
        tm2[b] -= 2.0 * h;
        for (int a = 0; a < d; ++a) {
            QuadratureResult r = expectation(
                fam,
                [&](double x) {
                    return (pf.score(x, tm2)[a] - 8.0 * pf.score(x, tm)[a] +
                            8.0 * pf.score(x, tp)[a] - pf.score(x, tp2)[a]) /
                           (12.0 * h);
                },
                spec);
            g(a, b) = r.value;
        }
    }
    return (0.5 * (g + g.transpose())).eval();
}

// -- maximum likelihood --------------------------------------------------------------

namespace {

Eigen::MatrixXd loglik_hessian_fd(const ParametricFamily& pf, const OutcomeSet& data,
                                  const Eigen::VectorXd& theta) {
    const int d = pf.dim_theta();
    Eigen::MatrixXd h(d, d);
    for (int b = 0; b < d; ++b) {
        double hb = theta_step(theta[b]);
        Eigen::VectorXd tp = theta, tm = theta;
        tp[b] += hb;
        tm[b] -= hb;
        Eigen::VectorXd gp = -log_likelihood_and_score(pf, data, tp).score;
        Eigen::VectorXd gm = -log_likelihood_and_score(pf, data, tm).score;
        h.col(b) = (gp - gm) / (2.0 * hb);
    }
    return (0.5 * (h + h.transpose())).eval();
}

}  // namespace

MleResult mle_fit(const ParametricFamily& pf, const OutcomeSet& data, const MleOptions& opt) {
    if (data.m() < pf.dim_theta())
        throw std::invalid_argument(pf.name() + ": need at least dim(theta) outcomes");

    Eigen::VectorXd start = pf.has_moment_estimate()
                                ? pf.moment_estimate(data)
                                : Eigen::VectorXd::Ones(pf.dim_theta());

    MleResult best;
    for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
        Eigen::VectorXd theta = start;
        if (attempt > 0)
            theta += Eigen::VectorXd::Constant(pf.dim_theta(), 0.1 * attempt)
                         .cwiseProduct(theta.cwiseAbs() +
                                       Eigen::VectorXd::Ones(pf.dim_theta()));
        if (!pf.theta_valid(theta)) continue;

        MleResult res;
        double logL = log_likelihood_and_score(pf, data, theta).log_likelihood;
        for (int it = 0; it < opt.max_iterations; ++it) {
            res.iterations = it + 1;
            ScoreResult sr = log_likelihood_and_score(pf, data, theta);
            Eigen::VectorXd grad = -sr.score;  // d logL / d theta
            logL = sr.log_likelihood;
            if (grad.cwiseAbs().maxCoeff() < opt.gradient_tolerance * data.m()) {
                res.converged = true;
                break;
            }
            Eigen::MatrixXd hess = loglik_hessian_fd(pf, data, theta);
            Eigen::VectorXd dir = -hess.ldlt().solve(grad);
            if (!dir.allFinite() || dir.dot(grad) <= 0.0) dir = grad;  // ascent fallback

            double t = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
                Eigen::VectorXd cand = theta + t * dir;
                if (!pf.theta_valid(cand)) {
                    res.boundary_hit = true;
                    continue;
                }
                double cl = log_likelihood_and_score(pf, data, cand).log_likelihood;
                if (cl > logL + 1e-4 * t * grad.dot(dir) - 1e-14) {
                    theta = cand;
                    logL = cl;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        res.theta = theta;
        res.log_likelihood = logL;
        if (res.converged) {
            Eigen::MatrixXd neg_hess = -loglik_hessian_fd(pf, data, theta);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neg_hess);
            res.stable = es.eigenvalues().minCoeff() > 0.0;
            return res;
        }
        if (attempt == 0 || res.log_likelihood > best.log_likelihood) best = res;
    }
    return best;
}

// -- estimators -------------------------------------------------------------------------

EstimatorSpec sample_mean_estimator() {
    return {"sample_mean",
            [](const OutcomeSet& data) {
                double m = 0.0;
                for (double x : data.outcomes) m += x;
                return Eigen::VectorXd::Constant(1, m / data.m()).eval();
            },
            true};
}

EstimatorSpec sample_median_estimator() {
    return {"sample_median",
            [](const OutcomeSet& data) {
                std::vector<double> v = data.outcomes;
                std::sort(v.begin(), v.end());
                std::size_t n = v.size();
                double med = (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
                return Eigen::VectorXd::Constant(1, med).eval();
            },
            true};
}

EstimatorSpec mle_estimator(const ParametricFamily& pf) {
    return {"mle[" + pf.name() + "]",
            [pf](const OutcomeSet& data) { return mle_fit(pf, data).theta; }, false};
}

// -- Monte Carlo checks --------------------------------------------------------------------

InferenceCheckResult verify_inference_theorems(const ParametricFamily& pf,
                                               const Eigen::VectorXd& theta,
                                               const EstimatorSpec& est, int m, int trials,
                                               RngStream rng) {
    if (trials < 16) throw std::invalid_argument("verify_inference_theorems: too few trials");
    Family1D fam = pf.member(theta);
    const int d = pf.dim_theta();
    const int p = static_cast<int>(est.estimate(sample(fam, m, rng.substream(0))).size());

    std::vector<Eigen::VectorXd> scores, estimates;
    scores.reserve(static_cast<std::size_t>(trials));
    estimates.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        OutcomeSet data = sample(fam, m, rng.substream(static_cast<std::uint64_t>(t) + 1));
        scores.push_back(log_likelihood_and_score(pf, data, theta).score);
        estimates.push_back(est.estimate(data));
    }
    const double T = static_cast<double>(trials);

    InferenceCheckResult out;
    out.score_mean = mean_of(scores);
    out.score_se.resize(d);
    for (int a = 0; a < d; ++a) {
        double var = 0.0;
        for (const auto& s : scores) var += (s[a] - out.score_mean[a]) * (s[a] - out.score_mean[a]);
        var /= (T - 1.0);
        out.score_se[a] = std::sqrt(var / T);
    }

    Eigen::VectorXd est_mean = mean_of(estimates);
    out.estimator_score_cov.resize(p, d);
    Eigen::MatrixXd cov_se(p, d);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < d; ++b) {
            double acc = 0.0, acc2 = 0.0;
            for (int t = 0; t < trials; ++t) {
                double prod = (estimates[static_cast<std::size_t>(t)][a] - est_mean[a]) *
                              (scores[static_cast<std::size_t>(t)][b] - out.score_mean[b]);
                acc += prod;
                acc2 += prod * prod;
            }
            double mean_prod = acc / T;
            out.estimator_score_cov(a, b) = acc / (T - 1.0);
            double var_prod = std::max(acc2 / T - mean_prod * mean_prod, 0.0);
            cov_se(a, b) = std::sqrt(var_prod / T);
        }

    out.estimator_cov.resize(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = a; b < p; ++b) {
            double acc = 0.0;
            for (const auto& e : estimates) acc += (e[a] - est_mean[a]) * (e[b] - est_mean[b]);
            out.estimator_cov(a, b) = out.estimator_cov(b, a) = acc / (T - 1.0);
        }

    Eigen::MatrixXd g = fisher_matrix(pf, theta);
    out.cr_bound = g.inverse() / static_cast<double>(m);

    // score mean vanishes, in units of its standard error
    double r1 = 0.0;
    for (int a = 0; a < d; ++a) r1 = std::max(r1, std::abs(out.score_mean[a]) / out.score_se[a]);
    VerificationReport rep1 = make_report("score_mean_zero", r1, 0.0, 3.0);
    rep1.note = pf.name() + ": residual in standard-error units";
    out.reports.push_back(rep1);

    // <d theta-hat, upsilon> = -identity (square case only)
    if (p == d) {
        double r2 = 0.0;
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < d; ++b) {
                double target = (a == b) ? -1.0 : 0.0;
                double se = std::max(cov_se(a, b), 1e-300);
                r2 = std::max(r2, std::abs(out.estimator_score_cov(a, b) - target) / se);
            }
        VerificationReport rep2 = make_report("estimator_score_identity", r2, 0.0, 3.0);
        rep2.note = pf.name() + "/" + est.name + ": residual in standard-error units";
        rep2.applicable = est.unbiased;
        out.reports.push_back(rep2);
    }

    // covariance bound: Cov(theta-hat) - (m g)^{-1} >= 0 within band
    Eigen::MatrixXd gap = out.estimator_cov - out.cr_bound;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gap + gap.transpose()));
    double lmin = es.eigenvalues().minCoeff();
    double band = out.estimator_cov.diagonal().maxCoeff() * std::sqrt(2.0 / (T - 1.0));
    double r3 = std::max(0.0, -lmin) / band;
    VerificationReport rep3 = make_report("cramer_rao_bound", r3, 0.0, 3.0);
    rep3.note = pf.name() + "/" + est.name + ": negative part of smallest eigenvalue, band units";
    out.reports.push_back(rep3);

    if (est.unbiased && p == d) {
        double r4 = 0.0;
        for (int a = 0; a < p; ++a) {
            double se = std::sqrt(out.estimator_cov(a, a) / T);
            r4 = std::max(r4, std::abs(est_mean[a] - theta[a]) / se);
        }
        VerificationReport rep4 = make_report("estimator_unbiased", r4, 0.0, 3.0);
        rep4.note = est.name + ": bias in standard-error units";
        out.reports.push_back(rep4);
    }
    return out;
}

std::vector<VerificationReport> asymptotic_check(const ParametricFamily& pf,
                                                 const Eigen::VectorXd& theta, int m, int trials,
                                                 RngStream rng) {
    std::vector<VerificationReport> out;
    if (m < 1000) {
        VerificationReport r = make_report("asymptotic_covariance", 0.0, 0.0, 0.05);
        r.applicable = false;
        r.note = pf.name() + ": not applicable, asymptotic regime needs m >= 1000";
        out.push_back(r);
        return out;
    }
    if (!pf.has_efficient_estimator())
        throw std::logic_error(pf.name() + ": asymptotic check needs an efficient estimator");

    Family1D fam = pf.member(theta);
    const int d = pf.dim_theta();
    Eigen::MatrixXd g = fisher_matrix(pf, theta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    Eigen::MatrixXd sqrt_g = es.operatorSqrt();

    std::vector<Eigen::VectorXd> zs;
    zs.reserve(static_cast<std::size_t>(trials));
    const double scale = std::sqrt(static_cast<double>(m));
    for (int t = 0; t < trials; ++t) {
        OutcomeSet data = sample(fam, m, rng.substream(static_cast<std::uint64_t>(t)));
        Eigen::VectorXd est = pf.efficient_estimate(data);
        zs.push_back(scale * (sqrt_g * (est - theta)));
    }
    const double T = static_cast<double>(trials);
    Eigen::VectorXd mean = mean_of(zs);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& z : zs) cov += (z - mean) * (z - mean).transpose();
    cov /= (T - 1.0);

    double r1 = 0.0;
    for (int a = 0; a < d; ++a) {
        double se = std::sqrt(cov(a, a) / T);
        r1 = std::max(r1, std::abs(mean[a]) / se);
    }
    VerificationReport mrep = make_report("asymptotic_mean", r1, 0.0, 3.0);
    mrep.note = pf.name() + ": standardized mean in standard-error units";
    out.push_back(mrep);

    VerificationReport crep =
        make_report("asymptotic_covariance", cov, Eigen::MatrixXd::Identity(d, d), 0.05);
    crep.note = pf.name() + ": standardized covariance vs identity, m = " + std::to_string(m);
    out.push_back(crep);
    return out;
}

// -- Amari connections ------------------------------------------------------------------------

std::vector<Eigen::MatrixXd> amari_connection(const ExponentialFamily& ef,
                                              const Eigen::VectorXd& theta, double sigma,
                                              const QuadratureSpec& spec) {
    const int d = ef.dim();
    Family1D fam = ef.at(theta);
    auto score = [&](double x, const Eigen::VectorXd& t) {
        Eigen::VectorXd v = -ef.log_normalizer_gradient(t);
        for (int a = 0; a < d; ++a) v[a] += ef.statistic(a, x);
        return v;
    };
    // d upsilon_b / d theta_a by central differences
    auto dscore = [&](double x, int a, int b) {
        double h = theta_step(theta[a]);
        Eigen::VectorXd tp = theta, tm = theta;
        tp[a] += h;
        tm[a] -= h;
        return (score(x, tp)[b] - score(x, tm)[b]) / (2.0 * h);
    };

    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(d, d));
    const double cubic = 0.5 * (1.0 - sigma);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                QuadratureResult r = expectation(
                    fam,
                    [&](double x) {
                        Eigen::VectorXd v = score(x, theta);
                        return (dscore(x, a, b) - cubic * v[a] * v[b]) * v[c];
                    },
                    spec);
                gamma[static_cast<std::size_t>(c)](a, b) = r.value;
                gamma[static_cast<std::size_t>(c)](b, a) = r.value;
            }
    return gamma;
}

std::vector<Eigen::MatrixXd> fisher_metric_christoffels(const ExponentialFamily& ef,
                                                        const Eigen::VectorXd& theta) {
    const int d = ef.dim();
    // g_ab = -d^2 P, via central differences of the gradient of P
    auto metric_at = [&](const Eigen::VectorXd& t) {
        Eigen::MatrixXd g(d, d);
        for (int b = 0; b < d; ++b) {
            double h = theta_step(t[b]);
            Eigen::VectorXd tp = t, tm = t;
            tp[b] += h;
            tm[b] -= h;
            g.col(b) = -(ef.log_normalizer_gradient(tp) - ef.log_normalizer_gradient(tm)) /
                       (2.0 * h);
        }
        return (0.5 * (g + g.transpose())).eval();
    };

    std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
        double h = theta_step(theta[c]);
        Eigen::VectorXd tp = theta, tm = theta;
        tp[c] += h;
        tm[c] -= h;
        dg[static_cast<std::size_t>(c)] = (metric_at(tp) - metric_at(tm)) / (2.0 * h);
    }

    // first-kind Christoffels of the inference metric
    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(d, d));
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                gamma[static_cast<std::size_t>(c)](a, b) =
                    0.5 * (dg[static_cast<std::size_t>(a)](b, c) +
                           dg[static_cast<std::size_t>(b)](a, c) -
                           dg[static_cast<std::size_t>(c)](a, b));
    return gamma;
}

}  // namespace fluctgeo
