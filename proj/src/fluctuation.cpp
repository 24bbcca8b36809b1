#include "fluctgeo/fluctuation.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace fluctgeo {

namespace {

// Uniform access to 1-D and product families for the quadrature loops.
struct FamilyView {
    int dim;
    std::string name;
    std::function<QuadratureResult(const std::function<double(const Eigen::VectorXd&)>&)> expect;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> force;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> response;
};

FamilyView view_of(const Family1D& f, const QuadratureSpec& spec) {
    return {1, f.name(),
            [f, spec](const std::function<double(const Eigen::VectorXd&)>& obs) {
                return expectation(
                    f, [&obs](double x) { return obs(Eigen::VectorXd::Constant(1, x)); }, spec);
            },
            [f](const Eigen::VectorXd& x) {
                return Eigen::VectorXd::Constant(1, f.force(x[0])).eval();
            },
            [f](const Eigen::VectorXd& x) {
                return Eigen::MatrixXd::Constant(1, 1, f.response(x[0])).eval();
            }};
}

FamilyView view_of(const ProductFamily& f, const QuadratureSpec& spec) {
    return {f.dim(), f.name(),
            [f, spec](const std::function<double(const Eigen::VectorXd&)>& obs) {
                return expectation(f, obs, spec);
            },
            [f](const Eigen::VectorXd& x) { return f.force(x); },
            [f](const Eigen::VectorXd& x) { return f.response(x); }};
}

MomentSet compute_moments_view(const FamilyView& v) {
    const int n = v.dim;
    MomentSet m;
    m.mean_point.resize(n);
    m.mean_force.resize(n);
    m.force_correlation.resize(n, n);
    m.covariance.resize(n, n);
    m.mean_response.resize(n, n);
    bool ok = true;
    auto expect = [&](const std::function<double(const Eigen::VectorXd&)>& f) {
        QuadratureResult r = v.expect(f);
        ok = ok && r.converged;
        return r.value;
    };
    for (int i = 0; i < n; ++i) {
        m.mean_point[i] = expect([&](const Eigen::VectorXd& x) { return x[i]; });
        m.mean_force[i] = expect([&](const Eigen::VectorXd& x) { return v.force(x)[i]; });
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double mij = expect([&](const Eigen::VectorXd& x) {
                Eigen::VectorXd e = v.force(x);
                return e[i] * e[j];
            });
            double cij = expect([&](const Eigen::VectorXd& x) {
                return (x[i] - m.mean_point[i]) * (x[j] - m.mean_point[j]);
            });
            double rij = expect([&](const Eigen::VectorXd& x) { return v.response(x)(i, j); });
            m.force_correlation(i, j) = m.force_correlation(j, i) = mij;
            m.covariance(i, j) = m.covariance(j, i) = cij;
            m.mean_response(i, j) = m.mean_response(j, i) = rij;
        }
    }
    m.quadrature_ok = ok;
    return m;
}

std::vector<VerificationReport> theorems_view(const FamilyView& v, const QuadratureSpec& spec,
                                              double tolerance) {
    MomentSet m = compute_moments_view(v);
    const int n = v.dim;

    std::vector<VerificationReport> out;
    out.push_back(make_report("mean_force_zero", m.mean_force,
                              Eigen::VectorXd::Zero(n), tolerance, v.name));

    Eigen::MatrixXd fp(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            QuadratureResult r = v.expect([&](const Eigen::VectorXd& x) {
                return v.force(x)[i] * (x[j] - m.mean_point[j]);
            });
            fp(i, j) = r.value;
            m.quadrature_ok = m.quadrature_ok && r.converged;
        }
    out.push_back(make_report("force_fluctuation", fp,
                              Eigen::MatrixXd::Identity(n, n), tolerance, v.name));

    out.push_back(make_report("response_correlation", m.mean_response, m.force_correlation,
                              tolerance, v.name));
    for (auto& r : out) r.quadrature_ok = m.quadrature_ok;
    (void)spec;
    return out;
}

UncertaintyReport uncertainty_view(const FamilyView& v) {
    MomentSet m = compute_moments_view(v);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(m.force_correlation);
    double lmin = ms.eigenvalues().minCoeff();
    double lmax = ms.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lmin > 1e-12 * std::max(1.0, lmax)))
        throw std::runtime_error("uncertainty_report: singular force correlation matrix for " +
                                 v.name);

    UncertaintyReport r;
    r.quadrature_ok = m.quadrature_ok;
    r.position_spread = m.covariance.diagonal().cwiseSqrt();
    r.force_spread = m.force_correlation.diagonal().cwiseSqrt();
    r.product = r.position_spread.cwiseProduct(r.force_spread);
    r.bound_gap = m.covariance - m.force_correlation.inverse();
    Eigen::MatrixXd sym = 0.5 * (r.bound_gap + r.bound_gap.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

}  // namespace

MomentSet compute_moments(const Family1D& family, const QuadratureSpec& spec) {
    return compute_moments_view(view_of(family, spec));
}

MomentSet compute_moments(const ProductFamily& family, const QuadratureSpec& spec) {
    return compute_moments_view(view_of(family, spec));
}

VerificationReport verify_identity(const Family1D& family, const Observable& obs,
                                   const QuadratureSpec& spec, double tolerance) {
    QuadratureResult lhs = expectation(family, obs.gradient, spec);
    QuadratureResult rhs = expectation(
        family, [&](double x) { return family.force(x) * obs.value(x); }, spec);
    VerificationReport r =
        make_report("identity[" + obs.name + "]", lhs.value, rhs.value, tolerance, family.name());
    r.quadrature_ok = lhs.converged && rhs.converged;
    return r;
}

VerificationReport verify_identity(const ProductFamily& family, const ObservableN& obs,
                                   const QuadratureSpec& spec, double tolerance) {
    const int n = family.dim();
    Eigen::VectorXd lhs(n), rhs(n);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
        QuadratureResult l = expectation(
            family, [&](const Eigen::VectorXd& x) { return obs.gradient(x)[i]; }, spec);
        QuadratureResult rr = expectation(
            family, [&](const Eigen::VectorXd& x) { return family.force(x)[i] * obs.value(x); },
            spec);
        lhs[i] = l.value;
        rhs[i] = rr.value;
        ok = ok && l.converged && rr.converged;
    }
    VerificationReport r =
        make_report("identity[" + obs.name + "]", lhs, rhs, tolerance, family.name());
    r.quadrature_ok = ok;
    return r;
}

std::vector<VerificationReport> verify_fluctuation_theorems(const Family1D& family,
                                                            const QuadratureSpec& spec,
                                                            double tolerance) {
    return theorems_view(view_of(family, spec), spec, tolerance);
}

std::vector<VerificationReport> verify_fluctuation_theorems(const ProductFamily& family,
                                                            const QuadratureSpec& spec,
                                                            double tolerance) {
    return theorems_view(view_of(family, spec), spec, tolerance);
}

UncertaintyReport uncertainty_report(const Family1D& family, const QuadratureSpec& spec) {
    return uncertainty_view(view_of(family, spec));
}

UncertaintyReport uncertainty_report(const ProductFamily& family, const QuadratureSpec& spec) {
    return uncertainty_view(view_of(family, spec));
}

}  // namespace fluctgeo
