#include "fluctgeo/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fluctgeo {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
// |s| beyond this carries < 1e-15 mass and Phi(s) saturates in doubles
constexpr double kChartCut = 8.0;
}

double discrete_entropy(const std::vector<double>& p) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::domain_error("discrete_entropy: negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::domain_error("discrete_entropy: probabilities must sum to 1");
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

namespace {

void require_contained(const Interval& inner, const Interval& outer, const std::string& what) {
    if (inner.lo < outer.lo - 1e-12 || inner.hi > outer.hi + 1e-12)
        throw std::domain_error(what + ": support must lie within the geometry's manifold");
}

// -log gamma(x) with gamma = sqrt(g/2pi) = rho * exp(s^2/2)
double neg_log_invariant_measure(const Geometry1D& geom, double x) {
    double s = geom.chart(x);
    return -(geom.family().log_density(x) + 0.5 * s * s);
}

double xlogx(double v) { return (v > 0.0) ? v * std::log(v) : 0.0; }

}  // namespace

EntropyReport differential_entropies(const Family1D& q, const Geometry1D& geom,
                                     const QuadratureSpec& spec) {
    require_contained(q.support(), geom.support(), "differential_entropies");
    EntropyReport rep;
    rep.chart_tag = q.name();
    bool ok = true;

    QuadratureResult naive = expectation(
        q, [&q](double x) { return -q.log_density(x); }, spec);
    rep.naive = naive.value;
    ok = ok && naive.converged;

    QuadratureResult jaynes = expectation(
        q,
        [&](double x) { return -(q.log_density(x) + neg_log_invariant_measure(geom, x)); },
        spec);
    rep.jaynes = jaynes.value;
    ok = ok && jaynes.converged;

    // Geometric entropy in the chart coordinate: q_g = (q/rho) e^{-s^2/2},
    // dmu = ds/sqrt(2pi).
    double s_lo = std::max(-kChartCut, geom.chart(std::max(q.support().lo, geom.support().lo)));
    double s_hi = std::min(kChartCut, geom.chart(std::min(q.support().hi, geom.support().hi)));
    auto integrand = [&](double s) {
        double x = geom.inverse_chart(s);
        if (!q.support().contains_open(x)) return 0.0;
        double lqg = q.log_density(x) - geom.family().log_density(x) - 0.5 * s * s;
        return -xlogx(std::exp(lqg));
    };
    QuadratureResult geo = integrate(integrand, s_lo, s_hi, spec);
    rep.geometric = geo.value / std::sqrt(2.0 * M_PI);
    ok = ok && geo.converged;

    rep.quadrature_ok = ok;
    return rep;
}

EntropyReport differential_entropies(const ProductFamily& q, const GeometryN& geom,
                                     const QuadratureSpec& spec) {
    if (q.dim() != geom.dim())
        throw std::domain_error("differential_entropies: dimension mismatch");
    for (int i = 0; i < q.dim(); ++i)
        require_contained(q.factor(i).support(), geom.factor(i).support(),
                          "differential_entropies");
    EntropyReport rep;
    rep.chart_tag = q.name();
    bool ok = true;

    QuadratureResult naive = expectation(
        q, [&q](const Eigen::VectorXd& x) { return -q.log_density(x); }, spec);
    rep.naive = naive.value;
    ok = ok && naive.converged;

    auto neg_log_gamma = [&](const Eigen::VectorXd& x) {
        double acc = 0.0;
        for (int i = 0; i < geom.dim(); ++i) acc += neg_log_invariant_measure(geom.factor(i), x[i]);
        return acc;
    };
    QuadratureResult jaynes = expectation(
        q, [&](const Eigen::VectorXd& x) { return -(q.log_density(x) + neg_log_gamma(x)); },
        spec);
    rep.jaynes = jaynes.value;
    ok = ok && jaynes.converged;

    // Iterated chart-coordinate quadrature for the geometric entropy.
    const int n = q.dim();
    std::vector<std::pair<double, double>> bounds;
    for (int i = 0; i < n; ++i) {
        const Interval& qs = q.factor(i).support();
        const Geometry1D& f = geom.factor(i);
        bounds.emplace_back(std::max(-kChartCut, f.chart(std::max(qs.lo, f.support().lo))),
                            std::min(kChartCut, f.chart(std::min(qs.hi, f.support().hi))));
    }
    Eigen::VectorXd svec(n);
    std::function<double(int)> level = [&](int k) -> double {
        auto f = [&](double s) {
            svec[k] = s;
            if (k + 1 < n) return level(k + 1);
            Eigen::VectorXd x(n);
            double lqg = 0.0;
            for (int i = 0; i < n; ++i) {
                x[i] = geom.factor(i).inverse_chart(svec[i]);
                lqg -= geom.factor(i).family().log_density(x[i]) + 0.5 * svec[i] * svec[i];
            }
            if (!q.contains_open(x)) return 0.0;
            lqg += q.log_density(x);
            return -xlogx(std::exp(lqg));
        };
        QuadratureResult r = integrate(f, bounds[static_cast<std::size_t>(k)].first,
                                       bounds[static_cast<std::size_t>(k)].second, spec);
        ok = ok && r.converged;
        return r.value;
    };
    rep.geometric = level(0) * std::pow(2.0 * M_PI, -0.5 * n);

    rep.quadrature_ok = ok;
    return rep;
}

KlResult kl_divergence(const Family1D& q, const Family1D& p, const QuadratureSpec& spec) {
    KlResult res;
    // q positive where p vanishes: divergence is +infinity by convention.
    if (q.support().lo < p.support().lo - 1e-12 || q.support().hi > p.support().hi + 1e-12) {
        res.infinite = true;
        res.value = kInf;
        return res;
    }
    QuadratureResult r = expectation(
        q, [&](double x) { return q.log_density(x) - p.log_density(x); }, spec);
    res.value = r.value;
    res.quadrature_ok = r.converged;
    return res;
}

double intrinsic_entropy(const Geometry1D& geom, const QuadratureSpec& spec) {
    const double mode = geom.mode();
    QuadratureResult r = expectation(
        geom.family(),
        [&](double x) {
            double d = geom.distance(x, mode);
            return 0.5 * d * d;
        },
        spec);
    return r.value - geom.gaussian_potential();
}

double intrinsic_entropy(const GeometryN& geom, const QuadratureSpec& spec) {
    const Eigen::VectorXd mode = geom.mode();
    QuadratureResult r = expectation(
        geom.family(),
        [&](const Eigen::VectorXd& x) {
            double d = geom.distance(x, mode);
            return 0.5 * d * d;
        },
        spec);
    return r.value - geom.gaussian_potential();
}

InvarianceReport invariance_check(const Family1D& q, const Geometry1D& geom, const Diffeo& diffeo,
                                  const QuadratureSpec& spec, double tolerance) {
    EntropyReport base = differential_entropies(q, geom, spec);

    Family1D q_new = reparametrize(q, diffeo);
    Geometry1D geom_new = Geometry1D::build(reparametrize(geom.family(), diffeo));
    EntropyReport moved = differential_entropies(q_new, geom_new, spec);

    QuadratureResult jac = expectation(
        q, [&](double x) { return std::log(std::abs(diffeo.derivative(x))); }, spec);

    InvarianceReport rep;
    rep.geometric_shift = moved.geometric - base.geometric;
    rep.naive_shift = moved.naive - base.naive;
    rep.expected_naive_shift = jac.value;
    rep.geometric = make_report("entropy_geometric_invariance", moved.geometric, base.geometric,
                                tolerance, q.name() + " under " + diffeo.name);
    rep.naive = make_report("entropy_naive_jacobian_shift", rep.naive_shift,
                            rep.expected_naive_shift, tolerance, q.name() + " under " + diffeo.name);
    return rep;
}

}  // namespace fluctgeo
