#include "fluctgeo/riemann.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fluctgeo {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double Tensor4::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

// -- metric fields -------------------------------------------------------------

MetricField metric_from_components(int dim,
                                   std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> g,
                                   double h1, double h2) {
    MetricField m;
    m.dim = dim;
    m.components = g;
    m.derivative = [g, h1](const Eigen::VectorXd& x, int k) {
        double h = h1 * (1.0 + std::abs(x[k]));
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        return ((g(xp) - g(xm)) / (2.0 * h)).eval();
    };
    m.second_derivative = [g, h2](const Eigen::VectorXd& x, int k, int l) {
        if (k == l) {
            double h = h2 * (1.0 + std::abs(x[k]));
            Eigen::VectorXd xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            return ((g(xp) - 2.0 * g(x) + g(xm)) / (h * h)).eval();
        }
        double hk = h2 * (1.0 + std::abs(x[k]));
        double hl = h2 * (1.0 + std::abs(x[l]));
        Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[k] += hk;
        xpp[l] += hl;
        xpm[k] += hk;
        xpm[l] -= hl;
        xmp[k] -= hk;
        xmp[l] += hl;
        xmm[k] -= hk;
        xmm[l] -= hl;
        return ((g(xpp) - g(xpm) - g(xmp) + g(xmm)) / (4.0 * hk * hl)).eval();
    };
    return m;
}

namespace {

Eigen::MatrixXd inverse_metric(const Eigen::MatrixXd& g) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible()) throw std::runtime_error("metric is singular at the point");
    return lu.inverse();
}

}  // namespace

std::vector<Eigen::MatrixXd> christoffel(const MetricField& metric, const Eigen::VectorXd& x) {
    const int n = metric.dim;
    Eigen::MatrixXd ginv = inverse_metric(metric.components(x));
    std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) dg[static_cast<std::size_t>(k)] = metric.derivative(x, k);

    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(n),
                                       Eigen::MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int m = 0; m < n; ++m)
                    acc += ginv(k, m) * (dg[static_cast<std::size_t>(j)](i, m) +
                                         dg[static_cast<std::size_t>(i)](j, m) -
                                         dg[static_cast<std::size_t>(m)](i, j));
                gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
            }
    return gamma;
}

CurvatureResult curvature(const MetricField& metric, const Eigen::VectorXd& x) {
    const int n = metric.dim;
    Eigen::MatrixXd g = metric.components(x);
    Eigen::MatrixXd ginv = inverse_metric(g);
    std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) dg[static_cast<std::size_t>(k)] = metric.derivative(x, k);
    // d2g[k][l] = d_k d_l g
    std::vector<std::vector<Eigen::MatrixXd>> d2g(
        static_cast<std::size_t>(n), std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n)));
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
            Eigen::MatrixXd m = metric.second_derivative(x, k, l);
            d2g[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = m;
            d2g[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = m;
        }

    std::vector<Eigen::MatrixXd> gamma = christoffel(metric, x);

    // d_i g^{lm} = -(ginv dg_i ginv)^{lm}
    std::vector<Eigen::MatrixXd> dginv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        dginv[static_cast<std::size_t>(i)] =
            (-ginv * dg[static_cast<std::size_t>(i)] * ginv).eval();

    // dGamma[i][l](j,k) = d_i Gamma^l_jk
    auto half_sum = [&](int m, int j, int k) {
        return dg[static_cast<std::size_t>(j)](k, m) + dg[static_cast<std::size_t>(k)](j, m) -
               dg[static_cast<std::size_t>(m)](j, k);
    };
    auto d_half_sum = [&](int i, int m, int j, int k) {
        const auto& dij = d2g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const auto& dik = d2g[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        const auto& dim = d2g[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
        return dij(k, m) + dik(j, m) - dim(j, k);
    };
    Tensor4 dGamma(n);  // (i, l, j, k)
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double acc = 0.0;
                    for (int m = 0; m < n; ++m)
                        acc += dginv[static_cast<std::size_t>(i)](l, m) * half_sum(m, j, k) +
                               ginv(l, m) * d_half_sum(i, m, j, k);
                    dGamma(i, l, j, k) = 0.5 * acc;
                }

    CurvatureResult res{Tensor4(n), Eigen::MatrixXd::Zero(n, n), 0.0};
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double v = dGamma(i, l, j, k) - dGamma(j, l, i, k);
                    for (int m = 0; m < n; ++m)
                        v += gamma[static_cast<std::size_t>(l)](i, m) *
                                 gamma[static_cast<std::size_t>(m)](j, k) -
                             gamma[static_cast<std::size_t>(l)](j, m) *
                                 gamma[static_cast<std::size_t>(m)](i, k);
                    res.riemann(l, i, j, k) = v;
                }

    // Ricci_{bd} = sum_a R^a_{a d b} in this index layout; scalar = g^{bd} Ricci_{bd}.
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a) acc += res.riemann(a, a, d, b);
            res.ricci(b, d) = acc;
        }
    res.scalar = (ginv * res.ricci).trace();
    return res;
}

// -- product geometry -----------------------------------------------------------

GeometryN::GeometryN(std::vector<Geometry1D> factors) : factors_(std::move(factors)) {
    if (factors_.size() < 2)
        throw std::invalid_argument("product geometry: needs at least two factors");
}

GeometryN product_geometry(std::vector<Geometry1D> factors) {
    return GeometryN(std::move(factors));
}

Eigen::VectorXd GeometryN::chart(const Eigen::VectorXd& x) const {
    Eigen::VectorXd s(dim());
    for (int i = 0; i < dim(); ++i) s[i] = factor(i).chart(x[i]);
    return s;
}

Eigen::VectorXd GeometryN::inverse_chart(const Eigen::VectorXd& s) const {
    Eigen::VectorXd x(dim());
    for (int i = 0; i < dim(); ++i) x[i] = factor(i).inverse_chart(s[i]);
    return x;
}

Eigen::VectorXd GeometryN::mode() const {
    Eigen::VectorXd m(dim());
    for (int i = 0; i < dim(); ++i) m[i] = factor(i).mode();
    return m;
}

double GeometryN::potential(const Eigen::VectorXd& x) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += factor(i).potential(x[i]);
    return s;
}

double GeometryN::distance(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const {
    double acc = 0.0;
    for (int i = 0; i < dim(); ++i) {
        double d = factor(i).chart(x1[i]) - factor(i).chart(x2[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

Eigen::MatrixXd GeometryN::metric_components(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) g(i, i) = factor(i).eval(x[i]).metric;
    return g;
}

double GeometryN::density(const Eigen::VectorXd& x) const {
    double r = 1.0;
    for (int i = 0; i < dim(); ++i) r *= factor(i).family().density(x[i]);
    return r;
}

ProductFamily GeometryN::family() const {
    std::vector<Family1D> fams;
    fams.reserve(factors_.size());
    for (const auto& f : factors_) fams.push_back(f.family());
    return ProductFamily(std::move(fams));
}

bool GeometryN::contains_open(const Eigen::VectorXd& x) const {
    for (int i = 0; i < dim(); ++i)
        if (!factor(i).support().contains_open(x[i])) return false;
    return true;
}

namespace {

// Analytic derivatives of the constructed metric g = (ds/dx)^2:
//   dg/dx   = 2 g u            with u = s s' - eta
//   d2g/dx2 = 4 g u^2 + 2 g (s'^2 + s s' u - chi)
struct Metric1DDerivs {
    double g, dg, d2g;
};

Metric1DDerivs metric_derivs(const Geometry1D& geom, double x) {
    double s = geom.chart(x);
    double sd = geom.chart_derivative(x);
    double eta = geom.family().force(x);
    double chi = geom.family().response(x);
    double g = sd * sd;
    double u = s * sd - eta;
    double dg = 2.0 * g * u;
    double d2g = 4.0 * g * u * u + 2.0 * g * (sd * sd + s * sd * u - chi);
    return {g, dg, d2g};
}

}  // namespace

MetricField metric_field(const Geometry1D& geom) {
    MetricField m;
    m.dim = 1;
    m.components = [geom](const Eigen::VectorXd& x) {
        return Eigen::MatrixXd::Constant(1, 1, metric_derivs(geom, x[0]).g).eval();
    };
    m.derivative = [geom](const Eigen::VectorXd& x, int) {
        return Eigen::MatrixXd::Constant(1, 1, metric_derivs(geom, x[0]).dg).eval();
    };
    m.second_derivative = [geom](const Eigen::VectorXd& x, int, int) {
        return Eigen::MatrixXd::Constant(1, 1, metric_derivs(geom, x[0]).d2g).eval();
    };
    return m;
}

MetricField metric_field(const GeometryN& geom) {
    const int n = geom.dim();
    MetricField m;
    m.dim = n;
    m.components = [geom](const Eigen::VectorXd& x) { return geom.metric_components(x); };
    m.derivative = [geom, n](const Eigen::VectorXd& x, int k) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        d(k, k) = metric_derivs(geom.factor(k), x[k]).dg;
        return d;
    };
    m.second_derivative = [geom, n](const Eigen::VectorXd& x, int k, int l) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        if (k == l) d(k, k) = metric_derivs(geom.factor(k), x[k]).d2g;
        return d;
    };
    return m;
}

// -- gradiental field ---------------------------------------------------------------

GradientalField gradiental(const Geometry1D& geom, double x) {
    GradientalField f;
    double s = geom.chart(x);
    double sd = geom.chart_derivative(x);
    f.covariant = Eigen::VectorXd::Constant(1, s * sd);  // psi_1 = -dS/dx
    double g = sd * sd;
    f.contravariant = f.covariant / g;
    f.norm_squared = f.covariant[0] * f.contravariant[0];
    double norm = std::sqrt(f.norm_squared);
    f.unit = (norm > 0.0) ? (f.contravariant / norm).eval() : Eigen::VectorXd::Zero(1).eval();
    f.restituting = -f.covariant;
    return f;
}

GradientalField gradiental(const GeometryN& geom, const Eigen::VectorXd& x) {
    const int n = geom.dim();
    GradientalField f;
    f.covariant.resize(n);
    f.contravariant.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = geom.factor(i).chart(x[i]);
        double sd = geom.factor(i).chart_derivative(x[i]);
        f.covariant[i] = s * sd;
        f.contravariant[i] = s / sd;
    }
    f.norm_squared = f.covariant.dot(f.contravariant);
    double norm = std::sqrt(f.norm_squared);
    f.unit = (norm > 0.0) ? (f.contravariant / norm).eval() : Eigen::VectorXd::Zero(n).eval();
    f.restituting = -f.covariant;
    return f;
}

// -- covariant residual checks ----------------------------------------------------------

namespace {

double scale_norm(double lhs, double rhs) {
    return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

// Step adapted to the local chart scale, clamped away from the support
// boundary and non-smooth points.
double stencil_step(const Geometry1D& geom, double x) {
    double s = geom.chart(x);
    double sd = geom.chart_derivative(x);
    double h = std::min(1e-4 * (1.0 + std::abs(x)),
                        1e-4 * (1.0 + std::abs(s)) / std::max(sd, 1.0));
    const Interval& sup = geom.support();
    if (sup.bounded_below()) h = std::min(h, 0.25 * (x - sup.lo));
    if (sup.bounded_above()) h = std::min(h, 0.25 * (sup.hi - x));
    for (double b : geom.family().non_smooth_points()) {
        double d = std::abs(x - b);
        if (d > 0.0) h = std::min(h, 0.25 * d);
    }
    return h;
}

// Derivative weights at 0 for five distinct nodes (Lagrange differentiation).
// Nodes are the exactly-representable offsets (x + h) - x, which removes the
// position-rounding jitter that plain equispaced formulas amplify by ds/dx.
struct Stencil5 {
    std::array<double, 5> t{};  // node offsets
    std::array<double, 5> v{};  // values at x + t[k]

    double d1() const {
        double acc = 0.0;
        for (int k = 0; k < 5; ++k) {
            double denom = 1.0, num = 0.0;
            for (int j = 0; j < 5; ++j)
                if (j != k) denom *= t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(j)];
            for (int m = 0; m < 5; ++m) {
                if (m == k) continue;
                double prod = 1.0;
                for (int j = 0; j < 5; ++j)
                    if (j != k && j != m) prod *= -t[static_cast<std::size_t>(j)];
                num += prod;
            }
            acc += v[static_cast<std::size_t>(k)] * num / denom;
        }
        return acc;
    }

    double d2() const {
        double acc = 0.0;
        for (int k = 0; k < 5; ++k) {
            double denom = 1.0, num = 0.0;
            for (int j = 0; j < 5; ++j)
                if (j != k) denom *= t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(j)];
            for (int m = 0; m < 5; ++m) {
                if (m == k) continue;
                for (int l = m + 1; l < 5; ++l) {
                    if (l == k) continue;
                    double prod = 1.0;
                    for (int j = 0; j < 5; ++j)
                        if (j != k && j != m && j != l) prod *= -t[static_cast<std::size_t>(j)];
                    num += prod;
                }
            }
            acc += v[static_cast<std::size_t>(k)] * 2.0 * num / denom;
        }
        return acc;
    }
};

std::vector<double> exact_offsets(double x, double h) {
    std::vector<double> offs{-2.0 * h, -h, 0.0, h, 2.0 * h};
    for (double& o : offs) {
        double xk = x + o;
        o = xk - x;  // exact by construction for nearby doubles
    }
    return offs;
}

}  // namespace

std::vector<VerificationReport> covariant_checks(const Geometry1D& geom,
                                                 const CovariantCheckOptions& opt) {
    const Family1D& fam = geom.family();
    double ra = 0.0, rb = 0.0, rc = 0.0, rd = 0.0;
    const double s_mode = geom.chart(geom.mode());

    for (double x : geom.chart_uniform_grid(opt.s_lo, opt.s_hi, opt.points_per_dim)) {
        const double h = stencil_step(geom, x);
        const std::vector<double> offs = exact_offsets(x, h);
        std::vector<double> svals = geom.chart_at_offsets(x, offs);

        Stencil5 S, L, G;
        for (int k = 0; k < 5; ++k) {
            double off = offs[static_cast<std::size_t>(k)];
            double lr = fam.log_density(x + off);
            double s = svals[static_cast<std::size_t>(k)];
            S.t[static_cast<std::size_t>(k)] = off;
            L.t[static_cast<std::size_t>(k)] = off;
            G.t[static_cast<std::size_t>(k)] = off;
            S.v[static_cast<std::size_t>(k)] = -0.5 * s * s;
            L.v[static_cast<std::size_t>(k)] = lr;
            G.v[static_cast<std::size_t>(k)] = std::exp(kLog2Pi + 2.0 * lr + s * s);
        }
        const double g0 = G.v[2], S0 = S.v[2];
        const double Sp = S.d1(), Spp = S.d2();
        const double Lp = L.d1(), Lpp = L.d2();
        const double Gp = G.d1(), Gpp = G.d2();

        // finer stencil for the first-derivative radius check
        const std::vector<double> foffs = exact_offsets(x, h / 8.0);
        std::vector<double> sfine = geom.chart_at_offsets(x, foffs);
        Stencil5 Sf;
        for (int k = 0; k < 5; ++k) {
            double s = sfine[static_cast<std::size_t>(k)];
            Sf.t[static_cast<std::size_t>(k)] = foffs[static_cast<std::size_t>(k)];
            Sf.v[static_cast<std::size_t>(k)] = -0.5 * s * s;
        }
        const double Sp_fine = Sf.d1();

        const double Gam = Gp / (2.0 * g0);
        const double Gamp = Gpp / (2.0 * g0) - 2.0 * Gam * Gam;

        // (a) metric equals the negative covariant Hessian of S
        const double hess = Spp - Gam * Sp;
        ra = std::max(ra, scale_norm(g0, -hess));

        // (b) covariant PDE in terms of log rho
        const double rhs = -Lpp + Gam * Lp + Gamp - Gam * Gam;
        rb = std::max(rb, scale_norm(g0, rhs));

        // (c) gaussian decomposition S = P - psi^2/2 with P = 0
        const double psi2 = Sp * Sp / g0;
        rc = std::max(rc, scale_norm(S0, -0.5 * psi2));

        // (d) |psi| equals the distance to the mode
        const double psi = std::abs(Sp_fine) / std::sqrt(g0);
        rd = std::max(rd, std::abs(psi - std::abs(svals[2] - s_mode)));
    }

    std::vector<VerificationReport> out;
    auto push = [&](const char* id, double resid, double tol, const char* note) {
        VerificationReport r = make_report(id, resid, 0.0, tol);
        r.note = fam.name() + std::string(": ") + note;
        out.push_back(std::move(r));
    };
    push("covariant_hessian", ra, opt.tolerance, "max scale-normalized residual over chart grid");
    push("covariant_pde", rb, opt.tolerance, "max scale-normalized residual over chart grid");
    push("gaussian_decomposition", rc, opt.tolerance,
         "max scale-normalized residual over chart grid");
    push("gradient_norm_radius", rd, opt.radius_tolerance, "max absolute residual over chart grid");
    return out;
}

std::vector<VerificationReport> covariant_checks(const GeometryN& geom,
                                                 const CovariantCheckOptions& opt) {
    const int n = geom.dim();
    double ra = 0.0, rb = 0.0, rc = 0.0, rd = 0.0;
    const Eigen::VectorXd mode = geom.mode();

    // Tensor grid from per-factor chart grids.
    std::vector<std::vector<double>> axes;
    for (int i = 0; i < n; ++i)
        axes.push_back(geom.factor(i).chart_uniform_grid(opt.s_lo, opt.s_hi, opt.points_per_dim));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);

    auto S_of = [&](const Eigen::VectorXd& x) { return geom.potential(x); };
    auto L_of = [&](const Eigen::VectorXd& x) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += geom.factor(i).family().log_density(x[i]);
        return acc;
    };
    auto G_of = [&](const Eigen::VectorXd& x) { return geom.metric_components(x); };

    bool done = false;
    while (!done) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i)
            x[i] = axes[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                idx[static_cast<std::size_t>(i)])];

        Eigen::VectorXd h(n);
        for (int i = 0; i < n; ++i) h[i] = stencil_step(geom.factor(i), x[i]);

        // First and second derivatives of S, log rho, g by central stencils.
        Eigen::VectorXd Sp(n), Lp(n);
        Eigen::MatrixXd Spp(n, n), Lpp(n, n);
        std::vector<Eigen::MatrixXd> Gp(static_cast<std::size_t>(n));
        std::vector<std::vector<Eigen::MatrixXd>> Gpp(
            static_cast<std::size_t>(n),
            std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n)));
        const double S0 = S_of(x);
        const Eigen::MatrixXd g0 = G_of(x);
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXd xp = x, xm = x, xp2 = x, xm2 = x;
            xp[k] += h[k];
            xm[k] -= h[k];
            xp2[k] += 2.0 * h[k];
            xm2[k] -= 2.0 * h[k];
            auto d1 = [&](const auto& f) {
                return (f(xm2) - 8.0 * f(xm) + 8.0 * f(xp) - f(xp2)) / (12.0 * h[k]);
            };
            auto d2 = [&](const auto& f, double f0) {
                return (-f(xm2) + 16.0 * f(xm) - 30.0 * f0 + 16.0 * f(xp) - f(xp2)) /
                       (12.0 * h[k] * h[k]);
            };
            Sp[k] = d1(S_of);
            Lp[k] = d1(L_of);
            Spp(k, k) = d2(S_of, S0);
            Lpp(k, k) = d2(L_of, L_of(x));
            Gp[static_cast<std::size_t>(k)] =
                ((G_of(xm2) - 8.0 * G_of(xm) + 8.0 * G_of(xp) - G_of(xp2)) / (12.0 * h[k]))
                    .eval();
            Gpp[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] =
                ((-G_of(xm2) + 16.0 * G_of(xm) - 30.0 * g0 + 16.0 * G_of(xp) - G_of(xp2)) /
                 (12.0 * h[k] * h[k]))
                    .eval();
        }
        for (int k = 0; k < n; ++k)
            for (int l = k + 1; l < n; ++l) {
                Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
                xpp[k] += h[k];
                xpp[l] += h[l];
                xpm[k] += h[k];
                xpm[l] -= h[l];
                xmp[k] -= h[k];
                xmp[l] += h[l];
                xmm[k] -= h[k];
                xmm[l] -= h[l];
                double denom = 4.0 * h[k] * h[l];
                Spp(k, l) = Spp(l, k) =
                    (S_of(xpp) - S_of(xpm) - S_of(xmp) + S_of(xmm)) / denom;
                Lpp(k, l) = Lpp(l, k) =
                    (L_of(xpp) - L_of(xpm) - L_of(xmp) + L_of(xmm)) / denom;
                Eigen::MatrixXd gkl = (G_of(xpp) - G_of(xpm) - G_of(xmp) + G_of(xmm)) / denom;
                Gpp[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = gkl;
                Gpp[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = gkl;
            }

        Eigen::MatrixXd ginv = inverse_metric(g0);
        // Christoffels from the FD metric derivatives
        std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(n),
                                           Eigen::MatrixXd::Zero(n, n));
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (int m = 0; m < n; ++m)
                        acc += ginv(k, m) * (Gp[static_cast<std::size_t>(j)](i, m) +
                                             Gp[static_cast<std::size_t>(i)](j, m) -
                                             Gp[static_cast<std::size_t>(m)](i, j));
                    gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
                }

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double gsum = 0.0, gsum_l = 0.0;
                for (int k = 0; k < n; ++k) {
                    gsum += gamma[static_cast<std::size_t>(k)](i, j) * Sp[k];
                    gsum_l += gamma[static_cast<std::size_t>(k)](i, j) * Lp[k];
                }
                double hess = Spp(i, j) - gsum;
                ra = std::max(ra, scale_norm(g0(i, j), -hess));

                // d_i Gamma^k_jk = tr(-ginv dg_i ginv dg_j + ginv d2g_ij)/2
                double dtrace =
                    0.5 * ((-ginv * Gp[static_cast<std::size_t>(i)] * ginv *
                                Gp[static_cast<std::size_t>(j)] +
                            ginv * Gpp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                               .trace());
                double contr = 0.0;  // Gamma^k_ij Gamma^l_kl
                for (int k = 0; k < n; ++k) {
                    double tr_k = 0.5 * (ginv * Gp[static_cast<std::size_t>(k)]).trace();
                    contr += gamma[static_cast<std::size_t>(k)](i, j) * tr_k;
                }
                double rhs = -Lpp(i, j) + gsum_l + dtrace - contr;
                rb = std::max(rb, scale_norm(g0(i, j), rhs));
            }

        double psi2 = Sp.dot(ginv * Sp);
        rc = std::max(rc, scale_norm(S0, -0.5 * psi2));

        // finer gradient stencil for the radius identity
        Eigen::VectorXd Spf(n);
        for (int k = 0; k < n; ++k) {
            double hf = h[k] / 8.0;
            Eigen::VectorXd xp = x, xm = x, xp2 = x, xm2 = x;
            xp[k] += hf;
            xm[k] -= hf;
            xp2[k] += 2.0 * hf;
            xm2[k] -= 2.0 * hf;
            Spf[k] = (S_of(xm2) - 8.0 * S_of(xm) + 8.0 * S_of(xp) - S_of(xp2)) / (12.0 * hf);
        }
        double psi_fine = std::sqrt(Spf.dot(ginv * Spf));
        rd = std::max(rd, std::abs(psi_fine - geom.distance(x, mode)));

        for (int i = 0; i < n; ++i) {
            if (++idx[static_cast<std::size_t>(i)] <
                static_cast<int>(axes[static_cast<std::size_t>(i)].size()))
                break;
            idx[static_cast<std::size_t>(i)] = 0;
            if (i == n - 1) done = true;
        }
    }

    std::vector<VerificationReport> out;
    auto push = [&](const char* id, double resid, double tol) {
        VerificationReport r = make_report(id, resid, 0.0, tol);
        r.note = "product geometry, dim " + std::to_string(n);
        out.push_back(std::move(r));
    };
    push("covariant_hessian", ra, opt.tolerance);
    push("covariant_pde", rb, opt.tolerance);
    push("gaussian_decomposition", rc, opt.tolerance);
    push("gradient_norm_radius", rd, opt.radius_tolerance);
    return out;
}

// -- ODE integration -----------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) adaptive step.
struct OdeResult {
    Eigen::VectorXd y;
    double t;
    bool step_limit_hit = false;
};

template <class Rhs, class Observer>
OdeResult integrate_ode(const Rhs& rhs, Eigen::VectorXd y, double t0, double t1,
                        const GeodesicOptions& opt, const Observer& on_step) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                        e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    double t = t0;
    double h = std::min(opt.initial_step, t1 - t0);
    int steps = 0;
    const int max_steps = 2000000;
    while (t < t1 && steps < max_steps) {
        h = std::min(h, t1 - t);
        Eigen::VectorXd k1 = rhs(t, y);
        Eigen::VectorXd k2 = rhs(t + c2 * h, y + h * a21 * k1);
        Eigen::VectorXd k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        Eigen::VectorXd k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Eigen::VectorXd k5 =
            rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Eigen::VectorXd k6 =
            rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Eigen::VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Eigen::VectorXd k7 = rhs(t + h, y5);
        Eigen::VectorXd y4 =
            y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
        }
        if (err <= 1.0) {
            t += h;
            y = y5;
            if (!on_step(t, y)) break;  // observer may modify nothing; false stops
        }
        double factor =
            std::isfinite(err) ? ((err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0) : 0.2;
        h *= std::clamp(factor, 0.2, 5.0);
        ++steps;
    }
    return {y, t, steps >= max_steps};
}

}  // namespace

// -- geodesics --------------------------------------------------------------------------

namespace {

struct GeoContext {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> acceleration;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> metric;
    std::function<double(const Eigen::VectorXd&)> potential;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_potential;  // dS/dx
    std::function<bool(const Eigen::VectorXd&)> interior;
    int dim;
};

GeoContext context_of(const Geometry1D& geom) {
    GeoContext c;
    c.dim = 1;
    c.acceleration = [geom](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
        double s = geom.chart(x[0]);
        double sd = geom.chart_derivative(x[0]);
        double gam = s * sd - geom.family().force(x[0]);  // Gamma^1_11
        return Eigen::VectorXd::Constant(1, -gam * v[0] * v[0]).eval();
    };
    c.metric = [geom](const Eigen::VectorXd& x) {
        double sd = geom.chart_derivative(x[0]);
        return Eigen::MatrixXd::Constant(1, 1, sd * sd).eval();
    };
    c.potential = [geom](const Eigen::VectorXd& x) { return geom.potential(x[0]); };
    c.grad_potential = [geom](const Eigen::VectorXd& x) {
        double s = geom.chart(x[0]);
        double sd = geom.chart_derivative(x[0]);
        return Eigen::VectorXd::Constant(1, -s * sd).eval();
    };
    c.interior = [geom](const Eigen::VectorXd& x) {
        return geom.support().contains_open(x[0]);
    };
    return c;
}

GeoContext context_of(const GeometryN& geom) {
    GeoContext c;
    const int n = geom.dim();
    c.dim = n;
    c.acceleration = [geom, n](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) {
            double s = geom.factor(i).chart(x[i]);
            double sd = geom.factor(i).chart_derivative(x[i]);
            double gam = s * sd - geom.factor(i).family().force(x[i]);
            a[i] = -gam * v[i] * v[i];
        }
        return a;
    };
    c.metric = [geom](const Eigen::VectorXd& x) { return geom.metric_components(x); };
    c.potential = [geom](const Eigen::VectorXd& x) { return geom.potential(x); };
    c.grad_potential = [geom, n](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) {
            double s = geom.factor(i).chart(x[i]);
            double sd = geom.factor(i).chart_derivative(x[i]);
            g[i] = -s * sd;
        }
        return g;
    };
    c.interior = [geom](const Eigen::VectorXd& x) { return geom.contains_open(x); };
    return c;
}

GeodesicState make_state(const GeoContext& c, double t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& v, double affine_norm) {
    GeodesicState st;
    st.t = t;
    st.point = x;
    st.velocity = v;
    st.potential = c.potential(x);
    st.dissipation = v.dot(c.grad_potential(x));  // Phi = dS/dt
    st.affine_norm = affine_norm;
    return st;
}

Trajectory integrate_geodesic(const GeoContext& c, Eigen::VectorXd x0, Eigen::VectorXd dir,
                              double length, const GeodesicOptions& opt) {
    if (!(length >= 0.0)) throw std::invalid_argument("geodesic: length must be nonnegative");
    if (!c.interior(x0)) throw std::domain_error("geodesic: start outside open support");

    Eigen::MatrixXd g0 = c.metric(x0);
    double nrm = std::sqrt(dir.dot(g0 * dir));
    if (!(nrm > 0.0)) throw std::invalid_argument("geodesic: zero direction");
    Eigen::VectorXd v0 = dir / nrm;

    Trajectory traj;
    traj.states.push_back(make_state(c, 0.0, x0, v0, 1.0));
    if (length == 0.0) return traj;

    const int n = c.dim;
    Eigen::VectorXd y(2 * n);
    y.head(n) = x0;
    y.tail(n) = v0;

    auto rhs = [&](double, const Eigen::VectorXd& s) {
        Eigen::VectorXd d(2 * n);
        Eigen::VectorXd x = s.head(n), v = s.tail(n);
        d.head(n) = v;
        d.tail(n) = c.acceleration(x, v);
        return d;
    };

    double next_sample = (opt.sample_every > 0.0) ? opt.sample_every : 0.0;
    bool truncated = false;
    double t_reached = 0.0;

    auto step_once = [&](double target) {
        OdeResult r = integrate_ode(rhs, y, t_reached, target, opt,
                                    [&](double, const Eigen::VectorXd&) { return true; });
        y = r.y;
        bool advanced = r.t > t_reached;
        t_reached = r.t;
        return advanced && !r.step_limit_hit;
    };

    while (t_reached < length) {
        double target = (opt.sample_every > 0.0)
                            ? std::min(length, next_sample)
                            : length;
        if (target <= t_reached) target = length;
        if (!step_once(target)) {
            truncated = true;
            break;
        }

        Eigen::VectorXd x = y.head(n), v = y.tail(n);
        if (!c.interior(x)) {
            truncated = true;
            break;
        }
        double norm2 = v.dot(c.metric(x) * v);
        traj.max_affine_drift = std::max(traj.max_affine_drift, std::abs(norm2 - 1.0));
        v /= std::sqrt(norm2);  // re-impose unit affine parametrization
        y.tail(n) = v;
        traj.states.push_back(make_state(c, t_reached, x, v, norm2));
        if (opt.sample_every > 0.0) next_sample += opt.sample_every;
        if (t_reached >= length) break;
    }
    traj.truncated = truncated;
    traj.length = t_reached;
    return traj;
}

Trajectory integrate_relax(const GeoContext& c,
                           const std::function<GradientalField(const Eigen::VectorXd&)>& grad,
                           Eigen::VectorXd x0, double initial_distance,
                           const GeodesicOptions& opt) {
    Trajectory traj;
    Eigen::VectorXd u0 = grad(x0).unit;
    traj.states.push_back(make_state(c, 0.0, x0, (-u0).eval(), 1.0));
    if (initial_distance == 0.0) return traj;  // already at the mode

    const double t1 = initial_distance * (1.0 - 1e-12);
    auto rhs = [&](double, const Eigen::VectorXd& x) { return (-grad(x).unit).eval(); };

    Eigen::VectorXd y = x0;
    double t_reached = 0.0;
    double sample = (opt.sample_every > 0.0) ? opt.sample_every : t1;
    while (t_reached < t1) {
        double target = std::min(t1, t_reached + sample);
        OdeResult r = integrate_ode(rhs, y, t_reached, target, opt,
                                    [&](double, const Eigen::VectorXd&) { return true; });
        y = r.y;
        t_reached = r.t;
        traj.states.push_back(make_state(c, t_reached, y, (-grad(y).unit).eval(), 1.0));
        if (r.step_limit_hit) break;
    }
    traj.length = t_reached;
    return traj;
}

}  // namespace

Trajectory geodesic_integrate(const Geometry1D& geom, double start, int direction, double length,
                              const GeodesicOptions& opt) {
    GeoContext c = context_of(geom);
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, start);
    Eigen::VectorXd dir = Eigen::VectorXd::Constant(1, direction >= 0 ? 1.0 : -1.0);
    return integrate_geodesic(c, x0, dir, length, opt);
}

Trajectory geodesic_integrate(const GeometryN& geom, const Eigen::VectorXd& start,
                              const Eigen::VectorXd& direction, double length,
                              const GeodesicOptions& opt) {
    return integrate_geodesic(context_of(geom), start, direction, length, opt);
}

Trajectory hydrodynamic_relax(const Geometry1D& geom, double start, const GeodesicOptions& opt) {
    if (!geom.support().contains_open(start))
        throw std::domain_error("hydrodynamic_relax: start outside open support");
    GeoContext c = context_of(geom);
    double d0 = geom.distance(start, geom.mode());
    return integrate_relax(
        c, [geom](const Eigen::VectorXd& x) { return gradiental(geom, x[0]); },
        Eigen::VectorXd::Constant(1, start), d0, opt);
}

Trajectory hydrodynamic_relax(const GeometryN& geom, const Eigen::VectorXd& start,
                              const GeodesicOptions& opt) {
    if (!geom.contains_open(start))
        throw std::domain_error("hydrodynamic_relax: start outside open support");
    GeoContext c = context_of(geom);
    double d0 = geom.distance(start, geom.mode());
    return integrate_relax(c, [geom](const Eigen::VectorXd& x) { return gradiental(geom, x); },
                           start, d0, opt);
}

// -- density reconstruction ------------------------------------------------------------------

double reconstruct_density(const Geometry1D& geom, double x) {
    GeomPoint g = geom.eval(x);
    double dist = std::abs(g.chart - geom.chart(geom.mode()));
    // (1/Z) exp(-dist^2/2) sqrt(g/2pi), assembled in log space
    return std::exp(-0.5 * dist * dist + 0.5 * (g.log_metric - kLog2Pi));
}

double reconstruct_density(const GeometryN& geom, const Eigen::VectorXd& x) {
    double log_vol = 0.0;
    for (int i = 0; i < geom.dim(); ++i) {
        GeomPoint g = geom.factor(i).eval(x[i]);
        log_vol += 0.5 * (g.log_metric - kLog2Pi);
    }
    double dist = geom.distance(x, geom.mode());
    return std::exp(-0.5 * dist * dist + log_vol);
}

double gaussian_approx_density(const Geometry1D& geom, double x) {
    double mode = geom.mode();
    double gm = geom.eval(mode).metric;
    double dx = x - mode;
    return std::sqrt(gm / (2.0 * M_PI)) * std::exp(-0.5 * gm * dx * dx);
}

double gaussian_approx_density(const GeometryN& geom, const Eigen::VectorXd& x) {
    Eigen::VectorXd mode = geom.mode();
    Eigen::MatrixXd gm = geom.metric_components(mode);
    Eigen::VectorXd dx = x - mode;
    double quad = dx.dot(gm * dx);
    double det = gm.determinant();
    double norm = std::pow(2.0 * M_PI, -0.5 * geom.dim()) * std::sqrt(det);
    return norm * std::exp(-0.5 * quad);
}

}  // namespace fluctgeo
