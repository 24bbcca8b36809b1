#include "fluctgeo/geometry1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fluctgeo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogSpaceChart = 37.0;

// Fritsch-Carlson monotone cubic interpolant.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        const std::size_t n = xs_.size();
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            d[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        ms_.resize(n);
        ms_[0] = d[0];
        ms_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            ms_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                ms_[i] = ms_[i + 1] = 0.0;
                continue;
            }
            double a = ms_[i] / d[i], b = ms_[i + 1] / d[i];
            double r = a * a + b * b;
            if (r > 9.0) {
                double t = 3.0 / std::sqrt(r);
                ms_[i] = t * a * d[i];
                ms_[i + 1] = t * b * d[i];
            }
        }
    }

    double operator()(double x) const {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = (it == xs_.begin()) ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
        i = std::min(i, xs_.size() - 2);
        double h = xs_[i + 1] - xs_[i];
        double t = (x - xs_[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * ys_[i] + h10 * h * ms_[i] + h01 * ys_[i + 1] + h11 * h * ms_[i + 1];
    }

    bool empty() const { return xs_.empty(); }

private:
    std::vector<double> xs_, ys_, ms_;
};

}  // namespace

struct Geometry1D::Shared {
    Family1D family;
    double mode = 0.0;
    MonotoneCubic inverse_chart_cache;  // x as a function of s; only when no quantile

    explicit Shared(Family1D f) : family(std::move(f)) {}
};

Geometry1D Geometry1D::build(const Family1D& family) {
    auto shared = std::make_shared<Shared>(family);

    // Reject densities with interior zeros: the chart needs rho > 0.
    double min_rho = kInf, max_rho = 0.0, min_at = 0.0;
    for (int i = 1; i < 64; ++i) {
        double u = static_cast<double>(i) / 64.0;
        double x = family.quantile(u);
        double rho = family.density(x);
        if (rho < min_rho) {
            min_rho = rho;
            min_at = x;
        }
        max_rho = std::max(max_rho, rho);
    }
    if (!(min_rho > 1e-12 * max_rho)) {
        std::ostringstream os;
        os << family.name() << ": density vanishes near interior point x=" << min_at
           << "; chart construction needs rho > 0 on the open support";
        throw std::invalid_argument(os.str());
    }

    shared->mode = family.has_quantile()
                       ? family.quantile(0.5)
                       : find_root_monotone(
                             [&family](double x) { return family.cdf(x) - 0.5; },
                             family.quantile(0.05), family.quantile(0.95), 1e-13);

    if (!family.has_quantile()) {
        // Cached inverse chart for sampling; verification paths never use it.
        const int n = 257;
        std::vector<double> ss(n), xs(n);
        for (int i = 0; i < n; ++i) {
            double s = -8.25 + 16.5 * static_cast<double>(i) / (n - 1);
            ss[static_cast<std::size_t>(i)] = s;
            xs[static_cast<std::size_t>(i)] = family.quantile(std_normal_cdf(s));
        }
        shared->inverse_chart_cache = MonotoneCubic(std::move(ss), std::move(xs));
    }

    return Geometry1D(std::move(shared));
}

const Family1D& Geometry1D::family() const { return shared_->family; }
const Interval& Geometry1D::support() const { return shared_->family.support(); }

double Geometry1D::cumulant(double x) const {
    if (x <= support().lo) return 0.0;
    if (x >= support().hi) return 1.0;
    return shared_->family.cdf(x);
}

double Geometry1D::cumulant_between(double a, double b) const {
    QuadratureSpec spec;
    spec.rel_tol = 1e-13;
    spec.abs_tol = 1e-17;
    return integrate_split([this](double t) { return shared_->family.density(t); }, a, b,
                           shared_->family.non_smooth_points(), spec)
        .value;
}

double Geometry1D::chart(double x) const {
    if (x <= support().lo) return -kInf;
    if (x >= support().hi) return kInf;
    // Evaluate via the smaller tail so both chart branches keep relative
    // accuracy.
    double p = shared_->family.cdf(x);
    if (p <= 0.0) return -kInf;
    if (p <= 0.5) return std_normal_quantile(p);
    double q = shared_->family.survival(x);
    if (q <= 0.0) return kInf;
    return -std_normal_quantile(q);
}

double Geometry1D::chart_derivative(double x) const {
    double s = chart(x);
    double rho = shared_->family.density(x);
    // ds/dx = rho / pdf(s); in log space for charts far in the tail
    if (std::abs(s) > kLogSpaceChart)
        return std::exp(std::log(rho) + 0.5 * s * s + 0.5 * kLog2Pi);
    return rho / std_normal_pdf(s);
}

double Geometry1D::inverse_chart(double s) const {
    if (s == -kInf) return support().lo;
    if (s == kInf) return support().hi;
    double p = std_normal_cdf(s);
    // beyond double resolution of the unit interval the chart saturates
    if (p <= 0.0) return support().lo;
    if (p >= 1.0) return support().hi;
    return shared_->family.quantile(p);
}

std::vector<double> Geometry1D::chart_at_offsets(double x,
                                                 const std::vector<double>& offsets) const {
    std::vector<double> out(offsets.size());
    if (shared_->family.has_cdf()) {
        for (std::size_t k = 0; k < offsets.size(); ++k) out[k] = chart(x + offsets[k]);
        return out;
    }
    // One quadrature anchor per tail plus short increments keeps the stencil
    // values correlated to well below the finite-difference signal.
    double p0 = cumulant(x);
    double q0 = shared_->family.survival(x);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        double dp = (offsets[k] == 0.0) ? 0.0 : cumulant_between(x, x + offsets[k]);
        double p = p0 + dp;
        if (p <= 0.5) {
            out[k] = std_normal_quantile(std::max(1e-300, p));
        } else {
            double q = q0 - dp;
            out[k] = -std_normal_quantile(std::max(1e-300, q));
        }
    }
    return out;
}

double Geometry1D::mode() const { return shared_->mode; }

GeomPoint Geometry1D::eval(double x) const {
    if (!support().contains_open(x))
        throw std::domain_error(shared_->family.name() + ": point outside open support");
    GeomPoint g;
    g.x = x;
    g.cumulant = cumulant(x);
    g.chart = chart(x);
    double rho = shared_->family.density(x);
    double s2 = g.chart * g.chart;
    g.log_metric = kLog2Pi + 2.0 * std::log(rho) + s2;
    g.potential = -0.5 * s2;
    g.log_space = std::abs(g.chart) > kLogSpaceChart;
    g.metric = std::exp(g.log_metric);
    g.weight = std::exp(g.potential);
    return g;
}

double Geometry1D::potential(double x) const {
    double s = chart(x);
    return -0.5 * s * s;
}

double Geometry1D::distance(double x1, double x2) const {
    return std::abs(chart(x1) - chart(x2));
}

double Geometry1D::sample_one(RandomSource& src) const {
    double u = src.uniform01();
    if (shared_->family.has_quantile() || shared_->inverse_chart_cache.empty())
        return shared_->family.quantile(u);
    double z = std_normal_quantile(u);
    if (std::abs(z) > 8.0) return shared_->family.quantile(u);  // beyond the cache
    return shared_->inverse_chart_cache(z);
}

std::vector<double> Geometry1D::chart_uniform_grid(double s_lo, double s_hi, int n) const {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n));
    const std::vector<double> avoid = shared_->family.non_smooth_points();
    const double ds = (n > 1) ? (s_hi - s_lo) / (n - 1) : 0.0;
    for (int i = 0; i < n; ++i) {
        double s = s_lo + ds * i;
        double x = inverse_chart(s);
        for (double bad : avoid) {
            if (std::abs(x - bad) < 1e-9 * (1.0 + std::abs(bad)))
                x = inverse_chart(s + 0.37 * std::max(ds, 1e-3));
        }
        grid.push_back(x);
    }
    return grid;
}

VerificationReport distance_probability_equivalence(const Geometry1D& geom, double eps,
                                                    int grid_n) {
    if (!(eps > 0.0))
        throw std::invalid_argument("distance_probability_equivalence: eps must be positive");
    const double half_width = 0.5 * std::erf(eps / std::sqrt(2.0));
    const double mode = geom.mode();
    int disagree = 0, checked = 0;
    double max_gap = 0.0;
    for (double x : geom.chart_uniform_grid(-5.0, 5.0, grid_n)) {
        double d = geom.distance(x, mode);
        double p = geom.cumulant(x);
        if (std::abs(d - eps) < 1e-9) continue;  // boundary tie, ill-posed either way
        bool geometric = d < eps;
        bool probabilistic = std::abs(p - 0.5) <= half_width;
        if (geometric != probabilistic) ++disagree;
        ++checked;
        max_gap = std::max(max_gap, std::abs((d < eps ? 1.0 : 0.0) - (probabilistic ? 1.0 : 0.0)));
    }
    VerificationReport r = make_report("distance_probability_equivalence",
                                       static_cast<double>(disagree), 0.0, 0.0);
    std::ostringstream os;
    os << geom.family().name() << ": " << checked << " grid points, predicate boundary at p = 1/2 +- "
       << half_width;
    r.note = os.str();
    return r;
}

VerificationReport occurrence_ratio_check(const Geometry1D& geom, int grid_n) {
    const double mode = geom.mode();
    const GeomPoint at_mode = geom.eval(mode);
    double max_resid = 0.0;
    for (double x : geom.chart_uniform_grid(-4.0, 4.0, grid_n)) {
        GeomPoint g = geom.eval(x);
        double d = geom.distance(x, mode);
        double lhs = d * d;
        double rhs = -2.0 * (g.potential - at_mode.potential);  // -2 log(w/w(mode))
        max_resid = std::max(max_resid, std::abs(lhs - rhs));
    }
    VerificationReport r = make_report("occurrence_ratio", max_resid, 0.0, 1e-9);
    r.note = geom.family().name();
    return r;
}

}  // namespace fluctgeo
