#pragma once

#include <memory>
#include <vector>

#include "fluctgeo/families.hpp"
#include "fluctgeo/numerics.hpp"
#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// All local geometric data of a one-dimensional geometry at a point.
/// metric = 2*pi*rho^2*exp(s^2), potential = -s^2/2, weight = exp(potential).
/// For |s| > 37 the exponentials over/underflow; log_metric and potential
/// stay valid and log_space is set.
struct GeomPoint {
    double x = 0.0;
    double cumulant = 0.0;   // p in [0,1]
    double chart = 0.0;      // s
    double metric = 0.0;     // g_11
    double potential = 0.0;  // S
    double weight = 0.0;     // omega = e^S
    double log_metric = 0.0;
    bool log_space = false;
};

/// The chart construction for a one-dimensional family: cumulant p, chart
/// s = Phi^{-1}(p), mode (p = 1/2), metric and information potential. The
/// partition value is 1 and the gaussian potential 0 by the boundary
/// constraints of the construction. Immutable value; cheap to copy.
class Geometry1D {
public:
    /// Builds the geometry. Throws std::invalid_argument when the density
    /// vanishes in the interior of the support.
    static Geometry1D build(const Family1D& family);

    const Family1D& family() const;
    const Interval& support() const;

    double cumulant(double x) const;                       // p(x)
    double cumulant_between(double a, double b) const;     // p(b) - p(a) by quadrature
    double chart(double x) const;                          // s(x)
    double chart_derivative(double x) const;               // ds/dx = rho / pdf(s)
    double inverse_chart(double s) const;                  // x(s)
    /// Chart values at x + offsets[k]; offsets must keep the stencil inside
    /// the support. Shares one cumulant anchor so the values are suitable
    /// for finite differencing.
    std::vector<double> chart_at_offsets(double x, const std::vector<double>& offsets) const;

    double mode() const;                     // p(mode) = 1/2
    double partition() const { return 1.0; }
    double gaussian_potential() const { return 0.0; }

    GeomPoint eval(double x) const;
    double potential(double x) const;        // -s^2/2
    double distance(double x1, double x2) const;  // |s1 - s2|

    /// One draw by inverse-cumulant transform; uses the family quantile when
    /// analytic, otherwise a cached monotone-cubic inverse chart.
    double sample_one(RandomSource& src) const;

    /// Grid uniform in the chart coordinate on [s_lo, s_hi], mapped through
    /// the inverse chart. Points landing on non-smooth family points are
    /// nudged off them.
    std::vector<double> chart_uniform_grid(double s_lo, double s_hi, int n) const;

private:
    struct Shared;
    explicit Geometry1D(std::shared_ptr<const Shared> s) : shared_(std::move(s)) {}
    std::shared_ptr<const Shared> shared_;
};

/// Scans a chart-uniform grid and checks that the two predicates
/// "distance(x, mode) < eps" and "|p - 1/2| <= erf(eps/sqrt(2))/2" agree at
/// every point (ties at the boundary value are skipped).
VerificationReport distance_probability_equivalence(const Geometry1D& geom, double eps,
                                                    int grid_n = 201);

/// Grid check of distance^2(x, mode) + 2 log(weight(x)/weight(mode)) = 0.
VerificationReport occurrence_ratio_check(const Geometry1D& geom, int grid_n = 201);

}  // namespace fluctgeo
