#include "fluctgeo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace fluctgeo {

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    if (max_subdivisions < 1)
        throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
    if (!(tail_quantile_cutoff > 0.0) || !(tail_quantile_cutoff < 1e-6))
        throw std::invalid_argument("QuadratureSpec: tail_quantile_cutoff must lie in (0, 1e-6)");
}

double std_normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double std_normal_cdf(double z) {
    if (std::isnan(z)) return z;
    if (z == kInf) return 1.0;
    if (z == -kInf) return 0.0;
    // erfc keeps relative accuracy in the left tail; mirror for the right.
    static const double inv_sqrt2 = 0.7071067811865475244;
    if (z <= 0.0) return 0.5 * std::erfc(-z * inv_sqrt2);
    return 1.0 - 0.5 * std::erfc(z * inv_sqrt2);
}

namespace {

// Acklam's rational approximation for the normal quantile (|rel err| < 1.2e-9),
// used as the initial guess.
double quantile_guess(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("std_normal_quantile: p must lie in (0,1)");
    double z = quantile_guess(p);
    // Three Newton steps on Phi(z) - p. The residual is formed in the tail
    // where Phi keeps relative accuracy, so the correction stays well scaled.
    for (int it = 0; it < 3; ++it) {
        double pdf = std_normal_pdf(z);
        if (pdf <= 0.0) break;
        double resid = std_normal_cdf(z) - p;
        z -= resid / pdf;
    }
    return z;
}

namespace {

// Kronrod 15-point abscissae and weights on [-1,1]; Gauss 7 weights on the
// odd-index subset. Values from the standard (G7,K15) pair.
const double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k15 = kWgk[7] * fc;
    double g7 = kWg[3] * fc;
    double resabs = kWgk[7] * std::abs(fc);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        k15 += kWgk[i] * (f1 + f2);
        if (i % 2 == 1) g7 += kWg[i / 2] * (f1 + f2);
        resabs += kWgk[i] * (std::abs(f1) + std::abs(f2));
    }
    k15 *= h;
    g7 *= h;
    resabs *= std::abs(h);
    double err = std::abs(k15 - g7);
    // QUADPACK-style sharpening of the error estimate for converged panels.
    if (resabs > 0.0 && err > 0.0) {
        double scaled = std::pow(200.0 * err / resabs, 1.5);
        if (scaled < 1.0) err = resabs * scaled;
    }
    return {a, b, k15, err};
}

QuadratureResult adaptive_finite(const std::function<double(double)>& f,
                                 const std::vector<double>& breaks, const QuadratureSpec& spec) {
    std::priority_queue<Panel> heap;
    double total = 0.0, toterr = 0.0;
    int evals = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        Panel p = gk15(f, breaks[i], breaks[i + 1]);
        evals += 15;
        total += p.value;
        toterr += p.error;
        heap.push(p);
    }
    int used = static_cast<int>(breaks.size()) - 1;
    while (toterr > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) &&
           used < spec.max_subdivisions) {
        Panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval exhausted in doubles
            heap.push({worst.a, worst.b, worst.value, 0.0});
            continue;
        }
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++used;
    }
    bool ok = toterr <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
    return {total, toterr, ok, used, evals};
}

}  // namespace

QuadratureResult integrate_split(const std::function<double(double)>& f, double a, double b,
                                 const std::vector<double>& interior_breaks,
                                 const QuadratureSpec& spec) {
    spec.validate();
    if (a == b) return {0.0, 0.0, true, 0, 0};
    if (a > b) {
        QuadratureResult r = integrate_split(f, b, a, interior_breaks, spec);
        r.value = -r.value;
        return r;
    }

    const bool lo_inf = (a == -kInf);
    const bool hi_inf = (b == kInf);
    std::function<double(double)> g = f;
    double ga = a, gb = b;
    if (lo_inf || hi_inf) {
        // Rational substitutions; the transformed integrand vanishes at the
        // finite image of the infinite endpoint by assumption of decay.
        // Each branch returns 0 for vanished integrand values before dividing
        // by u^2, which may underflow near the image of the infinite endpoint.
        if (lo_inf && hi_inf) {
            g = [f](double t) {
                double u = 1.0 - t * t;
                double fx = f(t / u);
                if (fx == 0.0) return 0.0;
                return fx * (1.0 + t * t) / (u * u);
            };
            ga = -1.0;
            gb = 1.0;
        } else if (hi_inf) {
            double a0 = a;
            g = [f, a0](double t) {
                double u = 1.0 - t;
                double fx = f(a0 + t / u);
                if (fx == 0.0) return 0.0;
                return fx / (u * u);
            };
            ga = 0.0;
            gb = 1.0;
        } else {
            double b0 = b;
            g = [f, b0](double t) {
                double u = 1.0 - t;
                double fx = f(b0 - t / u);
                if (fx == 0.0) return 0.0;
                return fx / (u * u);
            };
            ga = 0.0;
            gb = 1.0;
            // direction flip cancels: integral over (-inf,b) maps to (0,1)
        }
    }

    std::vector<double> breaks{ga};
    if (!lo_inf && !hi_inf) {
        for (double x : interior_breaks)
            if (x > a && x < b) breaks.push_back(x);
    }
    breaks.push_back(gb);
    std::sort(breaks.begin(), breaks.end());
    return adaptive_finite(g, breaks, spec);
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec) {
    return integrate_split(f, a, b, {}, spec);
}

double find_root_monotone(const std::function<double(double)>& f, double lo, double hi,
                          double xtol) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("find_root_monotone: bracket does not straddle a root");
    for (int it = 0; it < 200; ++it) {
        double mid;
        // secant proposal, falling back to bisection when it leaves the bracket
        double denom = fhi - flo;
        if (denom != 0.0) {
            mid = hi - fhi * (hi - lo) / denom;
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        // alternate with plain bisection to guarantee bracket shrinkage
        if (it % 2 == 1) mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || hi - lo < xtol * (1.0 + std::abs(mid))) return mid;
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

RandomSource::RandomSource(RngStream s)
    : stream_(s), engine_(splitmix64(splitmix64(s.seed) ^ splitmix64(~s.stream))) {}

double RandomSource::uniform01() {
    // 53-bit mantissa, shifted off zero so the open interval is respected
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace fluctgeo
