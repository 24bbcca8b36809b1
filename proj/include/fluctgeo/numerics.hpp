#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>

namespace fluctgeo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Controls for adaptive quadrature and tail truncation.
struct QuadratureSpec {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    int max_subdivisions = 4000;
    double tail_quantile_cutoff = 1e-14;  // must stay in (0, 1e-6)

    void validate() const;  // throws std::invalid_argument on bad fields
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;      // estimated absolute error
    bool converged = true;   // false: subdivision budget exhausted
    int subdivisions = 0;
    int evaluations = 0;
};

/// Standard normal pdf.
double std_normal_pdf(double z);

/// Standard normal cdf, accurate in both tails. Accepts +/-inf.
double std_normal_cdf(double z);

/// Inverse of std_normal_cdf on (0,1): rational initial guess refined by
/// Newton iterations. Throws std::domain_error outside (0,1).
double std_normal_quantile(double p);

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over (a,b).
/// Infinite endpoints are handled by rational variable substitution.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {});

/// Same, but the interval is first split at the given interior points
/// (used for piecewise-smooth integrands).
QuadratureResult integrate_split(const std::function<double(double)>& f, double a, double b,
                                 const std::vector<double>& interior_breaks,
                                 const QuadratureSpec& spec = {});

/// Root of a monotone continuous function on a bracket [lo,hi]:
/// bisection with secant acceleration. f(lo) and f(hi) must differ in sign
/// (zero endpoints accepted).
double find_root_monotone(const std::function<double(double)>& f, double lo, double hi,
                          double xtol = 1e-14);

/// Identifies one deterministic random stream. Identical (seed, stream)
/// always reproduces the identical sample sequence.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RngStream substream(std::uint64_t k) const { return {seed, stream + 1 + k}; }
};

/// Draws from one RngStream. The engine seeding and the uniform mapping are
/// fully specified, so sequences are identical across platforms.
class RandomSource {
public:
    explicit RandomSource(RngStream s);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0,1).
    double uniform01();

    const RngStream& stream() const { return stream_; }

private:
    RngStream stream_;
    std::mt19937_64 engine_;
};

}  // namespace fluctgeo
