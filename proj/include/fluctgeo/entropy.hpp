#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluctgeo/families.hpp"
#include "fluctgeo/geometry1d.hpp"
#include "fluctgeo/riemann.hpp"
#include "fluctgeo/verification.hpp"

namespace fluctgeo {

/// Shannon entropy of a finite probability vector, with 0 log 0 = 0.
/// Throws std::domain_error on negative or non-normalized input.
double discrete_entropy(const std::vector<double>& p);

/// The three differential entropies of a distribution q against a geometry:
/// naive is chart-dependent by design; jaynes corrects by the invariant
/// measure from the metric; geometric integrates the probability weight
/// against the invariant volume (computed in the chart coordinate).
struct EntropyReport {
    double naive = 0.0;      // -int q log q dx
    double jaynes = 0.0;     // -int q log(q/gamma) dx,  gamma = sqrt(g/2pi)
    double geometric = 0.0;  // -int q_g log q_g dmu,    q_g = q/gamma
    std::optional<double> intrinsic;  // only when q is the geometry's own law
    std::string chart_tag;   // coordinate representation of the naive value
    bool quadrature_ok = true;
};

EntropyReport differential_entropies(const Family1D& q, const Geometry1D& geom,
                                     const QuadratureSpec& spec = {});
EntropyReport differential_entropies(const ProductFamily& q, const GeometryN& geom,
                                     const QuadratureSpec& spec = {});

/// Kullback-Leibler divergence of q from p. A support mismatch (q positive
/// outside p's support) is reported as the infinite flag, not an error.
struct KlResult {
    double value = 0.0;
    bool infinite = false;
    bool quadrature_ok = true;
};

KlResult kl_divergence(const Family1D& q, const Family1D& p, const QuadratureSpec& spec = {});

/// Negative expected information potential of the geometry's own law:
/// dimension/2 for every constructed geometry.
double intrinsic_entropy(const Geometry1D& geom, const QuadratureSpec& spec = {});
double intrinsic_entropy(const GeometryN& geom, const QuadratureSpec& spec = {});

/// Transports (q, geom) through a coordinate change and reports that the
/// geometric entropy is unchanged while the naive entropy shifts by the
/// expected log-Jacobian.
struct InvarianceReport {
    double geometric_shift = 0.0;      // should vanish
    double naive_shift = 0.0;          // observed
    double expected_naive_shift = 0.0; // <log |dTheta/dx|> under q
    VerificationReport geometric;
    VerificationReport naive;
};

InvarianceReport invariance_check(const Family1D& q, const Geometry1D& geom, const Diffeo& diffeo,
                                  const QuadratureSpec& spec = {}, double tolerance = 1e-6);

}  // namespace fluctgeo
