#include <doctest.h>

#include <cmath>

#include "fluctgeo/corpus.hpp"
#include "fluctgeo/entropy.hpp"
#include "oracles.hpp"

using namespace fluctgeo;

TEST_SUITE_BEGIN("entropy");

TEST_CASE("discrete entropy") {
    CHECK(discrete_entropy({1.0, 0.0, 0.0}) == 0.0);
    CHECK(discrete_entropy({0.25, 0.25, 0.25, 0.25}) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-14));
    CHECK(discrete_entropy({0.5, 0.25, 0.25}) ==
          doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS((void)discrete_entropy({0.5, 0.4}), std::domain_error);
    CHECK_THROWS_AS((void)discrete_entropy({1.5, -0.5}), std::domain_error);
}

TEST_CASE("differential entropies of the corpus") {
    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));
    EntropyReport u = differential_entropies(uni.family(), uni);
    CHECK(u.naive == doctest::Approx(0.0).epsilon(1e-10));

    for (double sigma : {0.7, 1.0, 2.0}) {
        Geometry1D nor = Geometry1D::build(make_normal(0.0, sigma));
        EntropyReport e = differential_entropies(nor.family(), nor);
        // quadrature against the closed form (1/2) log(2 pi e sigma^2)
        double expected = 0.5 * std::log(2.0 * M_PI * M_E * sigma * sigma);
        CHECK(e.naive == doctest::Approx(expected).epsilon(1e-8));
        CHECK(e.geometric == doctest::Approx(0.5).epsilon(1e-8));
    }
}

TEST_CASE("jaynes entropy equals the geometric entropy") {
    // metric-derived invariant measure: the two formulas agree identically
    for (const auto& entry : corpus()) {
        CAPTURE(entry.name);
        Geometry1D g = Geometry1D::build(entry.family);
        EntropyReport own = differential_entropies(entry.family, g);
        CHECK(std::abs(own.jaynes - own.geometric) < 1e-9);
    }
    // and for a distribution that is not the geometry's own
    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    EntropyReport cross = differential_entropies(corpus_entry("mixture").family, nor);
    CHECK(std::abs(cross.jaynes - cross.geometric) < 1e-9);
}

TEST_CASE("geometric entropy requires support containment") {
    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));
    CHECK_THROWS_AS((void)differential_entropies(make_normal(0.0, 1.0), uni),
                    std::domain_error);
}

TEST_CASE("kl divergence") {
    Family1D a = make_normal(0.0, 1.0);
    KlResult self = kl_divergence(a, a);
    CHECK_FALSE(self.infinite);
    CHECK(std::abs(self.value) < 1e-10);

    // gaussian closed form: (mu1-mu2)^2 / (2 sigma^2) = 1/2
    KlResult shifted = kl_divergence(a, make_normal(1.0, 1.0));
    CHECK(shifted.value == doctest::Approx(0.5).epsilon(1e-10));

    // uniform against the normal: finite; closed form log sqrt(2pi) + 1/6
    KlResult fin = kl_divergence(make_uniform(0.0, 1.0), a);
    CHECK_FALSE(fin.infinite);
    CHECK(fin.value == doctest::Approx(1.0856051998713394).epsilon(1e-10));

    // reverse direction: q positive outside p's support
    KlResult inf = kl_divergence(a, make_uniform(0.0, 1.0));
    CHECK(inf.infinite);

    // nonnegativity on a non-trivial pair
    KlResult mix = kl_divergence(corpus_entry("mixture").family, a);
    CHECK(mix.value > 0.0);
}

TEST_CASE("intrinsic entropy is half per dimension") {
    for (const auto& entry : corpus()) {
        CAPTURE(entry.name);
        Geometry1D g = Geometry1D::build(entry.family);
        CHECK(intrinsic_entropy(g) == doctest::Approx(0.5).epsilon(1e-6));
    }
    GeometryN g3({Geometry1D::build(make_normal(0.0, 1.0)),
                  Geometry1D::build(corpus_entry("mixture").family),
                  Geometry1D::build(make_triangle(1.0))});
    CHECK(intrinsic_entropy(g3) == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("intrinsic entropy is additive over products") {
    Geometry1D a = Geometry1D::build(corpus_entry("mixture").family);
    Geometry1D b = Geometry1D::build(make_uniform(0.0, 1.0));
    GeometryN ab({a, b});
    CHECK(intrinsic_entropy(ab) ==
          doctest::Approx(intrinsic_entropy(a) + intrinsic_entropy(b)).epsilon(1e-8));
}

TEST_CASE("invariance under coordinate changes") {
    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));

    InvarianceReport ident =
        invariance_check(uni.family(), uni, affine_diffeo(1.0, 0.0));
    CHECK(std::abs(ident.geometric_shift) < 1e-10);
    CHECK(std::abs(ident.naive_shift) < 1e-10);

    // scaling by 2: naive shifts by log 2, geometric is unchanged
    InvarianceReport scaled =
        invariance_check(uni.family(), uni, affine_diffeo(2.0, 0.0));
    CHECK(scaled.geometric.pass);
    CHECK(scaled.naive.pass);
    CHECK(scaled.naive_shift == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    CHECK(scaled.expected_naive_shift == doctest::Approx(std::log(2.0)).epsilon(1e-8));

    // the mixture through its own chart becomes the standard normal
    Geometry1D mix = Geometry1D::build(corpus_entry("mixture").family);
    Diffeo own_chart{"chart", [mix](double x) { return mix.chart(x); },
                     [mix](double x) { return mix.chart_derivative(x); },
                     [mix](double s) { return mix.inverse_chart(s); }};
    InvarianceReport through = invariance_check(mix.family(), mix, own_chart);
    CHECK(through.geometric.pass);
    CHECK(through.naive.pass);
    EntropyReport base = differential_entropies(mix.family(), mix);
    double moved_naive = base.naive + through.naive_shift;
    CHECK(moved_naive == doctest::Approx(0.5 * std::log(2.0 * M_PI * M_E)).epsilon(1e-6));
}

TEST_CASE("own distribution beats a truncated one at equal chart variance") {
    // exploratory comparison on the standard-normal geometry: the geometry's
    // own law has geometric entropy 1/2; the variance-1 uniform on
    // (-sqrt(3), sqrt(3)) has log(2 sqrt(3)) - log(sqrt(2 pi)) ~ 0.3235
    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    EntropyReport own = differential_entropies(nor.family(), nor);
    double r3 = std::sqrt(3.0);
    EntropyReport flat = differential_entropies(make_uniform(-r3, r3), nor);
    CHECK(own.geometric == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(flat.geometric == doctest::Approx(0.3235147916893275).epsilon(1e-8));
    CHECK(own.geometric > flat.geometric);
}

TEST_CASE("product entropies") {
    GeometryN nu({Geometry1D::build(make_normal(0.0, 1.0)),
                  Geometry1D::build(make_uniform(0.0, 1.0))});
    EntropyReport e = differential_entropies(nu.family(), nu);
    CHECK(std::abs(e.jaynes - e.geometric) < 1e-8);
    // naive of a product is the sum of factor naives
    CHECK(e.naive ==
          doctest::Approx(0.5 * std::log(2.0 * M_PI * M_E) + 0.0).epsilon(1e-8));
    CHECK(intrinsic_entropy(nu) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_SUITE_END();
