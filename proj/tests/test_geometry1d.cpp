#include <doctest.h>

#include <cmath>

#include "fluctgeo/corpus.hpp"
#include "fluctgeo/geometry1d.hpp"
#include "oracles.hpp"

using namespace fluctgeo;

TEST_SUITE_BEGIN("geometry1d");

TEST_CASE("cumulant values") {
    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));
    for (double x : {0.1, 0.5, 0.73}) CHECK(uni.cumulant(x) == doctest::Approx(x).epsilon(1e-14));

    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    CHECK(nor.cumulant(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // quadrature oracle for the frozen tail value
    double oracle = oracles::simpson(oracles::std_normal_density, -12.0, 1.0, 20000);
    CHECK(nor.cumulant(1.0) == doctest::Approx(oracle).epsilon(1e-11));
}

TEST_CASE("normal chart is the standardized variable") {
    const double mu = 1.3, sigma = 0.7;
    Geometry1D g = Geometry1D::build(make_normal(mu, sigma));
    for (int i = 0; i <= 100; ++i) {
        double x = mu - 4.0 * sigma + 8.0 * sigma * i / 100.0;
        double s = (x - mu) / sigma;
        CHECK(std::abs(g.chart(x) - s) < 1e-11);
        GeomPoint p = g.eval(x);
        CHECK(std::abs(p.metric - 1.0 / (sigma * sigma)) < 1e-11);
        CHECK(std::abs(p.potential + 0.5 * s * s) < 1e-11);
    }
    CHECK(g.mode() == doctest::Approx(mu).epsilon(1e-12));
}

TEST_CASE("uniform chart and triangle mode") {
    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));
    CHECK(uni.mode() == doctest::Approx(0.5).epsilon(1e-13));
    for (double x : {0.2, 0.5, 0.9})
        CHECK(uni.chart(x) == doctest::Approx(std_normal_quantile(x)).epsilon(1e-13));
    GeomPoint mid = uni.eval(0.5);
    CHECK(mid.chart == doctest::Approx(0.0));
    CHECK(mid.metric == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
    CHECK(mid.potential == doctest::Approx(0.0));
    CHECK(mid.weight == doctest::Approx(1.0));

    Geometry1D tri = Geometry1D::build(make_triangle(1.0));
    CHECK(tri.mode() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mixture mode is the median with chart zero") {
    Geometry1D mix = Geometry1D::build(corpus_entry("mixture").family);
    // frozen oracle: median of 0.6 N(-1.2,0.5) + 0.4 N(1.4,0.6)
    CHECK(mix.mode() == doctest::Approx(-0.7165688560418126).epsilon(1e-11));
    CHECK(std::abs(mix.chart(mix.mode())) < 1e-10);
    CHECK(mix.cumulant(mix.mode()) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("weight is monomodal even for a bimodal density") {
    Geometry1D mix = Geometry1D::build(corpus_entry("mixture").family);
    std::vector<double> grid = mix.chart_uniform_grid(-4.0, 4.0, 801);
    int maxima = 0;
    std::size_t argmax = 0;
    double best = -1.0;
    std::vector<double> w;
    for (double x : grid) w.push_back(mix.eval(x).weight);
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        if (w[i] > w[i - 1] && w[i] > w[i + 1]) ++maxima;
        if (w[i] > best) {
            best = w[i];
            argmax = i;
        }
    }
    CHECK(maxima == 1);
    CHECK(grid[argmax] == doctest::Approx(mix.mode()).epsilon(1e-9));

    // the density itself has two strict local maxima on the same grid
    std::vector<double> r;
    for (double x : grid) r.push_back(mix.family().density(x));
    int rho_maxima = 0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i)
        if (r[i] > r[i - 1] && r[i] > r[i + 1]) ++rho_maxima;
    CHECK(rho_maxima == 2);
}

TEST_CASE("density reassembles from weight and metric") {
    for (const auto& entry : corpus()) {
        CAPTURE(entry.name);
        Geometry1D g = Geometry1D::build(entry.family);
        for (double x : g.chart_uniform_grid(-3.5, 3.5, 41)) {
            GeomPoint p = g.eval(x);
            double rho = entry.family.density(x);
            double back = p.weight * std::exp(0.5 * (p.log_metric - std::log(2.0 * M_PI)));
            CHECK(std::abs(back - rho) <= 1e-12 * std::max(1.0, rho));
        }
    }
}

TEST_CASE("distances") {
    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    CHECK(nor.distance(0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(nor.distance(1.3, 1.3) == 0.0);

    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));
    // quantile oracle: Phi^{-1}(0.841345) frozen from bisection on the cdf
    CHECK(uni.distance(0.841345, 0.5) == doctest::Approx(1.000001049431045).epsilon(1e-10));
}

TEST_CASE("chart round trip and pushforward law") {
    for (const auto& entry : corpus()) {
        CAPTURE(entry.name);
        Geometry1D g = Geometry1D::build(entry.family);
        for (double x : g.chart_uniform_grid(-4.0, 4.0, 81)) {
            CHECK(std::abs(g.inverse_chart(g.chart(x)) - x) <= 1e-9 * (1.0 + std::abs(x)));
        }
        // random probes: p(I(Phi^{-1}(u))) = u
        RandomSource src({99, 4});
        for (int k = 0; k < 50; ++k) {
            double u = src.uniform01();
            double x = g.inverse_chart(std_normal_quantile(u));
            CHECK(std::abs(g.cumulant(x) - u) < 1e-9);
        }
    }
}

TEST_CASE("potential has its unique maximum at the mode") {
    Geometry1D mix = Geometry1D::build(corpus_entry("mixture").family);
    double s_prev = -kInf;
    double pot_prev = -kInf;
    // potential increases up to s=0 and decreases after
    for (double x : mix.chart_uniform_grid(-4.0, 4.0, 161)) {
        double s = mix.chart(x);
        double pot = mix.potential(x);
        if (s < 0.0 && s_prev != -kInf) CHECK(pot > pot_prev);
        if (s_prev > 0.0) CHECK(pot < pot_prev);
        s_prev = s;
        pot_prev = pot;
    }
    CHECK(mix.potential(mix.mode()) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("distance-probability equivalence") {
    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    CHECK(nor.distance(0.5, nor.mode()) < 1.0);
    CHECK(std::abs(nor.cumulant(0.5) - 0.5) <= 0.5 * std::erf(1.0 / std::sqrt(2.0)));
    CHECK(nor.distance(1.5, nor.mode()) > 1.0);
    CHECK(std::abs(nor.cumulant(1.5) - 0.5) > 0.5 * std::erf(1.0 / std::sqrt(2.0)));

    for (const auto& entry : corpus()) {
        CAPTURE(entry.name);
        Geometry1D g = Geometry1D::build(entry.family);
        for (double eps : {0.3, 0.674, 1.0, 2.2}) {
            VerificationReport r = distance_probability_equivalence(g, eps);
            CHECK(r.pass);
        }
    }
    // the predicate boundary for eps = 0.674 sits at p = 1/2 +- 0.2498...
    CHECK(0.5 * std::erf(0.674 / std::sqrt(2.0)) ==
          doctest::Approx(0.24984434315967743).epsilon(1e-12));
}

TEST_CASE("occurrence ratio identity") {
    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    VerificationReport rn = occurrence_ratio_check(nor);
    CHECK(rn.pass);
    CHECK(rn.residual < 1e-12);

    Geometry1D mix = Geometry1D::build(corpus_entry("mixture").family);
    VerificationReport rm = occurrence_ratio_check(mix);
    CHECK(rm.pass);
    CHECK(rm.residual < 1e-9);

    double mode = mix.mode();
    CHECK(mix.distance(mode, mode) == 0.0);
}

TEST_CASE("families are diffeomorphic through their charts") {
    // transport mixture draws through chart composition onto the normal
    Geometry1D mix = Geometry1D::build(corpus_entry("mixture").family);
    Geometry1D nor = Geometry1D::build(make_normal(0.0, 1.0));
    const int n = 20000;
    OutcomeSet draws = sample(mix.family(), n, {31415, 0});
    double mean = 0.0, var = 0.0;
    std::vector<double> moved;
    moved.reserve(draws.outcomes.size());
    for (double x : draws.outcomes) moved.push_back(nor.inverse_chart(mix.chart(x)));
    for (double y : moved) mean += y;
    mean /= n;
    for (double y : moved) var += (y - mean) * (y - mean);
    var /= (n - 1);
    CHECK(std::abs(mean - 0.0) < 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / double(n)));
}

TEST_CASE("log-space guard for extreme tails") {
    Geometry1D uni = Geometry1D::build(make_uniform(0.0, 1.0));
    GeomPoint p = uni.eval(1e-300);
    CHECK(p.log_space);
    CHECK(std::isfinite(p.log_metric));
    CHECK(std::isfinite(p.potential));
    CHECK(p.chart < -37.0);
}

TEST_CASE("construction rejects interior zeros") {
    GenericFamilySpec spec;
    spec.name = "pinched";
    spec.support = {-1.0, 1.0};
    spec.density = [](double x) { return 1.5 * x * x; };
    CHECK_THROWS_AS((void)Geometry1D::build(make_generic(spec)), std::invalid_argument);
}

TEST_CASE("quadrature-only family builds the same chart as the closed form") {
    GenericFamilySpec spec;
    spec.name = "opaque-normal";
    spec.support = {-kInf, kInf};
    spec.density = [](double x) { return oracles::std_normal_density(x); };
    Geometry1D g = Geometry1D::build(make_generic(spec));
    for (double x : {-2.0, -0.3, 0.0, 1.1, 2.7}) {
        CHECK(std::abs(g.chart(x) - x) < 1e-9);
    }
    CHECK(std::abs(g.mode()) < 1e-10);
    // cached inverse chart drives sampling
    RandomSource src({5, 5});
    double mean = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) mean += g.sample_one(src);
    mean /= n;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("triangle grid avoids the apex") {
    Geometry1D tri = Geometry1D::build(make_triangle(1.0));
    for (double x : tri.chart_uniform_grid(-4.0, 4.0, 81)) CHECK(x != 0.0);
}

TEST_SUITE_END();
