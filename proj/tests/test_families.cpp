#include <doctest.h>

#include <cmath>

#include "fluctgeo/corpus.hpp"
#include "fluctgeo/families.hpp"
#include "oracles.hpp"

using namespace fluctgeo;

TEST_SUITE_BEGIN("families");

TEST_CASE("evaluate on the panel families") {
    FamilyEval n = evaluate(make_normal(0.0, 1.0), 2.0);
    CHECK(n.force == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(n.response == doctest::Approx(1.0).epsilon(1e-14));

    FamilyEval u = evaluate(make_uniform(0.0, 1.0), 0.3);
    CHECK(u.density == doctest::Approx(1.0));
    CHECK(u.force == 0.0);
    CHECK(u.response == 0.0);

    // triangle density 1-|x| at a=1: analytic differentiation oracle
    FamilyEval t = evaluate(make_triangle(1.0), 0.5);
    CHECK(t.density == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.force == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(t.response == doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS((void)evaluate(make_uniform(0.0, 1.0), 1.5), std::domain_error);
    CHECK_THROWS_AS((void)evaluate(make_triangle(1.0), -1.0), std::domain_error);
}

TEST_CASE("corpus normalization and force consistency") {
    for (const auto& entry : corpus()) {
        CAPTURE(entry.name);
        QuadratureResult norm = expectation(entry.family, [](double) { return 1.0; });
        CHECK(norm.converged);
        CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-10));

        // analytic force against a central difference of log rho
        for (int i = 1; i < 20; ++i) {
            double u = i / 20.0;
            double x = entry.family.quantile(u);
            bool skip = false;
            for (double b : entry.family.non_smooth_points())
                if (std::abs(x - b) < 0.05) skip = true;
            if (skip) continue;
            double h = 1e-6 * (1.0 + std::abs(x));
            double fd = -(entry.family.log_density(x + h) - entry.family.log_density(x - h)) /
                        (2.0 * h);
            CHECK(std::abs(entry.family.force(x) - fd) < 1e-6);
        }
    }
}

TEST_CASE("mixture cdf and quantile invert each other") {
    const Family1D& mix = corpus_entry("mixture").family;
    for (double u : {1e-8, 1e-3, 0.2, 0.5, 0.77, 1.0 - 1e-3, 1.0 - 1e-8}) {
        double x = mix.quantile(u);
        CHECK(mix.cdf(x) == doctest::Approx(u).epsilon(1e-11));
    }
}

TEST_CASE("exponential family normalizes and differentiates") {
    ExponentialFamily ef = gaussian_natural_family();
    Eigen::VectorXd theta = corpus_expfam_theta();
    Family1D fam = ef.at(theta);
    QuadratureResult norm = expectation(fam, [](double) { return 1.0; });
    CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-8));
    // force = theta1 + 2 theta2 x
    CHECK(fam.force(0.7) == doctest::Approx(theta[0] + 2.0 * theta[1] * 0.7).epsilon(1e-13));
    // gradient of the log-normalizer equals the mean of the statistics
    Eigen::VectorXd dp = ef.log_normalizer_gradient(theta);
    QuadratureResult m1 = expectation(fam, [](double x) { return x; });
    QuadratureResult m2 = expectation(fam, [](double x) { return x * x; });
    CHECK(dp[0] == doctest::Approx(m1.value).epsilon(1e-9));
    CHECK(dp[1] == doctest::Approx(m2.value).epsilon(1e-9));
    CHECK_THROWS_AS((void)ef.at(Eigen::Vector2d(0.0, -1.0)), std::domain_error);
}

TEST_CASE("sampling is deterministic and hits the mean") {
    Family1D uni = make_uniform(0.0, 1.0);
    CHECK_THROWS_AS((void)sample(uni, 0, {1, 2}), std::invalid_argument);

    const int n = 100000;
    OutcomeSet s = sample(uni, n, {2024, 5});
    double mean = 0.0;
    for (double x : s.outcomes) mean += x;
    mean /= n;
    // 3-sigma Monte Carlo band around 1/2 with sd = (12)^{-1/2} n^{-1/2}
    CHECK(std::abs(mean - 0.5) < 3.0 / std::sqrt(12.0 * n));

    OutcomeSet s2 = sample(uni, n, {2024, 5});
    CHECK(s.outcomes == s2.outcomes);
    OutcomeSet s3 = sample(make_normal(0.0, 1.0), 1000, {7, 1});
    OutcomeSet s4 = sample(make_normal(0.0, 1.0), 1000, {7, 1});
    CHECK(s3.outcomes == s4.outcomes);
}

TEST_CASE("boundary validation distinguishes the corpus") {
    BoundaryCheck n = validate_boundary(corpus_entry("normal").family);
    CHECK(n.conforming);

    BoundaryCheck u = validate_boundary(corpus_entry("uniform").family);
    CHECK_FALSE(u.conforming);
    CHECK_FALSE(u.left.density_vanishes);

    // triangle: density decays like sqrt(tail mass), slope stays at 1/a^2
    BoundaryCheck t = validate_boundary(corpus_entry("triangle").family);
    CHECK_FALSE(t.conforming);
    CHECK(t.left.density_vanishes);
    CHECK(t.right.density_vanishes);
    CHECK_FALSE(t.left.derivative_vanishes);
    CHECK_FALSE(t.right.derivative_vanishes);
    CHECK(t.left.derivative_values[0] == doctest::Approx(1.0).epsilon(1e-6));

    BoundaryCheck m = validate_boundary(corpus_entry("mixture").family);
    CHECK(m.conforming);
    BoundaryCheck e = validate_boundary(corpus_entry("expfam").family);
    CHECK(e.conforming);
}

TEST_CASE("reparametrize: identity, probit, scaling") {
    Family1D uni = make_uniform(0.0, 1.0);

    Family1D same = reparametrize(uni, affine_diffeo(1.0, 0.0));
    for (double x : {0.1, 0.4, 0.9}) CHECK(same.density(x) == doctest::Approx(1.0));

    // probit transport of the uniform is the standard normal
    Family1D probit = reparametrize(uni, probit_diffeo());
    CHECK(probit.support().lo == -kInf);
    CHECK(probit.support().hi == kInf);
    for (double y : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
        CHECK(probit.density(y) ==
              doctest::Approx(oracles::std_normal_density(y)).epsilon(1e-10));
    }
    QuadratureResult mass = expectation(probit, [](double) { return 1.0; });
    CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-10));

    Family1D wide = reparametrize(make_normal(0.0, 1.0), affine_diffeo(2.0, 0.0));
    Family1D ref = make_normal(0.0, 2.0);
    for (double y : {-3.0, 0.0, 1.7}) {
        CHECK(wide.density(y) == doctest::Approx(ref.density(y)).epsilon(1e-12));
    }

    Diffeo bad{"square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
               [](double y) { return std::sqrt(y); }};
    CHECK_THROWS_AS((void)reparametrize(make_normal(0.0, 1.0), bad), std::domain_error);
}

TEST_CASE("reparametrize preserves total probability") {
    for (const char* name : {"mixture", "triangle"}) {
        Family1D moved = reparametrize(corpus_entry(name).family, affine_diffeo(0.7, -2.0));
        QuadratureResult mass = expectation(moved, [](double) { return 1.0; });
        CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("product family evaluates factor-wise") {
    ProductFamily prod({make_normal(0.0, 1.0), make_uniform(0.0, 1.0)});
    Eigen::Vector2d x(0.5, 0.25);
    CHECK(prod.density(x) ==
          doctest::Approx(oracles::std_normal_density(0.5) * 1.0).epsilon(1e-14));
    Eigen::VectorXd f = prod.force(x);
    CHECK(f[0] == doctest::Approx(0.5));
    CHECK(f[1] == 0.0);
    Eigen::MatrixXd r = prod.response(x);
    CHECK(r(0, 0) == doctest::Approx(1.0));
    CHECK(r(0, 1) == 0.0);
    QuadratureResult norm = expectation(prod, [](const Eigen::VectorXd&) { return 1.0; });
    CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-10));
    QuadratureResult mean1 = expectation(prod, [](const Eigen::VectorXd& v) { return v[1]; });
    CHECK(mean1.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("generic family falls back to quadrature cdf and root-found quantile") {
    GenericFamilySpec spec;
    spec.name = "opaque-normal";
    spec.support = {-kInf, kInf};
    spec.density = [](double x) { return oracles::std_normal_density(x); };
    Family1D fam = make_generic(spec);
    CHECK_FALSE(fam.has_cdf());
    CHECK(fam.cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-11));
    CHECK(fam.quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-9));
    // FD force fallback
    CHECK(fam.force(0.7) == doctest::Approx(0.7).epsilon(1e-8));
}

TEST_SUITE_END();
