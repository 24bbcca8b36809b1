#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "fluctgeo/corpus.hpp"
#include "fluctgeo/fluctuation.hpp"
#include "oracles.hpp"

using namespace fluctgeo;

TEST_SUITE_BEGIN("fluctuation");

namespace {

Observable poly(const std::string& name, double c0, double c1, double c2, double c3) {
    return {name,
            [=](double x) { return c0 + x * (c1 + x * (c2 + x * c3)); },
            [=](double x) { return c1 + x * (2.0 * c2 + x * 3.0 * c3); }};
}

}  // namespace

TEST_CASE("identity for simple observables") {
    Family1D nor = make_normal(0.0, 1.0);

    VerificationReport one = verify_identity(nor, poly("1", 1, 0, 0, 0));
    CHECK(one.residual < 1e-10);
    CHECK(std::abs(one.lhs(0, 0)) < 1e-10);

    // A = I reduces to the fundamental theorem: both sides are 1
    VerificationReport lin = verify_identity(nor, poly("I", 0, 1, 0, 0));
    CHECK(lin.residual < 1e-10);
    CHECK(lin.lhs(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(lin.rhs(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

    // A = I^2 on the mixture: <2I> = <eta I^2>; the mixture mean is exactly
    // 0.6*(-1.2) + 0.4*1.4 = -0.16
    const Family1D& mix = corpus_entry("mixture").family;
    VerificationReport quad = verify_identity(mix, poly("I^2", 0, 0, 1, 0));
    CHECK(quad.residual < 1e-8);
    CHECK(quad.lhs(0, 0) == doctest::Approx(-0.32).epsilon(1e-9));
}

TEST_CASE("fluctuation theorems on conforming families") {
    for (const auto& entry : conforming_corpus()) {
        CAPTURE(entry.name);
        auto reports = verify_fluctuation_theorems(entry.family);
        REQUIRE(reports.size() == 3);
        for (const auto& r : reports) {
            CAPTURE(r.id);
            CHECK(r.pass);
            CHECK(r.residual < 1e-8);
        }
    }
    // tighter bound for the plain gaussian
    for (const auto& r : verify_fluctuation_theorems(make_normal(0.0, 1.0)))
        CHECK(r.residual < 1e-10);
}

TEST_CASE("response moment equals the force correlation for a scaled gaussian") {
    // analytic oracle: <eta^2> = 1/sigma^2 = 4 at sigma = 1/2
    Family1D fam = make_normal(3.0, 0.5);
    MomentSet m = compute_moments(fam);
    CHECK(m.mean_response(0, 0) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(m.force_correlation(0, 0) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(m.mean_point[0] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("identity property on random cubic observables") {
    std::mt19937_64 gen(2718);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::vector<Family1D> fams;
    for (const auto& e : conforming_corpus()) fams.push_back(e.family);
    fams.push_back(corpus_entry("triangle").family);  // rho vanishes at the edge
    for (const auto& fam : fams) {
        CAPTURE(fam.name());
        for (int rep = 0; rep < 8; ++rep) {
            Observable obs = poly("rand", coef(gen), coef(gen), coef(gen), coef(gen));
            VerificationReport r = verify_identity(fam, obs);
            CHECK(r.quadrature_ok);
            CHECK(r.residual < 1e-8);
        }
    }
}

TEST_CASE("identity fails for the uniform by exactly the boundary term") {
    // with A = I the boundary term A*rho at 1 is 1: lhs = 1, rhs = 0
    VerificationReport r = verify_identity(make_uniform(0.0, 1.0), poly("I", 0, 1, 0, 0));
    CHECK(r.lhs(0, 0) == doctest::Approx(1.0));
    CHECK(r.rhs(0, 0) == doctest::Approx(0.0));
    CHECK_FALSE(r.pass);
}

TEST_CASE("uncertainty saturation for gaussians") {
    for (double sigma : {0.5, 1.0, 2.0}) {
        UncertaintyReport u = uncertainty_report(make_normal(1.0, sigma));
        CHECK(u.position_spread[0] == doctest::Approx(sigma).epsilon(1e-10));
        CHECK(u.force_spread[0] == doctest::Approx(1.0 / sigma).epsilon(1e-10));
        CHECK(u.product[0] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(u.bound_gap(0, 0)) < 1e-9);
    }
}

TEST_CASE("mixture exceeds the uncertainty bound strictly") {
    UncertaintyReport u = uncertainty_report(corpus_entry("mixture").family);
    // frozen oracle: sqrt(var * <eta^2>) = sqrt(1.9164 * 3.014482535577858)
    CHECK(u.product[0] == doctest::Approx(2.4035295569602235).epsilon(1e-8));
    CHECK(u.product[0] > 1.0 + 1e-3);
    CHECK(u.min_eigenvalue >= -1e-9);
}

TEST_CASE("two independent normals saturate the matrix bound") {
    ProductFamily prod({make_normal(0.0, 1.0), make_normal(0.0, 2.0)});
    UncertaintyReport u = uncertainty_report(prod);
    CHECK(u.bound_gap.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(u.min_eigenvalue >= -1e-9);
    CHECK(u.product[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(u.product[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform has a singular force correlation") {
    CHECK_THROWS_AS((void)uncertainty_report(make_uniform(0.0, 1.0)), std::runtime_error);
}

TEST_CASE("moment matrices are symmetric and positive definite") {
    ProductFamily prod({corpus_entry("mixture").family, make_normal(0.0, 1.0)});
    MomentSet m = compute_moments(prod);
    CHECK((m.force_correlation - m.force_correlation.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.force_correlation);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // mean response is positive definite as well (stability in expectation)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(m.mean_response);
    CHECK(er.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("product family passes the theorems jointly") {
    ProductFamily prod({make_normal(0.0, 1.0), corpus_entry("expfam").family});
    auto reports = verify_fluctuation_theorems(prod);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CAPTURE(r.id);
        CHECK(r.pass);
        CHECK(r.residual < 1e-8);
    }
    ObservableN obs{"x0*x1", [](const Eigen::VectorXd& v) { return v[0] * v[1]; },
                    [](const Eigen::VectorXd& v) {
                        Eigen::VectorXd g(2);
                        g << v[1], v[0];
                        return g;
                    }};
    VerificationReport r = verify_identity(prod, obs);
    CHECK(r.residual < 1e-8);
}

TEST_SUITE_END();
