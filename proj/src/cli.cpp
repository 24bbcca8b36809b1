#include "fluctgeo/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <json.hpp>

#include "fluctgeo/corpus.hpp"
#include "fluctgeo/entropy.hpp"
#include "fluctgeo/family_json.hpp"
#include "fluctgeo/fluctuation.hpp"
#include "fluctgeo/geometry1d.hpp"
#include "fluctgeo/inference.hpp"
#include "fluctgeo/riemann.hpp"

namespace fluctgeo {

namespace {

using nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json json_of_matrix(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

ordered_json json_of_report(const VerificationReport& r) {
    ordered_json j;
    j["id"] = r.id;
    j["lhs"] = json_of_matrix(r.lhs);
    j["rhs"] = json_of_matrix(r.rhs);
    j["residual"] = r.residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["applicable"] = r.applicable;
    j["informational"] = r.informational;
    j["quadrature_ok"] = r.quadrature_ok;
    j["note"] = r.note;
    return j;
}

void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + tmp);
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

// -- verify suites ---------------------------------------------------------------

double pick(double override_tol, double fallback) {
    return override_tol > 0.0 ? override_tol : fallback;
}

std::vector<VerificationReport> suite_fluctuation(const AnyFamily& fam, double tol) {
    std::vector<VerificationReport> out;
    if (std::holds_alternative<Family1D>(fam)) {
        const Family1D& f = std::get<Family1D>(fam);
        BoundaryCheck bc = validate_boundary(f);
        out.push_back(bc.to_report(f.name()));
        if (!bc.conforming) {
            for (const char* id : {"mean_force_zero", "force_fluctuation", "response_correlation"}) {
                VerificationReport r;
                r.id = id;
                r.tolerance = tol;
                r.applicable = false;
                r.note = f.name() + ": boundary decay conditions violated; theorem not applicable";
                out.push_back(r);
            }
            return out;
        }
        auto reps = verify_fluctuation_theorems(f, {}, tol);
        out.insert(out.end(), reps.begin(), reps.end());
        return out;
    }
    const ProductFamily& pfam = std::get<ProductFamily>(fam);
    for (const auto& f : pfam.factors()) {
        BoundaryCheck bc = validate_boundary(f);
        if (!bc.conforming) {
            VerificationReport r;
            r.id = "mean_force_zero";
            r.tolerance = tol;
            r.applicable = false;
            r.note = pfam.name() + ": factor " + f.name() + " violates boundary decay";
            return {bc.to_report(f.name()), r};
        }
    }
    return verify_fluctuation_theorems(pfam, {}, tol);
}

std::vector<VerificationReport> suite_uncertainty(const AnyFamily& fam, double tol) {
    std::vector<VerificationReport> out;
    auto push_reports = [&](const UncertaintyReport& u, const std::string& name) {
        VerificationReport r1 =
            make_report("uncertainty_product_bound",
                        std::max(0.0, 1.0 - u.product.minCoeff()), 0.0, tol);
        r1.lhs = u.product;
        r1.rhs = Eigen::VectorXd::Ones(u.product.size());
        r1.pass = r1.residual <= r1.tolerance;
        r1.note = name + ": spread products against the lower bound 1";
        r1.quadrature_ok = u.quadrature_ok;
        out.push_back(r1);
        VerificationReport r2 = make_report("uncertainty_matrix_bound",
                                            std::max(0.0, -u.min_eigenvalue), 0.0, tol);
        r2.lhs = u.bound_gap;
        r2.rhs = Eigen::MatrixXd::Zero(u.bound_gap.rows(), u.bound_gap.cols());
        r2.pass = r2.residual <= r2.tolerance;
        r2.note = name + ": smallest eigenvalue of C - M^{-1}";
        r2.quadrature_ok = u.quadrature_ok;
        out.push_back(r2);
    };
    try {
        if (std::holds_alternative<Family1D>(fam)) {
            const Family1D& f = std::get<Family1D>(fam);
            BoundaryCheck bc = validate_boundary(f);
            if (!bc.conforming) {
                VerificationReport r;
                r.id = "uncertainty_product_bound";
                r.tolerance = tol;
                r.applicable = false;
                r.note = f.name() + ": boundary decay conditions violated; bound not applicable";
                out.push_back(r);
                return out;
            }
            push_reports(uncertainty_report(f), f.name());
        } else {
            const ProductFamily& pfam = std::get<ProductFamily>(fam);
            push_reports(uncertainty_report(pfam), pfam.name());
        }
    } catch (const std::runtime_error& e) {
        VerificationReport r;
        r.id = "uncertainty_matrix_bound";
        r.tolerance = tol;
        r.applicable = false;
        r.note = e.what();
        out.push_back(r);
    }
    return out;
}

std::vector<Geometry1D> factor_geometries(const AnyFamily& fam) {
    std::vector<Geometry1D> geoms;
    if (std::holds_alternative<Family1D>(fam)) {
        geoms.push_back(Geometry1D::build(std::get<Family1D>(fam)));
    } else {
        for (const auto& f : std::get<ProductFamily>(fam).factors())
            geoms.push_back(Geometry1D::build(f));
    }
    return geoms;
}

std::vector<VerificationReport> suite_covariant(const AnyFamily& fam, double tol) {
    std::vector<Geometry1D> geoms = factor_geometries(fam);
    CovariantCheckOptions opt;
    opt.tolerance = tol;
    if (geoms.size() == 1) return covariant_checks(geoms[0], opt);
    opt.points_per_dim = 13;
    opt.s_lo = -2.5;
    opt.s_hi = 2.5;
    return covariant_checks(GeometryN(std::move(geoms)), opt);
}

std::vector<VerificationReport> suite_reconstruction(const AnyFamily& fam, double tol) {
    std::vector<Geometry1D> geoms = factor_geometries(fam);
    double max_rel = 0.0, max_approx_dev = 0.0, max_rho = 0.0;
    if (geoms.size() == 1) {
        const Geometry1D& g = geoms[0];
        for (double x : g.chart_uniform_grid(-4.0, 4.0, 201))
            max_rho = std::max(max_rho, g.family().density(x));
        for (double x : g.chart_uniform_grid(-4.0, 4.0, 201)) {
            double rho = g.family().density(x);
            max_rel = std::max(max_rel, std::abs(reconstruct_density(g, x) - rho));
            max_approx_dev = std::max(max_approx_dev,
                                      std::abs(gaussian_approx_density(g, x) - rho));
        }
    } else {
        GeometryN gn(geoms);
        const int n = gn.dim();
        const int pts = 9;
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        std::vector<std::vector<double>> axes;
        for (int i = 0; i < n; ++i)
            axes.push_back(gn.factor(i).chart_uniform_grid(-2.5, 2.5, pts));
        bool done = false;
        while (!done) {
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i)
                x[i] = axes[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                    idx[static_cast<std::size_t>(i)])];
            double rho = gn.density(x);
            max_rho = std::max(max_rho, rho);
            max_rel = std::max(max_rel, std::abs(reconstruct_density(gn, x) - rho));
            max_approx_dev =
                std::max(max_approx_dev, std::abs(gaussian_approx_density(gn, x) - rho));
            for (int i = 0; i < n; ++i) {
                if (++idx[static_cast<std::size_t>(i)] < pts) break;
                idx[static_cast<std::size_t>(i)] = 0;
                if (i == n - 1) done = true;
            }
        }
    }
    std::vector<VerificationReport> out;
    VerificationReport r = make_report("gaussian_reconstruction", max_rel / max_rho, 0.0, tol);
    r.note = "sup |rho_hat - rho| / max rho over the chart grid";
    out.push_back(r);
    VerificationReport ra =
        make_report("gaussian_approx_deviation", max_approx_dev / max_rho, 0.0, kInf);
    ra.informational = true;
    ra.pass = true;
    ra.note = "local gaussian approximation about the mode; reported, not asserted";
    out.push_back(ra);
    return out;
}

std::vector<VerificationReport> suite_geodesic(const AnyFamily& fam, double tol_drift,
                                               double tol_len, double tol_ddS, double tol_relax) {
    std::vector<Geometry1D> geoms = factor_geometries(fam);
    std::vector<VerificationReport> out;
    const double L = 1.5;
    GeodesicOptions opt;
    opt.sample_every = L / 50.0;

    auto check_common = [&](const Trajectory& traj, double s_start_sum, double s_end_sum,
                            const std::string& name) {
        VerificationReport r1 = make_report("geodesic_affine_drift", traj.max_affine_drift, 0.0,
                                            tol_drift, name);
        out.push_back(r1);
        out.push_back(make_report("geodesic_chart_length", std::abs(s_end_sum - s_start_sum),
                                  L, tol_len, name));
        double worst = 0.0;
        const auto& st = traj.states;
        for (std::size_t k = 1; k + 1 < st.size(); ++k) {
            double dt = st[k + 1].t - st[k].t;
            double dt0 = st[k].t - st[k - 1].t;
            if (std::abs(dt - dt0) > 1e-12) continue;  // only uniform triplets
            double dd = (st[k + 1].potential - 2.0 * st[k].potential + st[k - 1].potential) /
                        (dt * dt);
            worst = std::max(worst, std::abs(dd + 1.0));
        }
        out.push_back(make_report("geodesic_potential_curvature", worst, 0.0, tol_ddS, name));
        double diss = 0.0;
        for (std::size_t k = 1; k < st.size(); ++k) {
            double ds = st[k].t - st[k - 1].t;
            double dphi = st[k].dissipation - st[k - 1].dissipation;
            diss = std::max(diss, std::abs(ds + dphi));
        }
        out.push_back(make_report("geodesic_dissipation_balance", diss, 0.0, tol_ddS, name));
    };

    if (geoms.size() == 1) {
        const Geometry1D& g = geoms[0];
        double x0 = g.inverse_chart(0.8);
        Trajectory traj = geodesic_integrate(g, x0, +1, L, opt);
        check_common(traj, g.chart(x0), g.chart(traj.back().point[0]), g.family().name());

        double xr = g.inverse_chart(2.0);
        Trajectory relax = hydrodynamic_relax(g, xr, opt);
        double d0 = g.distance(xr, g.mode());
        out.push_back(make_report("relax_terminal", std::abs(relax.back().point[0] - g.mode()),
                                  0.0, tol_relax, g.family().name()));
        out.push_back(
            make_report("relax_length", relax.length, d0, tol_relax, g.family().name()));
    } else {
        GeometryN gn(geoms);
        const int n = gn.dim();
        Eigen::VectorXd s0 = Eigen::VectorXd::Constant(n, 0.8 / std::sqrt(double(n)));
        Eigen::VectorXd x0 = gn.inverse_chart(s0);
        Eigen::VectorXd dir = Eigen::VectorXd::Ones(n);
        Trajectory traj = geodesic_integrate(gn, x0, dir, L, opt);
        double send = gn.distance(traj.back().point, x0);
        check_common(traj, 0.0, send, "product");

        Eigen::VectorXd sr = Eigen::VectorXd::Constant(n, 1.5 / std::sqrt(double(n)));
        Eigen::VectorXd xr = gn.inverse_chart(sr);
        Trajectory relax = hydrodynamic_relax(gn, xr, opt);
        double d0 = gn.distance(xr, gn.mode());
        out.push_back(make_report("relax_terminal",
                                  (relax.back().point - gn.mode()).cwiseAbs().maxCoeff(), 0.0,
                                  tol_relax, "product"));
        out.push_back(make_report("relax_length", relax.length, d0, tol_relax, "product"));
    }
    return out;
}

std::vector<VerificationReport> suite_entropy(const AnyFamily& fam, double tol) {
    std::vector<Geometry1D> geoms = factor_geometries(fam);
    std::vector<VerificationReport> out;
    if (geoms.size() == 1) {
        const Geometry1D& g = geoms[0];
        out.push_back(make_report("entropy_intrinsic", intrinsic_entropy(g), 0.5, tol,
                                  g.family().name()));
        EntropyReport e = differential_entropies(g.family(), g);
        out.push_back(make_report("entropy_jaynes_equals_geometric", e.jaynes, e.geometric,
                                  pick(0.0, 1e-9), g.family().name()));
    } else {
        GeometryN gn(geoms);
        out.push_back(make_report("entropy_intrinsic", intrinsic_entropy(gn), 0.5 * gn.dim(),
                                  tol, "product"));
        EntropyReport e = differential_entropies(gn.family(), gn);
        out.push_back(
            make_report("entropy_jaynes_equals_geometric", e.jaynes, e.geometric, 1e-9, "product"));
    }
    return out;
}

}  // namespace

std::vector<VerificationReport> run_verify_suite(const std::string& family_spec,
                                                 const std::string& suite, double tol,
                                                 std::uint64_t seed) {
    (void)seed;  // verification suites are quadrature-based and deterministic
    AnyFamily fam = parse_family_string(family_spec);
    std::vector<VerificationReport> out;
    auto run_one = [&](const std::string& s) -> std::vector<VerificationReport> {
        if (s == "fluctuation") return suite_fluctuation(fam, pick(tol, 1e-8));
        if (s == "uncertainty") return suite_uncertainty(fam, pick(tol, 1e-9));
        if (s == "covariant") return suite_covariant(fam, pick(tol, 1e-6));
        if (s == "reconstruction") return suite_reconstruction(fam, pick(tol, 1e-9));
        if (s == "geodesic")
            return suite_geodesic(fam, pick(tol, 1e-8), pick(tol, 1e-8), pick(tol, 1e-6),
                                  pick(tol, 1e-6));
        if (s == "entropy") return suite_entropy(fam, pick(tol, 1e-6));
        throw std::invalid_argument("unknown suite: " + s);
    };
    if (suite == "all") {
        const std::vector<std::string> names{"fluctuation",    "uncertainty", "covariant",
                                             "reconstruction", "geodesic",    "entropy"};
        std::vector<std::future<std::vector<VerificationReport>>> futs;
        futs.reserve(names.size());
        for (const auto& n : names)
            futs.push_back(std::async(std::launch::async, [&run_one, n] { return run_one(n); }));
        for (auto& f : futs) {
            auto reps = f.get();
            out.insert(out.end(), reps.begin(), reps.end());
        }
        return out;
    }
    return run_one(suite);
}

namespace {

// -- emitters -------------------------------------------------------------------

std::string report_json_payload(const std::vector<VerificationReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) arr.push_back(json_of_report(r));
    ReportSummary s = summarize(reports);
    ordered_json root;
    root["reports"] = arr;
    root["summary"] = {{"total", s.total}, {"passed", s.passed}, {"max_residual", s.max_residual}};
    return root.dump(2) + "\n";
}

std::string geometry_csv(const Geometry1D& geom, const std::string& grid_spec) {
    std::vector<double> xs;
    // grid forms: "s:n" (chart-uniform on [-4,4]) or "lo:hi:n"
    std::istringstream is(grid_spec);
    std::string a, b, c;
    std::getline(is, a, ':');
    std::getline(is, b, ':');
    if (std::getline(is, c, ':')) {
        double lo = std::stod(a), hi = std::stod(b);
        int n = std::stoi(c);
        const Interval& sup = geom.support();
        lo = std::max(lo, sup.lo);
        hi = std::min(hi, sup.hi);
        for (int i = 0; i < n; ++i) {
            double x = lo + (hi - lo) * (i + 0.5) / n;
            xs.push_back(x);
        }
    } else if (a == "s") {
        int n = std::stoi(b);
        xs = geom.chart_uniform_grid(-4.0, 4.0, n);
    } else {
        throw std::invalid_argument("grid spec must be 's:n' or 'lo:hi:n'");
    }
    std::ostringstream os;
    os << "I,rho,eta,p,s,g11,S,omega\n";
    for (double x : xs) {
        GeomPoint g = geom.eval(x);
        os << fmt17(x) << ',' << fmt17(geom.family().density(x)) << ','
           << fmt17(geom.family().force(x)) << ',' << fmt17(g.cumulant) << ',' << fmt17(g.chart)
           << ',' << fmt17(g.metric) << ',' << fmt17(g.potential) << ',' << fmt17(g.weight)
           << '\n';
    }
    return os.str();
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<Geometry1D>& geoms) {
    std::ostringstream os;
    const int n = static_cast<int>(geoms.size());
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",I" << i;
    for (int i = 1; i <= n; ++i) os << ",s" << i;
    os << ",S,Phi\n";
    for (const auto& st : traj.states) {
        os << fmt17(st.t);
        for (int i = 0; i < n; ++i) os << ',' << fmt17(st.point[i]);
        for (int i = 0; i < n; ++i)
            os << ',' << fmt17(geoms[static_cast<std::size_t>(i)].chart(st.point[i]));
        os << ',' << fmt17(st.potential) << ',' << fmt17(st.dissipation) << '\n';
    }
    return os.str();
}

std::string figure_csv(const Geometry1D& geom, int id) {
    std::ostringstream os;
    if (id == 1) {
        os << "p,s\n";
        for (double x : geom.chart_uniform_grid(-4.0, 4.0, 401)) {
            GeomPoint g = geom.eval(x);
            os << fmt17(g.cumulant) << ',' << fmt17(g.chart) << '\n';
        }
        return os.str();
    }
    if (id == 2) {
        os << "I,rho,omega\n";
        const Interval& sup = geom.support();
        double lo = sup.bounded_below() ? sup.lo : geom.family().quantile(2e-5);
        double hi = sup.bounded_above() ? sup.hi : geom.family().quantile(1.0 - 2e-5);
        const int n = 401;
        for (int i = 0; i < n; ++i) {
            double x = lo + (hi - lo) * (i + 0.5) / n;
            GeomPoint g = geom.eval(x);
            os << fmt17(x) << ',' << fmt17(geom.family().density(x)) << ',' << fmt17(g.weight)
               << '\n';
        }
        return os.str();
    }
    throw std::invalid_argument("figure id must be 1 or 2");
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> v;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) v.push_back(std::stod(tok));
    return v;
}

struct InferenceSetup {
    ParametricFamily pf;
    Eigen::VectorXd theta;
    EstimatorSpec est;
};

InferenceSetup inference_setup(const AnyFamily& fam, const std::string& estimator) {
    if (!std::holds_alternative<Family1D>(fam))
        throw std::invalid_argument("inference: one-dimensional families only");
    const Family1D& f = std::get<Family1D>(fam);
    const std::string& name = f.name();
    if (name.rfind("normal(", 0) == 0) {
        double mu, sigma;
        if (std::sscanf(name.c_str(), "normal(%lf,%lf)", &mu, &sigma) != 2)
            throw std::invalid_argument("inference: cannot read normal parameters");
        if (estimator == "mean" || estimator == "median") {
            ParametricFamily pf = parametric_normal_location(sigma);
            Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, mu);
            EstimatorSpec est =
                (estimator == "mean") ? sample_mean_estimator() : sample_median_estimator();
            return {pf, theta, est};
        }
        if (estimator == "mle") {
            ParametricFamily pf = parametric_normal();
            Eigen::VectorXd theta(2);
            theta << mu, sigma;
            return {pf, theta, mle_estimator(pf)};
        }
        throw std::invalid_argument("inference: estimator must be mean|median|mle for normal");
    }
    if (name.rfind("gaussian-natural", 0) == 0) {
        double t0, t1;
        if (std::sscanf(name.c_str(), "gaussian-natural@theta(%lf,%lf)", &t0, &t1) != 2)
            throw std::invalid_argument("inference: cannot read expfam parameters");
        ParametricFamily pf = parametric_expfam(gaussian_natural_family());
        Eigen::VectorXd theta(2);
        theta << t0, t1;
        EstimatorSpec est{"moment",
                          [pf](const OutcomeSet& d) { return pf.efficient_estimate(d); }, false};
        return {pf, theta, est};
    }
    throw std::invalid_argument("inference: supported families are normal and expfam");
}

}  // namespace

int run(const RunConfig& config) {
    try {
        std::string payload;
        std::string default_out = "report.json";
        std::vector<VerificationReport> reports;
        bool nonconvergence = false;

        switch (config.command) {
            case RunConfig::Command::verify: {
                reports = run_verify_suite(config.family, config.suite, config.tol, config.seed);
                payload = report_json_payload(reports);
                break;
            }
            case RunConfig::Command::geometry: {
                AnyFamily fam = parse_family_string(config.family);
                if (!std::holds_alternative<Family1D>(fam))
                    throw std::invalid_argument("geometry grids are for one-dimensional families");
                payload = geometry_csv(Geometry1D::build(std::get<Family1D>(fam)), config.grid);
                default_out = "geometry.csv";
                break;
            }
            case RunConfig::Command::geodesic: {
                AnyFamily fam = parse_family_string(config.family);
                std::vector<Geometry1D> geoms = factor_geometries(fam);
                GeodesicOptions opt;
                opt.sample_every = config.length / 200.0;
                std::vector<double> from = parse_vector(config.from);
                std::vector<double> dir = parse_vector(config.direction);
                if (from.size() != geoms.size() || dir.size() != geoms.size())
                    throw std::invalid_argument(
                        "geodesic: --from/--direction need one value per dimension");
                Trajectory traj;
                if (geoms.size() == 1) {
                    traj = geodesic_integrate(geoms[0], from[0], dir[0] >= 0 ? +1 : -1,
                                              config.length, opt);
                } else {
                    GeometryN gn(geoms);
                    traj = geodesic_integrate(
                        gn, Eigen::Map<Eigen::VectorXd>(from.data(), gn.dim()),
                        Eigen::Map<Eigen::VectorXd>(dir.data(), gn.dim()), config.length, opt);
                }
                nonconvergence = traj.truncated;
                payload = trajectory_csv(traj, geoms);
                default_out = "trajectory.csv";
                break;
            }
            case RunConfig::Command::entropy: {
                AnyFamily fam = parse_family_string(config.family);
                ordered_json j;
                if (std::holds_alternative<Family1D>(fam)) {
                    Geometry1D g = Geometry1D::build(std::get<Family1D>(fam));
                    EntropyReport e = differential_entropies(g.family(), g);
                    j["family"] = g.family().name();
                    j["naive"] = e.naive;
                    j["jaynes"] = e.jaynes;
                    j["geometric"] = e.geometric;
                    j["intrinsic"] = intrinsic_entropy(g);
                    j["chart_tag"] = e.chart_tag;
                    nonconvergence = !e.quadrature_ok;
                } else {
                    std::vector<Geometry1D> geoms = factor_geometries(fam);
                    GeometryN gn(geoms);
                    EntropyReport e = differential_entropies(gn.family(), gn);
                    j["family"] = gn.family().name();
                    j["naive"] = e.naive;
                    j["jaynes"] = e.jaynes;
                    j["geometric"] = e.geometric;
                    j["intrinsic"] = intrinsic_entropy(gn);
                    j["chart_tag"] = e.chart_tag;
                    nonconvergence = !e.quadrature_ok;
                }
                payload = j.dump(2) + "\n";
                default_out = "entropy.json";
                break;
            }
            case RunConfig::Command::figure: {
                AnyFamily fam = parse_family_string(config.family);
                if (!std::holds_alternative<Family1D>(fam))
                    throw std::invalid_argument("figures are for one-dimensional families");
                payload = figure_csv(Geometry1D::build(std::get<Family1D>(fam)), config.figure_id);
                default_out = "figure" + std::to_string(config.figure_id) + ".csv";
                break;
            }
            case RunConfig::Command::inference: {
                AnyFamily fam = parse_family_string(config.family);
                InferenceSetup setup = inference_setup(fam, config.estimator);
                RngStream rng{config.seed, 0};
                InferenceCheckResult res = verify_inference_theorems(
                    setup.pf, setup.theta, setup.est, config.m, config.trials, rng);
                reports = res.reports;
                if (config.m >= 1000 && setup.pf.has_efficient_estimator()) {
                    auto as = asymptotic_check(setup.pf, setup.theta, config.m, config.trials,
                                               rng.substream(1u << 20));
                    reports.insert(reports.end(), as.begin(), as.end());
                }
                payload = report_json_payload(reports);
                default_out = "inference.json";
                break;
            }
        }

        const std::string out_path = config.out.empty() ? default_out : config.out;
        write_atomic(out_path, payload);

        for (const auto& r : reports)
            if (!r.quadrature_ok) nonconvergence = true;
        if (nonconvergence) return 3;
        for (const auto& r : reports)
            if (r.applicable && !r.informational && !r.pass) return 1;
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace fluctgeo
