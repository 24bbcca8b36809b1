#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fluctgeo/cli.hpp"
#include "fluctgeo/corpus.hpp"
#include "fluctgeo/family_json.hpp"

using namespace fluctgeo;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "fluctgeo_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string& header) {
    std::ifstream f(p);
    std::getline(f, header);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        rows.push_back(std::move(row));
    }
    return rows;
}

int count_local_maxima(const std::vector<std::vector<double>>& rows, std::size_t col) {
    int n = 0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i)
        if (rows[i][col] > rows[i - 1][col] && rows[i][col] > rows[i + 1][col]) ++n;
    return n;
}

}  // namespace

TEST_CASE("family json parsing") {
    AnyFamily n = parse_family_string(R"({"type":"normal","mu":1.0,"sigma":2.0})");
    CHECK(std::get<Family1D>(n).name() == "normal(1,2)");

    AnyFamily m = parse_family_string(
        R"({"type":"mixture","components":[{"weight":0.5,"mu":-1,"sigma":1},{"weight":0.5,"mu":1,"sigma":1}]})");
    CHECK(std::get<Family1D>(m).density(0.0) > 0.0);

    AnyFamily t = parse_family_string(R"({"type":"triangle","a":2.0})");
    CHECK(std::get<Family1D>(t).support().hi == 2.0);

    AnyFamily e = parse_family_string(R"({"type":"expfam","theta":[-2.0,1.0]})");
    CHECK(std::get<Family1D>(e).support().lo == -kInf);

    AnyFamily p = parse_family_string(
        R"({"type":"product","factors":[{"type":"normal","mu":0,"sigma":1},{"type":"uniform","lo":0,"hi":1}]})");
    CHECK(std::get<ProductFamily>(p).dim() == 2);

    CHECK(std::get<Family1D>(parse_family_string("builtin:mixture")).name() == "mixture(2)");

    CHECK_THROWS_AS((void)parse_family_string(R"({"type":"normal","mu":0,"sigma":1,"typo":3})"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)parse_family_string(R"({"type":"sinusoid"})"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_family_string("not json at all"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_family_string("builtin:missing"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_family_string(R"({"type":"uniform","lo":1,"hi":0})"),
                    std::invalid_argument);
}

TEST_CASE("verify command writes a gating report") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::verify;
    cfg.family = "builtin:normal";
    cfg.suite = "fluctuation";
    cfg.out = temp_file("verify_normal.json").string();
    CHECK(run(cfg) == 0);

    nlohmann::json j = nlohmann::json::parse(slurp(cfg.out));
    REQUIRE(j.contains("reports"));
    REQUIRE(j.contains("summary"));
    CHECK(j["summary"]["total"].get<int>() == 3);
    CHECK(j["summary"]["passed"].get<int>() == 3);
    CHECK(j["summary"]["max_residual"].get<double>() < 1e-8);
    for (const auto& r : j["reports"])
        if (r["applicable"].get<bool>() && !r["informational"].get<bool>())
            CHECK(r["pass"].get<bool>());
}

TEST_CASE("verify marks non-conforming families as not applicable") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::verify;
    cfg.family = R"({"type":"uniform","lo":0,"hi":1})";
    cfg.suite = "fluctuation";
    cfg.out = temp_file("verify_uniform.json").string();
    CHECK(run(cfg) == 0);  // not-applicable checks do not gate
    nlohmann::json j = nlohmann::json::parse(slurp(cfg.out));
    int not_applicable = 0;
    for (const auto& r : j["reports"])
        if (!r["applicable"].get<bool>()) ++not_applicable;
    CHECK(not_applicable == 3);
    CHECK(j["summary"]["total"].get<int>() == 0);
}

TEST_CASE("verify entropy suite reports the intrinsic value") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::verify;
    cfg.family = R"({"type":"uniform","lo":0,"hi":1})";
    cfg.suite = "entropy";
    cfg.out = temp_file("verify_uniform_entropy.json").string();
    CHECK(run(cfg) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(cfg.out));
    bool found = false;
    for (const auto& r : j["reports"])
        if (r["id"] == "entropy_intrinsic") {
            found = true;
            CHECK(std::abs(r["lhs"][0][0].get<double>() - 0.5) < 1e-6);
        }
    CHECK(found);
}

TEST_CASE("reports are byte-identical across reruns") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::verify;
    cfg.family = "builtin:mixture";
    cfg.suite = "uncertainty";
    cfg.out = temp_file("det_a.json").string();
    CHECK(run(cfg) == 0);
    std::string first = slurp(cfg.out);
    cfg.out = temp_file("det_b.json").string();
    CHECK(run(cfg) == 0);
    CHECK(first == slurp(cfg.out));

    // Monte Carlo command with a fixed seed is reproducible too
    RunConfig inf;
    inf.command = RunConfig::Command::inference;
    inf.family = "builtin:normal";
    inf.estimator = "mean";
    inf.m = 50;
    inf.trials = 200;
    inf.seed = 99;
    inf.out = temp_file("inf_a.json").string();
    int rc1 = run(inf);
    std::string ia = slurp(inf.out);
    inf.out = temp_file("inf_b.json").string();
    int rc2 = run(inf);
    CHECK(rc1 == rc2);
    CHECK(ia == slurp(inf.out));
}

TEST_CASE("config errors exit with status 2") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::verify;
    cfg.family = R"({"type":"normal","mu":0})";  // missing sigma
    cfg.out = temp_file("never.json").string();
    CHECK(run(cfg) == 2);
    cfg.family = "builtin:normal";
    cfg.suite = "nonsense";
    CHECK(run(cfg) == 2);
}

TEST_CASE("geometry grid emission") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::geometry;
    cfg.family = "builtin:mixture";
    cfg.grid = "s:41";
    cfg.out = temp_file("grid.csv").string();
    CHECK(run(cfg) == 0);
    std::string header;
    auto rows = read_csv(cfg.out, header);
    CHECK(header == "I,rho,eta,p,s,g11,S,omega");
    CHECK(rows.size() == 41);
    // s column is monotone increasing
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][4] > rows[i - 1][4]);

    cfg.grid = "-1:1:10";
    cfg.out = temp_file("grid2.csv").string();
    CHECK(run(cfg) == 0);
    auto rows2 = read_csv(cfg.out, header);
    CHECK(rows2.size() == 10);
}

TEST_CASE("figure emission with shape checks") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::figure;
    cfg.family = "builtin:mixture";
    cfg.figure_id = 1;
    cfg.out = temp_file("fig1.csv").string();
    CHECK(run(cfg) == 0);
    std::string header;
    auto rows = read_csv(cfg.out, header);
    CHECK(header == "p,s");
    bool zero_at_half = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][0] >= rows[i - 1][0]);  // monotone in p
        if (std::abs(rows[i][1]) < 1e-12) {
            zero_at_half = true;
            CHECK(rows[i][0] == doctest::Approx(0.5).epsilon(1e-9));
        }
    }
    CHECK(zero_at_half);

    cfg.figure_id = 2;
    cfg.out = temp_file("fig2.csv").string();
    CHECK(run(cfg) == 0);
    auto rows2 = read_csv(cfg.out, header);
    CHECK(header == "I,rho,omega");
    CHECK(count_local_maxima(rows2, 1) == 2);  // density is bimodal
    CHECK(count_local_maxima(rows2, 2) == 1);  // weight is monomodal
}

TEST_CASE("geodesic trajectory emission") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::geodesic;
    cfg.family = "builtin:normal";
    cfg.from = "0.0";
    cfg.direction = "1";
    cfg.length = 2.0;
    cfg.out = temp_file("traj.csv").string();
    CHECK(run(cfg) == 0);
    std::string header;
    auto rows = read_csv(cfg.out, header);
    CHECK(header == "t,I1,s1,S,Phi");
    CHECK(rows.front()[0] == 0.0);
    CHECK(rows.back()[0] == doctest::Approx(2.0));
    CHECK(rows.back()[1] == doctest::Approx(2.0).epsilon(1e-8));

    // two-dimensional product trajectory carries one column pair per factor
    RunConfig p = cfg;
    p.family =
        R"({"type":"product","factors":[{"type":"normal","mu":0,"sigma":1},{"type":"uniform","lo":0,"hi":1}]})";
    p.from = "0.0,0.5";
    p.direction = "1,1";
    p.length = 1.0;
    p.out = temp_file("traj2.csv").string();
    CHECK(run(p) == 0);
    auto rows2 = read_csv(p.out, header);
    CHECK(header == "t,I1,I2,s1,s2,S,Phi");
    CHECK(rows2.back()[0] == doctest::Approx(1.0));
}

TEST_CASE("entropy command emits the report") {
    RunConfig cfg;
    cfg.command = RunConfig::Command::entropy;
    cfg.family = "builtin:triangle";
    cfg.out = temp_file("entropy.json").string();
    CHECK(run(cfg) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(cfg.out));
    CHECK(std::abs(j["intrinsic"].get<double>() - 0.5) < 1e-6);
    CHECK(std::abs(j["jaynes"].get<double>() - j["geometric"].get<double>()) < 1e-9);
}

TEST_SUITE_END();
