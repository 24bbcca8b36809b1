#include <CLI11.hpp>

#include "fluctgeo/cli.hpp"

using fluctgeo::RunConfig;

namespace {

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--family", cfg.family, "family spec: inline JSON or builtin:<name>")
        ->required();
    cmd->add_option("--out", cfg.out, "output path (default depends on the command)");
    cmd->add_option("--format", cfg.format, "output format where a choice exists (json|csv)");
    cmd->add_option("--seed", cfg.seed, "random seed for Monte Carlo commands");
    cmd->add_option("--tol", cfg.tol, "tolerance override (0 keeps per-check defaults)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluctgeo: Riemannian structure of parametric distribution families"};
    app.require_subcommand(1);

    RunConfig cfg;

    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    add_common(verify, cfg);
    verify->add_option("--suite", cfg.suite,
                       "fluctuation|uncertainty|covariant|reconstruction|geodesic|entropy|all");

    CLI::App* geometry = app.add_subcommand("geometry", "emit a geometry grid CSV");
    add_common(geometry, cfg);
    geometry->add_option("--grid", cfg.grid, "grid spec: 's:n' (chart-uniform) or 'lo:hi:n'");

    CLI::App* geodesic = app.add_subcommand("geodesic", "integrate a geodesic, emit CSV");
    add_common(geodesic, cfg);
    geodesic->add_option("--from", cfg.from, "start point (comma-separated per dimension)");
    geodesic->add_option("--direction", cfg.direction, "initial direction");
    geodesic->add_option("--length", cfg.length, "arc length to integrate");

    CLI::App* entropy = app.add_subcommand("entropy", "emit the entropy report JSON");
    add_common(entropy, cfg);

    CLI::App* figure = app.add_subcommand("figure", "emit figure data CSV");
    add_common(figure, cfg);
    figure->add_option("--id", cfg.figure_id, "figure id: 1 (p vs s) or 2 (rho and omega)");

    CLI::App* inference = app.add_subcommand("inference", "Monte Carlo inference checks");
    add_common(inference, cfg);
    inference->add_option("--m", cfg.m, "outcomes per trial");
    inference->add_option("--trials", cfg.trials, "number of trials");
    inference->add_option("--estimator", cfg.estimator, "mean|median|mle|moment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (verify->parsed()) cfg.command = RunConfig::Command::verify;
    if (geometry->parsed()) cfg.command = RunConfig::Command::geometry;
    if (geodesic->parsed()) cfg.command = RunConfig::Command::geodesic;
    if (entropy->parsed()) cfg.command = RunConfig::Command::entropy;
    if (figure->parsed()) cfg.command = RunConfig::Command::figure;
    if (inference->parsed()) cfg.command = RunConfig::Command::inference;

    return fluctgeo::run(cfg);
}
