#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace nngp::cli;

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--seed", common.seed, "Master RNG seed");
    cmd->add_option("--out-dir", common.out_dir, "Output directory");
    cmd->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
    cmd->set_config("--config", "", "TOML/INI config file");
}

const std::vector<std::string> kKernels{"exponential", "matern32", "gaussian"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nearest-neighbor sparse Cholesky toolkit for Gaussian-process models"};
    app.require_subcommand(1);

    SimulateConfig simulate_cfg;
    auto* simulate = app.add_subcommand("simulate", "Draw Gaussian random fields through the sparse factor");
    add_common(simulate, simulate_cfg.common);
    simulate->add_option("--n", simulate_cfg.n, "Number of locations");
    simulate->add_option("--m", simulate_cfg.m, "Neighbors per location");
    simulate->add_option("--kernel", simulate_cfg.kernel)->check(CLI::IsMember(kKernels));
    simulate->add_option("--sigma2", simulate_cfg.sigma2);
    simulate->add_option("--phi", simulate_cfg.phi);
    simulate->add_option("--tau2", simulate_cfg.tau2);
    simulate->add_option("--target", simulate_cfg.target)->check(CLI::IsMember({"latent", "response"}));
    simulate->add_option("--ordering", simulate_cfg.ordering)->check(CLI::IsMember({"coordinate", "random"}));
    simulate->add_option("--draws", simulate_cfg.draws);
    simulate->callback([&] { cmd_simulate(simulate_cfg); });

    DecorrelateConfig decorrelate_cfg;
    auto* decorrelate = app.add_subcommand("decorrelate-exp", "Decorrelate dense-GP replicates with the sparse factor");
    add_common(decorrelate, decorrelate_cfg.common);
    decorrelate->add_option("--n", decorrelate_cfg.n);
    decorrelate->add_option("--m", decorrelate_cfg.m);
    decorrelate->add_option("--kernel", decorrelate_cfg.kernel)->check(CLI::IsMember(kKernels));
    decorrelate->add_option("--sigma2", decorrelate_cfg.sigma2);
    decorrelate->add_option("--phi", decorrelate_cfg.phi);
    decorrelate->add_option("--tau2", decorrelate_cfg.tau2);
    decorrelate->add_option("--replicates", decorrelate_cfg.replicates);
    decorrelate->callback([&] { cmd_decorrelate_experiment(decorrelate_cfg); });

    SimCompareConfig sim_compare_cfg;
    auto* sim_compare = app.add_subcommand("sim-compare", "Compare dense and sparse simulation sample covariances");
    add_common(sim_compare, sim_compare_cfg.common);
    sim_compare->add_option("--n", sim_compare_cfg.n);
    sim_compare->add_option("--m", sim_compare_cfg.m);
    sim_compare->add_option("--kernel", sim_compare_cfg.kernel)->check(CLI::IsMember(kKernels));
    sim_compare->add_option("--sigma2", sim_compare_cfg.sigma2);
    sim_compare->add_option("--phi", sim_compare_cfg.phi);
    sim_compare->add_option("--replicates", sim_compare_cfg.replicates);
    sim_compare->callback([&] { cmd_sim_compare(sim_compare_cfg); });

    BenchConfig bench_cfg;
    auto* bench = app.add_subcommand("bench", "Time sparse and dense simulation across sample sizes");
    add_common(bench, bench_cfg.common);
    bench->add_option("--n-grid", bench_cfg.n_grid, "Sample sizes to benchmark");
    bench->add_option("--m", bench_cfg.m);
    bench->add_option("--kernel", bench_cfg.kernel)->check(CLI::IsMember(kKernels));
    bench->add_option("--sigma2", bench_cfg.sigma2);
    bench->add_option("--phi", bench_cfg.phi);
    bench->add_option("--draws", bench_cfg.draws);
    bench->add_option("--repeats", bench_cfg.repeats);
    bench->add_option("--dense-max-n", bench_cfg.dense_max_n, "Dense simulation refused above this n");
    bench->callback([&] { cmd_bench(bench_cfg); });

    HomoskedasticityConfig homo_cfg;
    auto* homo = app.add_subcommand("homoskedasticity", "Marginal factor variances by order index");
    add_common(homo, homo_cfg.common);
    homo->add_option("--n", homo_cfg.n);
    homo->add_option("--m", homo_cfg.m);
    homo->add_option("--kernel", homo_cfg.kernel)->check(CLI::IsMember(kKernels));
    homo->add_option("--sigma2", homo_cfg.sigma2);
    homo->add_option("--phi", homo_cfg.phi);
    homo->callback([&] { cmd_homoskedasticity(homo_cfg); });

    auto add_fit_options = [&](CLI::App* cmd, FitConfig& cfg) {
        add_common(cmd, cfg.common);
        cmd->add_option("--input", cfg.input, "CSV with sx, sy, y, x1..xp");
        cmd->add_option("--from-draws", cfg.from_draws, "simulate output CSV");
        cmd->add_option("--draw-index", cfg.draw_index, "Draw column used as the response");
        cmd->add_option("--m", cfg.m);
        cmd->add_option("--kernel", cfg.kernel)->check(CLI::IsMember(kKernels));
        cmd->add_option("--init-sigma2", cfg.init_sigma2);
        cmd->add_option("--init-phi", cfg.init_phi);
        cmd->add_option("--init-tau2", cfg.init_tau2);
        cmd->add_option("--ordering", cfg.ordering)->check(CLI::IsMember({"coordinate", "random"}));
    };

    FitConfig fit_cfg;
    auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit of the spatial linear model");
    add_fit_options(fit, fit_cfg);
    fit->callback([&] { cmd_fit(fit_cfg); });

    BootstrapConfig bootstrap_cfg;
    auto* bootstrap = app.add_subcommand("bootstrap", "Percentile bootstrap intervals for the fitted parameters");
    add_fit_options(bootstrap, bootstrap_cfg.fit);
    bootstrap->add_option("--B", bootstrap_cfg.B, "Bootstrap replicates");
    bootstrap->add_option("--level", bootstrap_cfg.level, "Interval coverage level");
    bootstrap->callback([&] { cmd_bootstrap(bootstrap_cfg); });

    RfglsConfig rfgls_cfg;
    auto* rfgls = app.add_subcommand("rfgls", "GLS random forest under the fitted spatial covariance");
    add_common(rfgls, rfgls_cfg.common);
    rfgls->add_option("--input", rfgls_cfg.input, "CSV with sx, sy, y, x1..xp")->required();
    rfgls->add_option("--predict", rfgls_cfg.predict_input, "CSV with sx, sy, x1..xp");
    rfgls->add_option("--m", rfgls_cfg.m);
    rfgls->add_option("--kernel", rfgls_cfg.kernel)->check(CLI::IsMember(kKernels));
    rfgls->add_option("--init-sigma2", rfgls_cfg.init_sigma2);
    rfgls->add_option("--init-phi", rfgls_cfg.init_phi);
    rfgls->add_option("--init-tau2", rfgls_cfg.init_tau2);
    rfgls->add_option("--n-trees", rfgls_cfg.n_trees);
    rfgls->add_option("--min-node-size", rfgls_cfg.min_node_size);
    rfgls->add_option("--max-leaves", rfgls_cfg.max_leaves);
    rfgls->add_option("--mtry", rfgls_cfg.mtry);
    rfgls->add_flag("--kriging,!--no-kriging", rfgls_cfg.kriging, "Krige residuals at new locations");
    rfgls->callback([&] { cmd_rfgls(rfgls_cfg); });

    DagarConfig dagar_cfg;
    auto* dagar = app.add_subcommand("dagar", "DAGAR and CAR diagnostics on an areal graph");
    add_common(dagar, dagar_cfg.common);
    dagar->add_option("--edges", dagar_cfg.edges_path, "Edge-list file (i j per line)")->required();
    dagar->add_option("--rho-grid", dagar_cfg.rho_grid);
    dagar->add_option("--sigma2", dagar_cfg.sigma2);
    dagar->add_option("--ordering", dagar_cfg.ordering)->check(CLI::IsMember({"input", "degree", "random"}));
    dagar->add_option("--grid-rows", dagar_cfg.grid_rows);
    dagar->add_option("--grid-cols", dagar_cfg.grid_cols);
    dagar->callback([&] { cmd_dagar(dagar_cfg); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
