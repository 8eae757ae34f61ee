#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nngp::cli {

struct CommonOptions {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned threads = 0; // 0 = hardware concurrency
};

// ---------------------------------------------------------------------------
// simulate: random-field draws through the sparse factor

struct SimulateConfig {
    CommonOptions common;
    int n = 1000;
    int m = 15;
    std::string kernel = "exponential";
    double sigma2 = 1.0;
    double phi = 1.0;
    double tau2 = 0.0;
    std::string target = "latent"; // latent | response
    std::string ordering = "coordinate"; // coordinate | random
    int draws = 100;
};
void cmd_simulate(const SimulateConfig& config);

// ---------------------------------------------------------------------------
// decorrelate-exp: dense-GP replicates pushed through the factor

struct DecorrelateConfig {
    CommonOptions common;
    int n = 200;
    int m = 10;
    std::string kernel = "exponential";
    double sigma2 = 1.0;
    double phi = 1.0;
    double tau2 = 0.0;
    int replicates = 2000;
    std::size_t dense_max_n = 8192; // refuse dense simulation above this
};
struct DecorrelateSummary {
    double mean_diag = 0.0;
    double mean_abs_offdiag = 0.0;
};
DecorrelateSummary cmd_decorrelate_experiment(const DecorrelateConfig& config);

// ---------------------------------------------------------------------------
// sim-compare: dense vs sparse sample covariances

struct SimCompareConfig {
    CommonOptions common;
    int n = 100;
    int m = 5;
    std::string kernel = "exponential";
    double sigma2 = 1.0;
    double phi = 1.0;
    int replicates = 10000;
    std::size_t dense_max_n = 8192;
};
struct SimCompareSummary {
    double mean_difference = 0.0; // mean entry of S_nngp - S_dense
};
SimCompareSummary cmd_sim_compare(const SimCompareConfig& config);

// ---------------------------------------------------------------------------
// bench: wall times for sparse and dense simulation

struct BenchConfig {
    CommonOptions common;
    std::vector<int> n_grid{1000, 2500, 5000};
    int m = 15;
    std::string kernel = "exponential";
    double sigma2 = 1.0;
    double phi = 1.0;
    int draws = 100;
    int repeats = 3;
    std::size_t dense_max_n = 8192;
};
struct BenchRow {
    std::string method; // nngp | dense
    int n = 0;
    bool feasible = true;
    double mean_seconds = 0.0;
    double sd_seconds = 0.0;
};
std::vector<BenchRow> run_bench(const BenchConfig& config); // no file output
void cmd_bench(const BenchConfig& config);

// ---------------------------------------------------------------------------
// homoskedasticity: marginal variances of the factor by order index

struct HomoskedasticityConfig {
    CommonOptions common;
    int n = 200;
    int m = 5;
    std::string kernel = "exponential";
    double sigma2 = 1.0;
    double phi = 1.0;
};
struct HomoskedasticitySummary {
    double coordinate_min_variance = 0.0;
    double random_min_variance = 0.0;
};
HomoskedasticitySummary cmd_homoskedasticity(const HomoskedasticityConfig& config);

// ---------------------------------------------------------------------------
// fit / bootstrap / rfgls: CSV-driven model fitting

struct FitConfig {
    CommonOptions common;
    std::string input;         // CSV with sx, sy, y, x1..xp
    std::string from_draws;    // alternative: simulate output
    int draw_index = 0;        // column into from_draws
    int m = 15;
    std::string kernel = "exponential";
    double init_sigma2 = 1.0;
    double init_phi = 1.0;
    double init_tau2 = 0.1;
    std::string ordering = "coordinate";
};
struct FitSummary {
    std::vector<double> beta;
    double sigma2 = 0.0;
    double phi = 0.0;
    double tau2 = 0.0;
    double loglik = 0.0;
    bool converged = false;
};
FitSummary cmd_fit(const FitConfig& config);

struct BootstrapConfig {
    FitConfig fit;
    int B = 250;
    double level = 0.95;
};
void cmd_bootstrap(const BootstrapConfig& config);

struct RfglsConfig {
    CommonOptions common;
    std::string input;        // CSV with sx, sy, y, x1..xp (p >= 1)
    std::string predict_input; // optional CSV with sx, sy, x1..xp
    int m = 15;
    std::string kernel = "exponential";
    double init_sigma2 = 1.0;
    double init_phi = 1.0;
    double init_tau2 = 0.1;
    int n_trees = 50;
    int min_node_size = 5;
    int max_leaves = 0;
    int mtry = 0;
    bool kriging = true; // add kriged residuals to new-location predictions
};
void cmd_rfgls(const RfglsConfig& config);

// ---------------------------------------------------------------------------
// dagar: areal diagnostics over a rho grid

struct DagarConfig {
    CommonOptions common;
    std::string edges_path;
    std::vector<double> rho_grid{0.1, 0.3, 0.5, 0.7, 0.9};
    double sigma2 = 1.0;
    std::string ordering = "input"; // input | degree | random
    int grid_rows = 0;              // both > 0 enables grid symmetry groups
    int grid_cols = 0;
};
void cmd_dagar(const DagarConfig& config);

} // namespace nngp::cli
