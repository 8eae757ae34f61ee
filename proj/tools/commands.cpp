#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "csv.hpp"
#include "nngp/bootstrap.hpp"
#include "nngp/dagar.hpp"
#include "nngp/inference.hpp"
#include "nngp/parallel.hpp"
#include "nngp/rfgls.hpp"
#include "nngp/rng.hpp"
#include "nngp/sparse_cholesky.hpp"

namespace nngp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string out_path(const CommonOptions& common, const std::string& file) {
    fs::create_directories(common.out_dir);
    return (fs::path(common.out_dir) / file).string();
}

void write_manifest(const CommonOptions& common, const std::string& command, json params,
                    double wall_seconds, std::vector<std::string> outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["seed"] = common.seed;
    manifest["threads"] = common.threads;
    manifest["parameters"] = std::move(params);
    manifest["wall_time_seconds"] = wall_seconds;
    manifest["outputs"] = std::move(outputs);
    const std::string path = out_path(common, command + "_manifest.json");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open manifest for writing");
    out << manifest.dump(2) << '\n';
}

CovarianceSpec make_spec(const std::string& kernel, double sigma2, double phi, double tau2) {
    CovarianceSpec spec{kernel_family_from_string(kernel), sigma2, phi, tau2};
    spec.validate();
    return spec;
}

OrderingStrategy ordering_from_string(const std::string& name) {
    if (name == "coordinate") return OrderingStrategy::CoordinateSort;
    if (name == "random") return OrderingStrategy::Random;
    throw std::invalid_argument("unknown ordering '" + name + "' (use coordinate or random)");
}

std::vector<Point> uniform_points(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> points(static_cast<std::size_t>(n));
    for (auto& p : points) {
        p.x = rng.uniform();
        p.y = rng.uniform();
    }
    return points;
}

unsigned resolve_threads(const CommonOptions& common) {
    return common.threads == 0 ? default_thread_count() : common.threads;
}

// Lower Cholesky of the dense covariance of the ordered locations.
Eigen::MatrixXd dense_gp_cholesky(const LocationSet& locs, const CovarianceSpec& spec,
                                  bool nugget) {
    const std::vector<Point> pts = locs.ordered_points();
    const Eigen::MatrixXd cov = cross_covariance(spec, pts, pts, nugget);
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("dense covariance is not positive definite");
    return llt.matrixL();
}

Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    return z;
}

// Streaming mean and covariance accumulator over replicate vectors.
class CovarianceAccumulator {
public:
    explicit CovarianceAccumulator(Eigen::Index n)
        : sum_(Eigen::VectorXd::Zero(n)), cross_(Eigen::MatrixXd::Zero(n, n)) {}

    void add(const Eigen::VectorXd& v) {
        sum_ += v;
        cross_.selfadjointView<Eigen::Lower>().rankUpdate(v);
        ++count_;
    }

    Eigen::MatrixXd sample_covariance() const {
        if (count_ < 2) throw std::runtime_error("sample covariance needs at least 2 replicates");
        const double r = static_cast<double>(count_);
        const Eigen::VectorXd mean = sum_ / r;
        Eigen::MatrixXd cross = cross_.selfadjointView<Eigen::Lower>();
        return (cross - r * mean * mean.transpose()) / (r - 1.0);
    }

private:
    Eigen::VectorXd sum_;
    Eigen::MatrixXd cross_;
    long count_ = 0;
};

std::vector<std::vector<double>> matrix_rows(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].assign(m.row(i).begin(), m.row(i).end());
    }
    return rows;
}

struct LoadedData {
    RegressionData data;
    int n_features = 0; // columns beyond the intercept
};

// Reads sx, sy, y plus any x-prefixed feature columns; the design gets an
// intercept column first.
LoadedData load_regression_csv(const std::string& path, const std::string& ordering,
                               bool require_features) {
    const CsvTable table = read_csv(path);
    const int sx = table.require_column("sx");
    const int sy = table.require_column("sy");
    const int yc = table.require_column("y");
    std::vector<int> feature_cols;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        const auto& name = table.columns[j];
        if (name.size() > 1 && name[0] == 'x' && name != "y")
            feature_cols.push_back(static_cast<int>(j));
    }
    if (require_features && feature_cols.empty())
        throw std::runtime_error(path + ": need at least one feature column x1..xp");

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    std::vector<Point> points(table.rows.size());
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, 1 + static_cast<Eigen::Index>(feature_cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        points[static_cast<std::size_t>(i)] = {row[static_cast<std::size_t>(sx)],
                                               row[static_cast<std::size_t>(sy)]};
        y[i] = row[static_cast<std::size_t>(yc)];
        X(i, 0) = 1.0;
        for (std::size_t f = 0; f < feature_cols.size(); ++f)
            X(i, 1 + static_cast<Eigen::Index>(f)) =
                row[static_cast<std::size_t>(feature_cols[f])];
    }
    LoadedData loaded{RegressionData{std::move(y), std::move(X),
                                     order_locations(std::move(points),
                                                     ordering_from_string(ordering))},
                      static_cast<int>(feature_cols.size())};
    return loaded;
}

// Reads cmd_simulate output and treats one draw column as the response.
RegressionData load_from_draws(const std::string& path, int draw_index,
                               const std::string& ordering) {
    const CsvTable table = read_csv(path);
    const int xc = table.require_column("x");
    const int yc = table.require_column("y");
    const int dc = table.column_index("draw" + std::to_string(draw_index));
    if (dc < 0)
        throw std::runtime_error(path + ": no column draw" + std::to_string(draw_index));
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    std::vector<Point> points(table.rows.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        points[static_cast<std::size_t>(i)] = {row[static_cast<std::size_t>(xc)],
                                               row[static_cast<std::size_t>(yc)]};
        y[i] = row[static_cast<std::size_t>(dc)];
    }
    return RegressionData{std::move(y), Eigen::MatrixXd::Ones(n, 1),
                          order_locations(std::move(points), ordering_from_string(ordering))};
}

FitResult fit_from_config(const FitConfig& config, const RegressionData& data,
                          const NeighborGraph& graph) {
    const CovarianceSpec init =
        make_spec(config.kernel, config.init_sigma2, config.init_phi, config.init_tau2);
    return fit_mle(data, graph, init, resolve_threads(config.common));
}

json fit_to_json(const FitResult& fit) {
    json out;
    out["beta"] = std::vector<double>(fit.beta.begin(), fit.beta.end());
    out["sigma2"] = fit.spec.sigma2;
    out["phi"] = fit.spec.phi;
    out["tau2"] = fit.spec.tau2;
    out["kernel"] = to_string(fit.spec.family);
    out["loglik"] = fit.loglik;
    out["converged"] = fit.converged;
    out["iterations"] = fit.iterations;
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

void cmd_simulate(const SimulateConfig& config) {
    Stopwatch watch;
    if (config.n < 1) throw std::invalid_argument("simulate: n must be >= 1");
    if (config.draws < 1) throw std::invalid_argument("simulate: draws must be >= 1");
    const CovarianceSpec spec = make_spec(config.kernel, config.sigma2, config.phi, config.tau2);
    const FactorTarget target = config.target == "response" ? FactorTarget::Response
                              : config.target == "latent"
                                  ? FactorTarget::Latent
                                  : throw std::invalid_argument("simulate: target must be latent or response");

    const unsigned threads = resolve_threads(config.common);
    const LocationSet locs =
        order_locations(uniform_points(config.n, derive_seed(config.common.seed, 101)),
                        ordering_from_string(config.ordering),
                        derive_seed(config.common.seed, 102));
    const NeighborGraph graph = build_neighbor_graph(locs, config.m);
    const SparseCholesky chol = build_factor(locs, graph, spec, target, threads);
    const Eigen::MatrixXd draws = simulate(chol, config.common.seed, config.draws, threads);

    std::vector<std::string> columns{"x", "y"};
    for (int d = 0; d < config.draws; ++d) columns.push_back("draw" + std::to_string(d));
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(config.n));
    for (int k = 0; k < config.n; ++k) {
        auto& row = rows[static_cast<std::size_t>(k)];
        row.reserve(columns.size());
        const Point& p = locs.ordered(static_cast<std::size_t>(k));
        row.push_back(p.x);
        row.push_back(p.y);
        for (int d = 0; d < config.draws; ++d) row.push_back(draws(k, d));
    }
    const std::string draws_path = out_path(config.common, "draws.csv");
    write_csv(draws_path, columns, rows);

    write_manifest(config.common, "simulate",
                   json{{"n", config.n},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"sigma2", config.sigma2},
                        {"phi", config.phi},
                        {"tau2", config.tau2},
                        {"target", config.target},
                        {"ordering", config.ordering},
                        {"draws", config.draws}},
                   watch.seconds(), {draws_path});
}

// ---------------------------------------------------------------------------

DecorrelateSummary cmd_decorrelate_experiment(const DecorrelateConfig& config) {
    Stopwatch watch;
    if (config.replicates < 2)
        throw std::invalid_argument(
            "decorrelate-exp: sample covariance needs at least 2 replicates");
    if (static_cast<std::size_t>(config.n) > config.dense_max_n) {
        std::ostringstream msg;
        msg << "decorrelate-exp: n = " << config.n
            << " exceeds the dense simulation limit of " << config.dense_max_n
            << "; dense replicate generation would exhaust memory";
        throw std::invalid_argument(msg.str());
    }
    const CovarianceSpec spec = make_spec(config.kernel, config.sigma2, config.phi, config.tau2);
    const LocationSet locs =
        order_locations(uniform_points(config.n, derive_seed(config.common.seed, 101)),
                        OrderingStrategy::CoordinateSort);
    const NeighborGraph graph = build_neighbor_graph(locs, config.m);
    const SparseCholesky chol = build_factor(locs, graph, spec, FactorTarget::Response);
    const Eigen::MatrixXd dense_chol = dense_gp_cholesky(locs, spec, true);

    CovarianceAccumulator acc(config.n);
    for (int r = 0; r < config.replicates; ++r) {
        const Eigen::VectorXd z =
            normal_vector(config.n, derive_seed(config.common.seed, static_cast<std::uint64_t>(r)));
        acc.add(apply_factor(chol, dense_chol * z));
    }
    const Eigen::MatrixXd cov = acc.sample_covariance();

    DecorrelateSummary summary;
    std::vector<std::vector<double>> entries;
    entries.reserve(static_cast<std::size_t>(config.n) * static_cast<std::size_t>(config.n + 1) / 2);
    for (int i = 0; i < config.n; ++i) {
        summary.mean_diag += cov(i, i);
        entries.push_back({1.0, cov(i, i)});
        for (int j = 0; j < i; ++j) {
            summary.mean_abs_offdiag += std::abs(cov(i, j));
            entries.push_back({0.0, cov(i, j)});
        }
    }
    summary.mean_diag /= config.n;
    summary.mean_abs_offdiag /= 0.5 * config.n * (config.n - 1);

    const std::string cov_path = out_path(config.common, "decorrelated_cov.csv");
    write_csv(cov_path, [&] {
        std::vector<std::string> cols;
        for (int j = 0; j < config.n; ++j) cols.push_back("c" + std::to_string(j));
        return cols;
    }(), matrix_rows(cov));
    const std::string entries_path = out_path(config.common, "decorrelated_entries.csv");
    write_csv(entries_path, {"is_diagonal", "value"}, entries);

    write_manifest(config.common, "decorrelate-exp",
                   json{{"n", config.n},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"sigma2", config.sigma2},
                        {"phi", config.phi},
                        {"tau2", config.tau2},
                        {"replicates", config.replicates},
                        {"mean_diag", summary.mean_diag},
                        {"mean_abs_offdiag", summary.mean_abs_offdiag}},
                   watch.seconds(), {cov_path, entries_path});
    return summary;
}

// ---------------------------------------------------------------------------

SimCompareSummary cmd_sim_compare(const SimCompareConfig& config) {
    Stopwatch watch;
    if (config.replicates < 2)
        throw std::invalid_argument("sim-compare: need at least 2 replicates");
    if (static_cast<std::size_t>(config.n) > config.dense_max_n)
        throw std::invalid_argument("sim-compare: n exceeds the dense simulation limit");
    const CovarianceSpec spec = make_spec(config.kernel, config.sigma2, config.phi, 0.0);
    const LocationSet locs =
        order_locations(uniform_points(config.n, derive_seed(config.common.seed, 101)),
                        OrderingStrategy::CoordinateSort);
    const NeighborGraph graph = build_neighbor_graph(locs, config.m);
    const SparseCholesky chol = build_factor(locs, graph, spec, FactorTarget::Latent);
    const Eigen::MatrixXd dense_chol = dense_gp_cholesky(locs, spec, false);

    const std::uint64_t dense_seed = derive_seed(config.common.seed, 1);
    const std::uint64_t sparse_seed = derive_seed(config.common.seed, 2);
    CovarianceAccumulator acc_dense(config.n);
    CovarianceAccumulator acc_sparse(config.n);
    for (int r = 0; r < config.replicates; ++r) {
        acc_dense.add(dense_chol *
                      normal_vector(config.n, derive_seed(dense_seed, static_cast<std::uint64_t>(r))));
        acc_sparse.add(backsolve_factor(
            chol, normal_vector(config.n, derive_seed(sparse_seed, static_cast<std::uint64_t>(r)))));
    }
    const Eigen::MatrixXd cov_dense = acc_dense.sample_covariance();
    const Eigen::MatrixXd cov_sparse = acc_sparse.sample_covariance();
    const Eigen::MatrixXd diff = cov_sparse - cov_dense;

    SimCompareSummary summary;
    std::vector<std::vector<double>> diff_entries;
    long count = 0;
    for (int i = 0; i < config.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            diff_entries.push_back({static_cast<double>(i == j), diff(i, j)});
            summary.mean_difference += diff(i, j);
            ++count;
        }
    }
    summary.mean_difference /= static_cast<double>(count);

    auto cov_columns = [&] {
        std::vector<std::string> cols;
        for (int j = 0; j < config.n; ++j) cols.push_back("c" + std::to_string(j));
        return cols;
    };
    const std::string dense_path = out_path(config.common, "cov_dense.csv");
    write_csv(dense_path, cov_columns(), matrix_rows(cov_dense));
    const std::string sparse_path = out_path(config.common, "cov_nngp.csv");
    write_csv(sparse_path, cov_columns(), matrix_rows(cov_sparse));
    const std::string diff_path = out_path(config.common, "cov_difference_entries.csv");
    write_csv(diff_path, {"is_diagonal", "value"}, diff_entries);

    write_manifest(config.common, "sim-compare",
                   json{{"n", config.n},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"sigma2", config.sigma2},
                        {"phi", config.phi},
                        {"replicates", config.replicates},
                        {"mean_difference", summary.mean_difference}},
                   watch.seconds(), {dense_path, sparse_path, diff_path});
    return summary;
}

// ---------------------------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = mean_of(v);
    double acc = 0.0;
    for (const double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    if (config.n_grid.empty()) throw std::invalid_argument("bench: empty n grid");
    if (config.repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
    const CovarianceSpec spec = make_spec(config.kernel, config.sigma2, config.phi, 0.0);
    std::vector<BenchRow> rows;
    for (const int n : config.n_grid) {
        const std::vector<Point> points =
            uniform_points(n, derive_seed(config.common.seed, static_cast<std::uint64_t>(n)));

        std::vector<double> sparse_times;
        for (int rep = 0; rep < config.repeats; ++rep) {
            Stopwatch watch;
            // the timed region matches what a user runs: ordering, neighbor
            // search, factor construction, and the draws themselves
            const LocationSet locs = order_locations(points, OrderingStrategy::CoordinateSort);
            const NeighborGraph graph = build_neighbor_graph(locs, config.m);
            const SparseCholesky chol = build_factor(locs, graph, spec, FactorTarget::Latent);
            const Eigen::MatrixXd draws = simulate(chol, config.common.seed, config.draws, 1);
            (void)draws;
            sparse_times.push_back(watch.seconds());
        }
        rows.push_back({"nngp", n, true, mean_of(sparse_times), sd_of(sparse_times)});

        BenchRow dense_row{"dense", n, false, 0.0, 0.0};
        if (static_cast<std::size_t>(n) <= config.dense_max_n) {
            std::vector<double> dense_times;
            for (int rep = 0; rep < config.repeats; ++rep) {
                Stopwatch watch;
                const LocationSet locs = order_locations(points, OrderingStrategy::CoordinateSort);
                const Eigen::MatrixXd chol = dense_gp_cholesky(locs, spec, false);
                Eigen::MatrixXd z(n, config.draws);
                for (int d = 0; d < config.draws; ++d)
                    z.col(d) = normal_vector(n, derive_seed(config.common.seed,
                                                            static_cast<std::uint64_t>(d)));
                const Eigen::MatrixXd draws = chol * z;
                (void)draws;
                dense_times.push_back(watch.seconds());
            }
            dense_row.feasible = true;
            dense_row.mean_seconds = mean_of(dense_times);
            dense_row.sd_seconds = sd_of(dense_times);
        }
        rows.push_back(dense_row);
    }
    return rows;
}

void cmd_bench(const BenchConfig& config) {
    Stopwatch watch;
    const std::vector<BenchRow> rows = run_bench(config);
    const std::string path = out_path(config.common, "bench.csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << "method,n,mean_seconds,sd_seconds\n";
    for (const auto& row : rows) {
        out << row.method << ',' << row.n << ',';
        if (row.feasible)
            out << format_double(row.mean_seconds) << ',' << format_double(row.sd_seconds);
        else
            out << "NA,NA";
        out << '\n';
    }
    out.close();
    json n_grid = json::array();
    for (const int n : config.n_grid) n_grid.push_back(n);
    write_manifest(config.common, "bench",
                   json{{"n_grid", n_grid},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"draws", config.draws},
                        {"repeats", config.repeats},
                        {"dense_max_n", config.dense_max_n}},
                   watch.seconds(), {path});
}

// ---------------------------------------------------------------------------

HomoskedasticitySummary cmd_homoskedasticity(const HomoskedasticityConfig& config) {
    Stopwatch watch;
    const CovarianceSpec spec = make_spec(config.kernel, config.sigma2, config.phi, 0.0);
    const std::vector<Point> points =
        uniform_points(config.n, derive_seed(config.common.seed, 101));

    HomoskedasticitySummary summary;
    std::vector<std::vector<double>> rows;
    for (const auto& [strategy, code] :
         {std::pair{OrderingStrategy::CoordinateSort, 0.0},
          std::pair{OrderingStrategy::Random, 1.0}}) {
        const LocationSet locs =
            order_locations(points, strategy, derive_seed(config.common.seed, 102));
        const NeighborGraph graph = build_neighbor_graph(locs, config.m);
        const SparseCholesky chol = build_factor(locs, graph, spec, FactorTarget::Latent);
        const Eigen::VectorXd variances = dense_covariance(chol).diagonal();
        double min_var = variances.minCoeff();
        for (int k = 0; k < config.n; ++k)
            rows.push_back({code, static_cast<double>(k), variances[k]});
        if (strategy == OrderingStrategy::CoordinateSort)
            summary.coordinate_min_variance = min_var;
        else
            summary.random_min_variance = min_var;
    }
    const std::string path = out_path(config.common, "variances.csv");
    write_csv(path, {"random_ordering", "order_index", "variance"}, rows);
    write_manifest(config.common, "homoskedasticity",
                   json{{"n", config.n},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"sigma2", config.sigma2},
                        {"phi", config.phi},
                        {"coordinate_min_variance", summary.coordinate_min_variance},
                        {"random_min_variance", summary.random_min_variance}},
                   watch.seconds(), {path});
    return summary;
}

// ---------------------------------------------------------------------------

FitSummary cmd_fit(const FitConfig& config) {
    Stopwatch watch;
    if (config.input.empty() == config.from_draws.empty())
        throw std::invalid_argument("fit: provide exactly one of --input or --from-draws");
    const RegressionData data =
        config.input.empty()
            ? load_from_draws(config.from_draws, config.draw_index, config.ordering)
            : load_regression_csv(config.input, config.ordering, false).data;
    const NeighborGraph graph = build_neighbor_graph(data.locs, config.m);
    const FitResult fit = fit_from_config(config, data, graph);

    const std::string path = out_path(config.common, "fit.json");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << fit_to_json(fit).dump(2) << '\n';
    out.close();

    write_manifest(config.common, "fit",
                   json{{"input", config.input.empty() ? config.from_draws : config.input},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"init_sigma2", config.init_sigma2},
                        {"init_phi", config.init_phi},
                        {"init_tau2", config.init_tau2},
                        {"ordering", config.ordering}},
                   watch.seconds(), {path});

    FitSummary summary;
    summary.beta.assign(fit.beta.begin(), fit.beta.end());
    summary.sigma2 = fit.spec.sigma2;
    summary.phi = fit.spec.phi;
    summary.tau2 = fit.spec.tau2;
    summary.loglik = fit.loglik;
    summary.converged = fit.converged;
    return summary;
}

void cmd_bootstrap(const BootstrapConfig& config) {
    Stopwatch watch;
    if (config.fit.input.empty())
        throw std::invalid_argument("bootstrap: --input CSV is required");
    const RegressionData data =
        load_regression_csv(config.fit.input, config.fit.ordering, false).data;
    const NeighborGraph graph = build_neighbor_graph(data.locs, config.fit.m);
    const FitResult fit = fit_from_config(config.fit, data, graph);
    const BootstrapResult boot =
        run_bootstrap(data, graph, fit, config.B, config.level, config.fit.common.seed,
                      resolve_threads(config.fit.common));

    const std::string estimates_path = out_path(config.fit.common, "bootstrap_estimates.csv");
    write_csv(estimates_path, boot.parameter_names, matrix_rows(boot.estimates));

    json intervals = json::array();
    for (std::size_t j = 0; j < boot.intervals.size(); ++j) {
        intervals.push_back(json{{"parameter", boot.parameter_names[j]},
                                 {"lower", boot.intervals[j].first},
                                 {"upper", boot.intervals[j].second}});
    }
    json result;
    result["fit"] = fit_to_json(fit);
    result["B"] = boot.requested;
    result["failures"] = boot.failures;
    result["level"] = boot.level;
    result["intervals"] = intervals;
    const std::string result_path = out_path(config.fit.common, "bootstrap.json");
    std::ofstream out(result_path);
    if (!out) throw std::runtime_error(result_path + ": cannot open file for writing");
    out << result.dump(2) << '\n';
    out.close();

    write_manifest(config.fit.common, "bootstrap",
                   json{{"input", config.fit.input},
                        {"m", config.fit.m},
                        {"kernel", config.fit.kernel},
                        {"B", config.B},
                        {"level", config.level}},
                   watch.seconds(), {estimates_path, result_path});
}

void cmd_rfgls(const RfglsConfig& config) {
    Stopwatch watch;
    if (config.input.empty()) throw std::invalid_argument("rfgls: --input CSV is required");
    const LoadedData loaded = load_regression_csv(config.input, "coordinate", true);
    const RegressionData& full = loaded.data;
    const unsigned threads = resolve_threads(config.common);

    // Plug-in working covariance from an intercept-only fit.
    RegressionData intercept_only{full.y, Eigen::MatrixXd::Ones(full.y.size(), 1), full.locs};
    const NeighborGraph graph = build_neighbor_graph(full.locs, config.m);
    const CovarianceSpec init =
        make_spec(config.kernel, config.init_sigma2, config.init_phi, config.init_tau2);
    const FitResult working = fit_mle(intercept_only, graph, init, threads);
    const SparseCholesky chol =
        build_factor(full.locs, graph, working.spec, FactorTarget::Response, threads);

    const Eigen::MatrixXd features = full.X.rightCols(loaded.n_features);
    RegressionData forest_data{full.y, features, full.locs};
    ForestHyper hyper;
    hyper.n_trees = config.n_trees;
    hyper.min_node_size = config.min_node_size;
    hyper.max_leaves = config.max_leaves;
    hyper.mtry = config.mtry;
    const ForestModel model = fit_forest(forest_data, chol, hyper, config.common.seed, threads);

    const Eigen::VectorXd h_hat = predict_forest(model, features, PredictMode::MeanOnly);
    std::vector<std::vector<double>> hhat_rows;
    hhat_rows.reserve(static_cast<std::size_t>(h_hat.size()));
    for (Eigen::Index i = 0; i < h_hat.size(); ++i)
        hhat_rows.push_back({static_cast<double>(i), h_hat[i], full.y[i]});
    const std::string hhat_path = out_path(config.common, "rfgls_fitted.csv");
    write_csv(hhat_path, {"row", "h_hat", "y"}, hhat_rows);

    std::vector<std::string> outputs{hhat_path};
    if (!config.predict_input.empty()) {
        const CsvTable newtab = read_csv(config.predict_input);
        const int sx = newtab.require_column("sx");
        const int sy = newtab.require_column("sy");
        std::vector<int> feature_cols;
        for (std::size_t j = 0; j < newtab.columns.size(); ++j) {
            const auto& name = newtab.columns[j];
            if (name.size() > 1 && name[0] == 'x') feature_cols.push_back(static_cast<int>(j));
        }
        if (static_cast<int>(feature_cols.size()) != loaded.n_features)
            throw std::runtime_error(config.predict_input + ": feature columns do not match training data");
        const auto q = static_cast<Eigen::Index>(newtab.rows.size());
        Eigen::MatrixXd Xnew(q, loaded.n_features);
        std::vector<Point> new_points(newtab.rows.size());
        for (Eigen::Index i = 0; i < q; ++i) {
            const auto& row = newtab.rows[static_cast<std::size_t>(i)];
            new_points[static_cast<std::size_t>(i)] = {row[static_cast<std::size_t>(sx)],
                                                       row[static_cast<std::size_t>(sy)]};
            for (std::size_t f = 0; f < feature_cols.size(); ++f)
                Xnew(i, static_cast<Eigen::Index>(f)) = row[static_cast<std::size_t>(feature_cols[f])];
        }
        Eigen::VectorXd pred;
        if (config.kriging) {
            SpatialPredictContext ctx{features, full.y, full.locs.input_points(), new_points,
                                      working.spec, config.m};
            pred = predict_forest(model, Xnew, PredictMode::MeanPlusKriging, &ctx);
        } else {
            pred = predict_forest(model, Xnew, PredictMode::MeanOnly);
        }
        std::vector<std::vector<double>> pred_rows;
        for (Eigen::Index i = 0; i < q; ++i)
            pred_rows.push_back({new_points[static_cast<std::size_t>(i)].x,
                                 new_points[static_cast<std::size_t>(i)].y, pred[i]});
        const std::string pred_path = out_path(config.common, "rfgls_predictions.csv");
        write_csv(pred_path, {"sx", "sy", "prediction"}, pred_rows);
        outputs.push_back(pred_path);
    }

    json result;
    result["working_fit"] = fit_to_json(working);
    result["n_trees"] = model.hyper.n_trees;
    result["min_node_size"] = model.hyper.min_node_size;
    result["max_leaves"] = model.hyper.max_leaves;
    result["mtry"] = model.hyper.mtry;
    const std::string result_path = out_path(config.common, "rfgls.json");
    std::ofstream out(result_path);
    if (!out) throw std::runtime_error(result_path + ": cannot open file for writing");
    out << result.dump(2) << '\n';
    out.close();
    outputs.push_back(result_path);

    write_manifest(config.common, "rfgls",
                   json{{"input", config.input},
                        {"m", config.m},
                        {"kernel", config.kernel},
                        {"n_trees", config.n_trees},
                        {"min_node_size", config.min_node_size},
                        {"max_leaves", config.max_leaves},
                        {"mtry", config.mtry},
                        {"kriging", config.kriging}},
                   watch.seconds(), outputs);
}

// ---------------------------------------------------------------------------

void cmd_dagar(const DagarConfig& config) {
    Stopwatch watch;
    if (config.edges_path.empty()) throw std::invalid_argument("dagar: --edges file is required");
    ArealGraph graph = read_edge_list_file(config.edges_path);
    if (config.ordering == "degree") {
        graph.set_order(degree_sorted_order(graph));
    } else if (config.ordering == "random") {
        graph.set_order(random_order(graph.n_regions(), config.common.seed));
    } else if (config.ordering != "input") {
        throw std::invalid_argument("dagar: ordering must be input, degree, or random");
    }

    SymmetryGroups groups;
    if (config.grid_rows > 0 && config.grid_cols > 0) {
        groups = grid_symmetry_groups(config.grid_rows, config.grid_cols, graph);
    } else {
        // no symmetry information: every vertex and edge is its own group
        groups.n_vertex_groups = graph.n_regions();
        groups.vertex_group.resize(static_cast<std::size_t>(graph.n_regions()));
        std::iota(groups.vertex_group.begin(), groups.vertex_group.end(), 0);
        groups.n_edge_groups = static_cast<int>(graph.edges().size());
        groups.edge_group.resize(graph.edges().size());
        std::iota(groups.edge_group.begin(), groups.edge_group.end(), 0);
    }

    const std::vector<CarDiagnosticsRow> car_rows =
        car_diagnostics(graph, config.rho_grid, groups, config.sigma2);

    // long-format table: model, rho, kind (0 vertex / 1 edge), group, value
    std::vector<std::vector<double>> rows;
    for (const auto& row : car_rows) {
        if (row.singular) continue;
        for (std::size_t g = 0; g < row.stats.vertex_variance.size(); ++g)
            rows.push_back({0.0, row.rho, 0.0, static_cast<double>(g), row.stats.vertex_variance[g]});
        for (std::size_t g = 0; g < row.stats.edge_correlation.size(); ++g)
            rows.push_back({0.0, row.rho, 1.0, static_cast<double>(g), row.stats.edge_correlation[g]});
    }
    int skipped = 0;
    for (const auto& row : car_rows) skipped += row.singular ? 1 : 0;

    for (const double rho : config.rho_grid) {
        if (!(rho >= 0.0 && rho < 1.0)) continue;
        const DagarSpec spec{rho, config.sigma2};
        const GroupStats stats =
            covariance_group_stats(dagar_covariance(graph, spec), graph, groups);
        for (std::size_t g = 0; g < stats.vertex_variance.size(); ++g)
            rows.push_back({1.0, rho, 0.0, static_cast<double>(g), stats.vertex_variance[g]});
        for (std::size_t g = 0; g < stats.edge_correlation.size(); ++g)
            rows.push_back({1.0, rho, 1.0, static_cast<double>(g), stats.edge_correlation[g]});
    }

    const std::string path = out_path(config.common, "areal_diagnostics.csv");
    write_csv(path, {"is_dagar", "rho", "is_edge_stat", "group", "value"}, rows);

    json rho_grid = json::array();
    for (const double rho : config.rho_grid) rho_grid.push_back(rho);
    write_manifest(config.common, "dagar",
                   json{{"edges", config.edges_path},
                        {"rho_grid", rho_grid},
                        {"sigma2", config.sigma2},
                        {"ordering", config.ordering},
                        {"n_regions", graph.n_regions()},
                        {"n_edges", graph.edges().size()},
                        {"singular_rho_skipped", skipped}},
                   watch.seconds(), {path});
}

} // namespace nngp::cli
