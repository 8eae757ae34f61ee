#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nngp/covariance.hpp"
#include "nngp/geometry.hpp"
#include "nngp/inference.hpp"
#include "nngp/sparse_cholesky.hpp"

namespace nngp {

/// Binary regression tree stored as a flat node array; node 0 is the root.
/// Internal nodes route x[feature] <= threshold to left; leaves carry beta.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double beta = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    int leaf_count() const;
};

struct ForestHyper {
    int n_trees = 50;
    int min_node_size = 5;  // a node splits only when it holds >= 2x this
    int max_leaves = 0;     // 0 = no cap beyond node-size stopping
    int mtry = 0;           // features tried per split; 0 = ceil(p / 3)
    bool bootstrap = true;  // false = identity resampling matrix
};

struct ForestModel {
    std::vector<Tree> trees;
    SparseCholesky chol;
    std::vector<std::uint64_t> resample_seeds;
    ForestHyper hyper;
    int n_features = 0;
};

/// Minimized GLS objective (y - Z beta)' L'P'PL (y - Z beta) for a full leaf
/// partition, computed as OLS on the transformed system (PLy, PLZ); no
/// n-by-n matrix is formed. `leaves` lists member indices per leaf and must
/// partition the factor's rows; `resample` holds the selected row indices
/// (identity = 0..n-1). y is aligned with the factor's row order. Throws
/// when a transformed leaf column is degenerate.
double gls_split_cost(const std::vector<std::vector<int>>& leaves, const Eigen::VectorXd& y,
                      const SparseCholesky& chol, const std::vector<int>& resample);

/// Greedy GLS regression tree: candidate thresholds are midpoints between
/// consecutive distinct member values of each sampled feature; ties between
/// equal-cost splits break to the lowest feature index, then the smallest
/// threshold. data.X supplies the split features (no intercept column).
Tree build_tree(const RegressionData& data, const SparseCholesky& chol,
                std::uint64_t resample_seed, const ForestHyper& hyper);

/// Forest of GLS trees with per-tree seed-derived resampling of the
/// decorrelated coordinates. Trees are independent given their seeds.
ForestModel fit_forest(const RegressionData& data, const SparseCholesky& chol,
                       ForestHyper hyper, std::uint64_t seed, unsigned threads = 1);

enum class PredictMode { MeanOnly, MeanPlusKriging };

/// Training-set context needed to krige forest residuals at new locations.
struct SpatialPredictContext {
    Eigen::MatrixXd train_features;
    Eigen::VectorXd train_y;
    std::vector<Point> train_points;
    std::vector<Point> new_points;
    CovarianceSpec spec;
    int m = 15;
};

/// Mean-only averages per-tree predictions; mean-plus-kriging adds
/// nearest-neighbor kriging of the training residuals y - h_hat(X).
Eigen::VectorXd predict_forest(const ForestModel& model, const Eigen::MatrixXd& Xnew,
                               PredictMode mode, const SpatialPredictContext* ctx = nullptr);

} // namespace nngp
