#include "nngp/rfgls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nngp/parallel.hpp"
#include "nngp/rng.hpp"

namespace nngp {

double Tree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
        idx = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(idx)].beta;
}

int Tree::leaf_count() const {
    int count = 0;
    for (const auto& node : nodes) count += node.is_leaf() ? 1 : 0;
    return count;
}

namespace {

using SparseColumn = std::vector<std::pair<int, double>>; // (row, value)

// Column-access view of L = F^{-1/2}(I - B).
std::vector<SparseColumn> factor_columns(const SparseCholesky& chol) {
    const auto n = chol.size();
    std::vector<SparseColumn> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = 1.0 / std::sqrt(chol.f[static_cast<Eigen::Index>(i)]);
        cols[i].emplace_back(static_cast<int>(i), scale);
        const auto& nbrs = chol.neighbors[i];
        const auto& b = chol.b_rows[i];
        for (std::size_t j = 0; j < nbrs.size(); ++j)
            cols[static_cast<std::size_t>(nbrs[j])].emplace_back(static_cast<int>(i),
                                                                 -b[j] * scale);
    }
    return cols;
}

// Per-observation sparse columns of P L plus the transformed response P L y.
struct TransformedSystem {
    Eigen::VectorXd ty;
    std::vector<SparseColumn> w;  // column j = contribution of observation j
    std::vector<double> wty;      // w_j . ty
    std::vector<double> wnorm2;   // w_j . w_j
    double tyty = 0.0;

    int n() const { return static_cast<int>(w.size()); }
};

TransformedSystem make_system(const std::vector<SparseColumn>& lcols, const Eigen::VectorXd& Ly,
                              const std::vector<int>& sel) {
    const auto n = lcols.size();
    std::vector<std::vector<int>> selpos(n);
    for (std::size_t t = 0; t < sel.size(); ++t) {
        if (sel[t] < 0 || static_cast<std::size_t>(sel[t]) >= n)
            throw std::invalid_argument("resample index out of range");
        selpos[static_cast<std::size_t>(sel[t])].push_back(static_cast<int>(t));
    }
    TransformedSystem sys;
    sys.ty.resize(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t t = 0; t < sel.size(); ++t)
        sys.ty[static_cast<Eigen::Index>(t)] = Ly[sel[t]];
    sys.tyty = sys.ty.squaredNorm();
    sys.w.resize(n);
    sys.wty.resize(n);
    sys.wnorm2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (const auto& [row, value] : lcols[j])
            for (const int t : selpos[static_cast<std::size_t>(row)])
                sys.w[j].emplace_back(t, value);
        double dot = 0.0, norm2 = 0.0;
        for (const auto& [t, value] : sys.w[j]) {
            dot += value * sys.ty[t];
            norm2 += value * value;
        }
        sys.wty[j] = dot;
        sys.wnorm2[j] = norm2;
    }
    return sys;
}

double sparse_dot(const SparseColumn& w, const Eigen::VectorXd& dense) {
    double acc = 0.0;
    for (const auto& [t, value] : w) acc += value * dense[t];
    return acc;
}

void sparse_axpy(double alpha, const SparseColumn& w, Eigen::VectorXd& dense) {
    for (const auto& [t, value] : w) dense[t] += alpha * value;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Midpoint that is guaranteed to separate lo from hi under "x <= thr goes
// left" even when the two values are adjacent doubles.
double split_midpoint(double lo, double hi) {
    const double thr = lo + 0.5 * (hi - lo);
    return thr < hi ? thr : lo;
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const TransformedSystem& sys, const ForestHyper& hyper,
                Rng& rng)
        : X_(X), sys_(sys), hyper_(hyper), rng_(rng) {}

    // Fallback source for leaves whose transformed column vanished.
    void set_raw_response(const Eigen::VectorXd* y) { y_raw_ = y; }

    Tree build() {
        const int n = sys_.n();
        Tree tree;
        tree.nodes.push_back(TreeNode{});
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        Eigen::VectorXd z_root = Eigen::VectorXd::Zero(sys_.ty.size());
        for (int j : all) sparse_axpy(1.0, sys_.w[static_cast<std::size_t>(j)], z_root);
        leaves_.push_back(Leaf{std::move(all), std::move(z_root), 0});
        gram_ = Eigen::MatrixXd::Zero(1, 1);
        gram_(0, 0) = leaves_[0].z.squaredNorm();
        zty_ = Eigen::VectorXd::Zero(1);
        zty_[0] = leaves_[0].z.dot(sys_.ty);
        process(tree, 0, 0);
        finalize_betas(tree);
        return tree;
    }

private:
    struct Leaf {
        std::vector<int> members;
        Eigen::VectorXd z;  // transformed indicator column
        int node_id;
    };

    struct SplitChoice {
        bool valid = false;
        int feature = -1;
        double threshold = 0.0;
        double cost = kInf;
    };

    // Best split of leaf `slot`, scored by the full transformed GLS
    // objective; all other leaf columns are held fixed and absorbed through a
    // Schur complement.
    SplitChoice search(int slot) {
        const Leaf& leaf = leaves_[static_cast<std::size_t>(slot)];
        const int K = static_cast<int>(leaves_.size());
        const int fixed = K - 1;
        const double tiny = 1e-12 * (1.0 + gram_(slot, slot));

        // Gram of the fixed leaves and its Cholesky, plus the projections of
        // the response onto them.
        Eigen::MatrixXd A(fixed, fixed);
        Eigen::VectorXd vg(fixed);
        std::vector<int> fixed_ids;
        fixed_ids.reserve(static_cast<std::size_t>(fixed));
        for (int h = 0; h < K; ++h)
            if (h != slot) fixed_ids.push_back(h);
        for (int a = 0; a < fixed; ++a) {
            vg[a] = zty_[fixed_ids[static_cast<std::size_t>(a)]];
            for (int b = 0; b < fixed; ++b)
                A(a, b) = gram_(fixed_ids[static_cast<std::size_t>(a)],
                                fixed_ids[static_cast<std::size_t>(b)]);
        }
        Eigen::LLT<Eigen::MatrixXd> allt;
        Eigen::VectorXd h_vec(fixed);
        double a0 = 0.0;
        if (fixed > 0) {
            allt.compute(A);
            if (allt.info() != Eigen::Success) return {};
            h_vec = allt.solve(vg);
            a0 = vg.dot(h_vec);
        }
        Eigen::VectorXd q_parent(fixed);
        for (int a = 0; a < fixed; ++a)
            q_parent[a] = gram_(fixed_ids[static_cast<std::size_t>(a)], slot);

        // cost of leaving the node unsplit, through the same machinery so
        // gains compare like with like
        double parent_quad = 0.0;
        {
            const double sp =
                gram_(slot, slot) - (fixed > 0 ? q_parent.dot(allt.solve(q_parent)) : 0.0);
            const double rp = zty_[slot] - (fixed > 0 ? q_parent.dot(h_vec) : 0.0);
            if (sp > tiny) parent_quad = rp * rp / sp;
        }
        const double parent_cost = sys_.tyty - a0 - parent_quad;
        // costs within this margin count as tied; enumeration order (ascending
        // feature, then threshold) then decides, which keeps the tie rule
        // stable under rounding
        const double cost_eps = 1e-9 * (1.0 + std::abs(parent_cost));

        SplitChoice best;
        for (const int feature : sample_features()) {
            std::vector<std::pair<double, int>> vals;
            vals.reserve(leaf.members.size());
            for (int j : leaf.members) vals.emplace_back(X_(j, feature), j);
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;

            Eigen::VectorXd u_left = Eigen::VectorXd::Zero(sys_.ty.size());
            Eigen::VectorXd u_right = leaf.z;
            Eigen::VectorXd q_left = Eigen::VectorXd::Zero(fixed);
            Eigen::VectorXd q_right = q_parent;
            Eigen::VectorXd gw(fixed);
            double s_ll = 0.0, s_lr = 0.0, s_rr = gram_(slot, slot);
            double d_left = 0.0, d_right = zty_[slot];

            std::size_t pos = 0;
            while (pos < vals.size()) {
                const double value = vals[pos].first;
                // move the whole tied group from the right child to the left
                while (pos < vals.size() && vals[pos].first == value) {
                    const int j = vals[pos].second;
                    const auto& wj = sys_.w[static_cast<std::size_t>(j)];
                    const double a = sparse_dot(wj, u_left);
                    const double b = sparse_dot(wj, u_right);
                    const double ww = sys_.wnorm2[static_cast<std::size_t>(j)];
                    s_ll += 2.0 * a + ww;
                    s_lr += b - a - ww;
                    s_rr += -2.0 * b + ww;
                    sparse_axpy(1.0, wj, u_left);
                    sparse_axpy(-1.0, wj, u_right);
                    if (fixed > 0) {
                        for (int f = 0; f < fixed; ++f)
                            gw[f] = sparse_dot(
                                wj, leaves_[static_cast<std::size_t>(fixed_ids[static_cast<std::size_t>(f)])].z);
                        q_left += gw;
                        q_right -= gw;
                    }
                    d_left += sys_.wty[static_cast<std::size_t>(j)];
                    d_right -= sys_.wty[static_cast<std::size_t>(j)];
                    ++pos;
                }
                if (pos == vals.size()) break; // no right group remains

                double s00 = s_ll, s01 = s_lr, s11 = s_rr;
                double r0 = d_left, r1 = d_right;
                if (fixed > 0) {
                    const Eigen::VectorXd tl = allt.solve(q_left);
                    const Eigen::VectorXd tr = allt.solve(q_right);
                    s00 -= q_left.dot(tl);
                    s01 -= q_left.dot(tr);
                    s11 -= q_right.dot(tr);
                    r0 -= q_left.dot(h_vec);
                    r1 -= q_right.dot(h_vec);
                }
                // 2x2 solve; a degenerate block means an empty or dependent
                // transformed group and the candidate is invalid
                if (s00 > tiny && s11 - s01 * s01 / s00 > tiny) {
                    const double det = s00 * s11 - s01 * s01;
                    const double quad =
                        (r0 * (s11 * r0 - s01 * r1) + r1 * (s00 * r1 - s01 * r0)) / det;
                    const double cost = sys_.tyty - a0 - quad;
                    if (cost < best.cost - cost_eps) {
                        best.valid = true;
                        best.feature = feature;
                        best.threshold = split_midpoint(value, vals[pos].first);
                        best.cost = cost;
                    }
                }
            }
        }
        if (best.valid && !(best.cost < parent_cost - cost_eps)) best.valid = false;
        return best;
    }

    void process(Tree& tree, int node_id, int slot) {
        if (hyper_.max_leaves > 0 && static_cast<int>(leaves_.size()) >= hyper_.max_leaves)
            return;
        if (static_cast<int>(leaves_[static_cast<std::size_t>(slot)].members.size()) <
            2 * hyper_.min_node_size)
            return;
        const SplitChoice choice = search(slot);
        if (!choice.valid) return;

        Leaf& leaf = leaves_[static_cast<std::size_t>(slot)];
        std::vector<int> left_members, right_members;
        for (int j : leaf.members) {
            if (X_(j, choice.feature) <= choice.threshold)
                left_members.push_back(j);
            else
                right_members.push_back(j);
        }
        Eigen::VectorXd z_left = Eigen::VectorXd::Zero(sys_.ty.size());
        for (int j : left_members) sparse_axpy(1.0, sys_.w[static_cast<std::size_t>(j)], z_left);
        Eigen::VectorXd z_right = leaf.z - z_left;

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        const int right_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        TreeNode& parent = tree.nodes[static_cast<std::size_t>(node_id)];
        parent.feature = choice.feature;
        parent.threshold = choice.threshold;
        parent.left = left_id;
        parent.right = right_id;

        const int new_slot = static_cast<int>(leaves_.size());
        leaves_[static_cast<std::size_t>(slot)] =
            Leaf{std::move(left_members), std::move(z_left), left_id};
        leaves_.push_back(Leaf{std::move(right_members), std::move(z_right), right_id});
        refresh_gram(slot);
        refresh_gram(new_slot);

        process(tree, left_id, slot);
        process(tree, right_id, new_slot);
    }

    // Rebuilds row/column `slot` of the leaf Gram matrix and its response
    // projection after the leaf column changed.
    void refresh_gram(int slot) {
        const int K = static_cast<int>(leaves_.size());
        if (gram_.rows() < K) {
            gram_.conservativeResize(K, K);
            zty_.conservativeResize(K);
        }
        const Eigen::VectorXd& z = leaves_[static_cast<std::size_t>(slot)].z;
        for (int h = 0; h < K; ++h) {
            const double dot = z.dot(leaves_[static_cast<std::size_t>(h)].z);
            gram_(slot, h) = dot;
            gram_(h, slot) = dot;
        }
        zty_[slot] = z.dot(sys_.ty);
    }

    std::vector<int> sample_features() {
        const int p = static_cast<int>(X_.cols());
        const int mtry = std::clamp(hyper_.mtry, 1, p);
        std::vector<int> idx(static_cast<std::size_t>(p));
        std::iota(idx.begin(), idx.end(), 0);
        for (int k = 0; k < mtry; ++k) {
            const auto j = k + static_cast<int>(rng_.uniform_below(
                                   static_cast<std::uint64_t>(p - k)));
            std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(mtry));
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    // Joint GLS leaf values: solve (Z'Z) beta = Z'ty over the transformed
    // columns. A leaf whose column vanished under the resampling gets the raw
    // mean of its members' responses.
    void finalize_betas(Tree& tree) {
        const int K = static_cast<int>(leaves_.size());
        std::vector<int> live;
        for (int g = 0; g < K; ++g)
            if (gram_(g, g) > 0.0) live.push_back(g);
        Eigen::MatrixXd M(live.size(), live.size());
        Eigen::VectorXd v(live.size());
        for (std::size_t a = 0; a < live.size(); ++a) {
            v[static_cast<Eigen::Index>(a)] = zty_[live[a]];
            for (std::size_t b = 0; b < live.size(); ++b)
                M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    gram_(live[a], live[b]);
        }
        Eigen::VectorXd beta;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        beta = ldlt.solve(v);
        if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
            const double ridge = 1e-10 * (M.trace() / std::max<int>(1, static_cast<int>(live.size())) + 1.0);
            beta = (M + ridge * Eigen::MatrixXd::Identity(M.rows(), M.cols())).ldlt().solve(v);
        }
        std::vector<char> has_beta(static_cast<std::size_t>(K), 0);
        for (std::size_t a = 0; a < live.size(); ++a) {
            tree.nodes[static_cast<std::size_t>(leaves_[static_cast<std::size_t>(live[a])].node_id)]
                .beta = beta[static_cast<Eigen::Index>(a)];
            has_beta[static_cast<std::size_t>(live[a])] = 1;
        }
        for (int g = 0; g < K; ++g) {
            if (has_beta[static_cast<std::size_t>(g)]) continue;
            const Leaf& leaf = leaves_[static_cast<std::size_t>(g)];
            double mean = 0.0;
            for (int j : leaf.members) mean += y_raw_ != nullptr ? (*y_raw_)[j] : 0.0;
            if (!leaf.members.empty()) mean /= static_cast<double>(leaf.members.size());
            tree.nodes[static_cast<std::size_t>(leaf.node_id)].beta = mean;
        }
    }

private:
    const Eigen::MatrixXd& X_;
    const TransformedSystem& sys_;
    const ForestHyper& hyper_;
    Rng& rng_;
    std::vector<Leaf> leaves_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd zty_;
    const Eigen::VectorXd* y_raw_ = nullptr;
};

std::vector<int> draw_resample(int n, bool bootstrap, Rng& rng) {
    std::vector<int> sel(static_cast<std::size_t>(n));
    if (bootstrap) {
        for (int t = 0; t < n; ++t)
            sel[static_cast<std::size_t>(t)] =
                static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    } else {
        std::iota(sel.begin(), sel.end(), 0);
    }
    return sel;
}

ForestHyper resolve_hyper(ForestHyper hyper, int p) {
    if (hyper.n_trees < 1) throw std::invalid_argument("ForestHyper: n_trees must be >= 1");
    if (hyper.min_node_size < 1)
        throw std::invalid_argument("ForestHyper: min_node_size must be >= 1");
    if (hyper.max_leaves < 0) throw std::invalid_argument("ForestHyper: max_leaves must be >= 0");
    if (hyper.mtry == 0) hyper.mtry = (p + 2) / 3;
    hyper.mtry = std::clamp(hyper.mtry, 1, p);
    return hyper;
}

Tree build_tree_impl(const Eigen::MatrixXd& Xo, const Eigen::VectorXd& yo,
                     const std::vector<SparseColumn>& lcols, const Eigen::VectorXd& Ly,
                     const ForestHyper& hyper, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<int> sel = draw_resample(static_cast<int>(Xo.rows()), hyper.bootstrap, rng);
    const TransformedSystem sys = make_system(lcols, Ly, sel);
    TreeBuilder builder(Xo, sys, hyper, rng);
    builder.set_raw_response(&yo);
    return builder.build();
}

} // namespace

double gls_split_cost(const std::vector<std::vector<int>>& leaves, const Eigen::VectorXd& y,
                      const SparseCholesky& chol, const std::vector<int>& resample) {
    const auto n = chol.size();
    if (static_cast<std::size_t>(y.size()) != n)
        throw std::invalid_argument("gls_split_cost: y length != factor size");
    if (leaves.empty()) throw std::invalid_argument("gls_split_cost: no leaves");
    std::vector<char> seen(n, 0);
    for (const auto& leaf : leaves) {
        for (const int j : leaf) {
            if (j < 0 || static_cast<std::size_t>(j) >= n || seen[static_cast<std::size_t>(j)])
                throw std::invalid_argument("gls_split_cost: leaves must partition the rows");
            seen[static_cast<std::size_t>(j)] = 1;
        }
    }
    if (std::count(seen.begin(), seen.end(), static_cast<char>(1)) != static_cast<long>(n))
        throw std::invalid_argument("gls_split_cost: leaves must cover every row");

    const std::vector<SparseColumn> lcols = factor_columns(chol);
    const Eigen::VectorXd Ly = apply_factor(chol, y);
    const TransformedSystem sys = make_system(lcols, Ly, resample);

    const auto K = static_cast<Eigen::Index>(leaves.size());
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(sys.ty.size(), K);
    for (Eigen::Index g = 0; g < K; ++g) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(sys.ty.size());
        for (const int j : leaves[static_cast<std::size_t>(g)])
            sparse_axpy(1.0, sys.w[static_cast<std::size_t>(j)], col);
        if (col.squaredNorm() == 0.0)
            throw std::runtime_error("gls_split_cost: transformed leaf column is empty");
        Z.col(g) = col;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < K)
        throw std::runtime_error("gls_split_cost: singular normal equations");
    const Eigen::VectorXd beta = qr.solve(sys.ty);
    return (sys.ty - Z * beta).squaredNorm();
}

Tree build_tree(const RegressionData& data, const SparseCholesky& chol,
                std::uint64_t resample_seed, const ForestHyper& hyper) {
    data.check_consistent();
    if (chol.size() != data.locs.size())
        throw std::invalid_argument("build_tree: factor size != data size");
    const ForestHyper resolved = resolve_hyper(hyper, static_cast<int>(data.X.cols()));
    const Eigen::MatrixXd Xo = data.locs.to_ordered_rows(data.X);
    const Eigen::VectorXd yo = data.locs.to_ordered(data.y);
    const std::vector<SparseColumn> lcols = factor_columns(chol);
    const Eigen::VectorXd Ly = apply_factor(chol, yo);
    return build_tree_impl(Xo, yo, lcols, Ly, resolved, resample_seed);
}

ForestModel fit_forest(const RegressionData& data, const SparseCholesky& chol, ForestHyper hyper,
                       std::uint64_t seed, unsigned threads) {
    data.check_consistent();
    if (chol.size() != data.locs.size())
        throw std::invalid_argument("fit_forest: factor size != data size");
    const ForestHyper resolved = resolve_hyper(hyper, static_cast<int>(data.X.cols()));

    const Eigen::MatrixXd Xo = data.locs.to_ordered_rows(data.X);
    const Eigen::VectorXd yo = data.locs.to_ordered(data.y);
    const std::vector<SparseColumn> lcols = factor_columns(chol);
    const Eigen::VectorXd Ly = apply_factor(chol, yo);

    ForestModel model;
    model.chol = chol;
    model.hyper = resolved;
    model.n_features = static_cast<int>(data.X.cols());
    model.trees.resize(static_cast<std::size_t>(resolved.n_trees));
    model.resample_seeds.resize(static_cast<std::size_t>(resolved.n_trees));
    for (int t = 0; t < resolved.n_trees; ++t)
        model.resample_seeds[static_cast<std::size_t>(t)] =
            derive_seed(seed, static_cast<std::uint64_t>(t));

    parallel_for(static_cast<std::size_t>(resolved.n_trees), threads, [&](std::size_t t) {
        model.trees[t] = build_tree_impl(Xo, yo, lcols, Ly, resolved, model.resample_seeds[t]);
    });
    return model;
}

Eigen::VectorXd predict_forest(const ForestModel& model, const Eigen::MatrixXd& Xnew,
                               PredictMode mode, const SpatialPredictContext* ctx) {
    if (Xnew.cols() != model.n_features)
        throw std::invalid_argument("predict_forest: feature dimension mismatch");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(Xnew.rows());
    for (const Tree& tree : model.trees)
        for (Eigen::Index q = 0; q < Xnew.rows(); ++q) mean[q] += tree.predict_row(Xnew.row(q));
    mean /= static_cast<double>(model.trees.size());
    if (mode == PredictMode::MeanOnly) return mean;

    if (ctx == nullptr)
        throw std::invalid_argument("predict_forest: kriging mode needs a spatial context");
    if (ctx->train_features.rows() != ctx->train_y.size() ||
        static_cast<std::size_t>(ctx->train_y.size()) != ctx->train_points.size())
        throw std::invalid_argument("predict_forest: inconsistent training context");
    if (ctx->new_points.size() != static_cast<std::size_t>(Xnew.rows()))
        throw std::invalid_argument("predict_forest: new_points length != Xnew rows");

    Eigen::VectorXd h_train = Eigen::VectorXd::Zero(ctx->train_features.rows());
    for (const Tree& tree : model.trees)
        for (Eigen::Index i = 0; i < ctx->train_features.rows(); ++i)
            h_train[i] += tree.predict_row(ctx->train_features.row(i));
    h_train /= static_cast<double>(model.trees.size());

    const Eigen::VectorXd resid = ctx->train_y - h_train;
    const std::vector<Prediction> kriged =
        krige(ctx->train_points, resid, ctx->spec, ctx->new_points, ctx->m);
    for (Eigen::Index q = 0; q < mean.size(); ++q)
        mean[q] += kriged[static_cast<std::size_t>(q)].mean;
    return mean;
}

} // namespace nngp
