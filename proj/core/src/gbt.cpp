#include "optpred/gbt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

#include <json.hpp>

#include "optpred/rng.hpp"

namespace optpred {

void GbtConfig::validate() const {
    if (n_estimators < 1) throw std::invalid_argument("gbt: n_estimators must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("gbt: max_depth must be >= 1");
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0))
        throw std::invalid_argument("gbt: learning_rate must be in [0, 1]");
    if (!(subsample > 0.0 && subsample <= 1.0))
        throw std::invalid_argument("gbt: subsample must be in (0, 1]");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0))
        throw std::invalid_argument("gbt: colsample_bytree must be in (0, 1]");
    if (min_child_weight < 0.0) throw std::invalid_argument("gbt: min_child_weight must be >= 0");
    if (n_threads < 1) throw std::invalid_argument("gbt: n_threads must be >= 1");
}

double split_threshold(double lo, double hi) {
    double mid = lo + 0.5 * (hi - lo);
    if (!(mid < hi)) mid = lo;  // adjacent doubles: keep lo-valued rows on the left
    return mid;
}

double RegressionTree::value_at(std::span<const double> x) const {
    int idx = 0;
    while (!nodes[idx].is_leaf()) {
        const TreeNode& n = nodes[idx];
        idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[idx].value;
}

int RegressionTree::depth() const {
    // iterative depth over the explicit child links
    int max_depth = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        if (n.is_leaf()) {
            max_depth = std::max(max_depth, d);
        } else {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return max_depth;
}

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;

    bool valid() const { return feature >= 0; }
};

struct NodeStats {
    double sum = 0.0;
    double count = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted_idx,
                const GbtConfig& cfg)
        : x_(x), sorted_idx_(sorted_idx), cfg_(cfg) {}

    RegressionTree build(std::span<const double> gradients,
                         const std::vector<std::uint32_t>& sample_rows,
                         const std::vector<std::uint32_t>& feature_subset);

private:
    const Matrix& x_;
    const std::vector<std::vector<std::uint32_t>>& sorted_idx_;
    const GbtConfig& cfg_;
};

SplitCandidate pick_better(const SplitCandidate& current, const SplitCandidate& challenger) {
    if (!challenger.valid()) return current;
    if (!current.valid() || challenger.gain > current.gain) return challenger;
    return current;
}

// Best split of every active node for one feature, found in a single pass
// over the presorted column. Fills one candidate per node (offset by
// first_node). Rows not in this tree's sample carry node id -1.
//
// The winning candidate's gain is then recomputed with sums taken in row
// order, so that mathematically tied candidates on different features score
// bitwise equal and the lowest-feature/lowest-threshold tie-break is real
// rather than an accident of per-feature summation order.
void scan_one(const Matrix& x, std::span<const std::uint32_t> order,
              std::span<const std::uint32_t> sample_rows, std::uint32_t feature,
              std::span<const double> gradients, std::span<const int> node_of_row,
              std::span<const NodeStats> totals, double min_child_weight, int first_node,
              std::vector<SplitCandidate>& out) {
    std::vector<NodeStats> run(out.size());
    std::vector<double> last(out.size(), 0.0);
    std::vector<char> seen(out.size(), 0);

    for (const std::uint32_t row : order) {
        const int node = node_of_row[row];
        if (node < first_node) continue;
        const auto slot = static_cast<std::size_t>(node - first_node);
        const double v = x.at(row, feature);
        if (seen[slot] && v != last[slot]) {
            const NodeStats& total = totals[slot];
            const NodeStats& left = run[slot];
            const double right_count = total.count - left.count;
            if (left.count >= min_child_weight && right_count >= min_child_weight) {
                const double right_sum = total.sum - left.sum;
                const double gain = left.sum * left.sum / left.count +
                                    right_sum * right_sum / right_count -
                                    total.sum * total.sum / total.count;
                SplitCandidate cand{gain, static_cast<int>(feature), split_threshold(last[slot], v)};
                if (cand.gain > 0.0 &&
                    (!out[slot].valid() || cand.gain > out[slot].gain))
                    out[slot] = cand;
            }
        }
        run[slot].sum += gradients[row];
        run[slot].count += 1.0;
        last[slot] = v;
        seen[slot] = 1;
    }

    // canonical rescore of the per-node winners
    std::vector<NodeStats> left_stats(out.size());
    std::vector<char> has_winner(out.size(), 0);
    bool any = false;
    for (std::size_t s = 0; s < out.size(); ++s)
        if (out[s].valid()) {
            has_winner[s] = 1;
            any = true;
        }
    if (!any) return;
    for (const std::uint32_t row : sample_rows) {
        const int node = node_of_row[row];
        if (node < first_node) continue;
        const auto slot = static_cast<std::size_t>(node - first_node);
        if (!has_winner[slot]) continue;
        if (x.at(row, feature) <= out[slot].threshold) {
            left_stats[slot].sum += gradients[row];
            left_stats[slot].count += 1.0;
        }
    }
    for (std::size_t s = 0; s < out.size(); ++s) {
        if (!has_winner[s]) continue;
        const NodeStats& total = totals[s];
        const NodeStats& left = left_stats[s];
        const double right_sum = total.sum - left.sum;
        const double right_count = total.count - left.count;
        out[s].gain = left.sum * left.sum / left.count + right_sum * right_sum / right_count -
                      total.sum * total.sum / total.count;
        if (!(out[s].gain > 0.0)) out[s] = SplitCandidate{};  // noise-level gain: keep the leaf
    }
}

RegressionTree TreeBuilder::build(std::span<const double> gradients,
                                  const std::vector<std::uint32_t>& sample_rows,
                                  const std::vector<std::uint32_t>& feature_subset) {
    RegressionTree tree;
    tree.nodes.emplace_back();

    // node assignment; -1 = row not in this tree's sample
    std::vector<int> node_of_row(x_.rows, -1);
    for (const std::uint32_t r : sample_rows) node_of_row[r] = 0;

    int level_first = 0;  // first node index of the current level
    for (int depth = 0; depth < cfg_.max_depth; ++depth) {
        const int level_count = static_cast<int>(tree.nodes.size()) - level_first;
        if (level_count <= 0) break;

        // totals per active node
        std::vector<NodeStats> totals(static_cast<std::size_t>(level_count));
        for (const std::uint32_t r : sample_rows) {
            const int node = node_of_row[r];
            if (node < level_first) continue;
            auto& t = totals[static_cast<std::size_t>(node - level_first)];
            t.sum += gradients[r];
            t.count += 1.0;
        }

        // candidate per (node, feature); features evaluated independently
        // (possibly in parallel) and reduced in ascending feature order
        const std::size_t n_feats = feature_subset.size();
        std::vector<std::vector<SplitCandidate>> per_feature(
            n_feats, std::vector<SplitCandidate>(static_cast<std::size_t>(level_count)));

        const int workers = std::min<int>(cfg_.n_threads, static_cast<int>(n_feats));
        if (workers <= 1) {
            for (std::size_t fi = 0; fi < n_feats; ++fi)
                scan_one(x_, sorted_idx_[feature_subset[fi]], sample_rows, feature_subset[fi],
                         gradients, node_of_row, totals, cfg_.min_child_weight, level_first,
                         per_feature[fi]);
        } else {
            std::vector<std::future<void>> futures;
            futures.reserve(static_cast<std::size_t>(workers));
            std::atomic<std::size_t> next{0};
            for (int w = 0; w < workers; ++w) {
                futures.push_back(std::async(std::launch::async, [&] {
                    for (std::size_t fi = next.fetch_add(1); fi < n_feats;
                         fi = next.fetch_add(1))
                        scan_one(x_, sorted_idx_[feature_subset[fi]], sample_rows,
                                 feature_subset[fi], gradients, node_of_row, totals,
                                 cfg_.min_child_weight, level_first, per_feature[fi]);
                }));
            }
            for (auto& f : futures) f.get();
        }

        // choose the winner per node (features ascending => deterministic ties)
        std::vector<SplitCandidate> best(static_cast<std::size_t>(level_count));
        for (std::size_t fi = 0; fi < n_feats; ++fi)
            for (int nd = 0; nd < level_count; ++nd)
                best[static_cast<std::size_t>(nd)] = pick_better(
                    best[static_cast<std::size_t>(nd)], per_feature[fi][static_cast<std::size_t>(nd)]);

        // materialize splits; reserve first so node references stay valid
        tree.nodes.reserve(tree.nodes.size() + 2 * static_cast<std::size_t>(level_count));
        const int next_first = static_cast<int>(tree.nodes.size());
        bool any_split = false;
        for (int nd = 0; nd < level_count; ++nd) {
            const auto slot = static_cast<std::size_t>(nd);
            TreeNode& node = tree.nodes[static_cast<std::size_t>(level_first + nd)];
            if (!best[slot].valid()) {
                node.value = totals[slot].count > 0.0 ? totals[slot].sum / totals[slot].count : 0.0;
                continue;
            }
            node.feature = best[slot].feature;
            node.threshold = best[slot].threshold;
            node.left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            node.right = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            any_split = true;
        }
        if (!any_split) break;

        // reassign rows to children
        for (const std::uint32_t r : sample_rows) {
            const int nd = node_of_row[r];
            if (nd < level_first) continue;
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
            if (node.is_leaf()) continue;
            node_of_row[r] =
                x_.at(r, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left
                                                                                   : node.right;
        }
        level_first = next_first;
    }

    // finalize leaves created by the last level of splits (max depth reached)
    {
        std::vector<NodeStats> tail(tree.nodes.size());
        for (const std::uint32_t r : sample_rows) {
            const int nd = node_of_row[r];
            if (nd >= level_first) {
                tail[static_cast<std::size_t>(nd)].sum += gradients[r];
                tail[static_cast<std::size_t>(nd)].count += 1.0;
            }
        }
        for (std::size_t i = static_cast<std::size_t>(level_first); i < tree.nodes.size(); ++i) {
            TreeNode& node = tree.nodes[i];
            if (node.is_leaf() && tail[i].count > 0.0) node.value = tail[i].sum / tail[i].count;
        }
    }
    return tree;
}

std::uint64_t fingerprint(const Matrix& x, std::span<const double> y, const GbtConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(&x.rows, sizeof x.rows);
    mix(&x.cols, sizeof x.cols);
    mix(x.data.data(), x.data.size() * sizeof(double));
    mix(y.data(), y.size() * sizeof(double));
    mix(&cfg.n_estimators, sizeof cfg.n_estimators);
    mix(&cfg.max_depth, sizeof cfg.max_depth);
    mix(&cfg.learning_rate, sizeof cfg.learning_rate);
    mix(&cfg.min_child_weight, sizeof cfg.min_child_weight);
    mix(&cfg.colsample_bytree, sizeof cfg.colsample_bytree);
    mix(&cfg.subsample, sizeof cfg.subsample);
    mix(&cfg.seed, sizeof cfg.seed);
    return h;
}

}  // namespace

TrainedModel fit(const Matrix& features, std::span<const double> targets, const GbtConfig& cfg) {
    cfg.validate();
    if (features.rows == 0) throw std::invalid_argument("gbt fit: empty training set");
    if (features.rows != targets.size())
        throw std::invalid_argument("gbt fit: feature/target row count mismatch");

    const std::size_t n = features.rows;
    const std::size_t d = features.cols;

    TrainedModel model;
    model.feature_count = d;
    model.config = cfg;
    model.train_fingerprint = fingerprint(features, targets, cfg);
    model.base_score = std::accumulate(targets.begin(), targets.end(), 0.0) /
                       static_cast<double>(n);

    // presorted row indices per feature (value asc, row index breaks ties)
    std::vector<std::vector<std::uint32_t>> sorted_idx(d);
    for (std::size_t f = 0; f < d; ++f) {
        auto& idx = sorted_idx[f];
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0u);
        std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return features.at(a, f) < features.at(b, f);
        });
    }

    std::vector<double> prediction(n, model.base_score);
    std::vector<double> gradient(n);

    const auto sample_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.subsample * static_cast<double>(n))));
    const auto feat_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.colsample_bytree * static_cast<double>(d))));

    TreeBuilder builder(features, sorted_idx, cfg);
    model.trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
    for (int t = 0; t < cfg.n_estimators; ++t) {
        for (std::size_t i = 0; i < n; ++i) gradient[i] = targets[i] - prediction[i];

        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::uint32_t> rows;
        if (sample_count == n) {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), 0u);
        } else {
            for (std::size_t r : rng.sample_without_replacement(n, sample_count))
                rows.push_back(static_cast<std::uint32_t>(r));
        }
        std::vector<std::uint32_t> feats;
        if (feat_count == d) {
            feats.resize(d);
            std::iota(feats.begin(), feats.end(), 0u);
        } else {
            for (std::size_t f : rng.sample_without_replacement(d, feat_count))
                feats.push_back(static_cast<std::uint32_t>(f));
        }

        RegressionTree tree = builder.build(gradient, rows, feats);
        for (std::size_t i = 0; i < n; ++i)
            prediction[i] += cfg.learning_rate * tree.value_at(features.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double predict_row(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.feature_count)
        throw std::invalid_argument("gbt predict: feature count mismatch");
    double value = model.base_score;
    for (const auto& tree : model.trees) value += model.config.learning_rate * tree.value_at(x);
    return value;
}

std::vector<double> predict(const TrainedModel& model, const Matrix& features) {
    if (features.rows > 0 && features.cols != model.feature_count)
        throw std::invalid_argument("gbt predict: feature count mismatch");
    std::vector<double> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) out[i] = predict_row(model, features.row(i));
    return out;
}

namespace {
constexpr const char* kModelFormat = "optpred-gbt";
constexpr int kModelVersion = 1;
}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["base_score"] = model.base_score;
    j["feature_count"] = model.feature_count;
    j["train_fingerprint"] = model.train_fingerprint;
    j["config"] = {{"n_estimators", model.config.n_estimators},
                   {"max_depth", model.config.max_depth},
                   {"learning_rate", model.config.learning_rate},
                   {"min_child_weight", model.config.min_child_weight},
                   {"colsample_bytree", model.config.colsample_bytree},
                   {"subsample", model.config.subsample},
                   {"seed", model.config.seed},
                   {"n_threads", model.config.n_threads}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    out << j.dump();
    out << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError("corrupt model file " + path.string() + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != kModelFormat)
        throw ModelFormatError("not an optpred model file: " + path.string());
    if (!j.contains("version") || j["version"].get<int>() != kModelVersion)
        throw ModelFormatError("unsupported model file version in " + path.string());

    TrainedModel model;
    try {
        model.base_score = j.at("base_score").get<double>();
        model.feature_count = j.at("feature_count").get<std::size_t>();
        model.train_fingerprint = j.at("train_fingerprint").get<std::uint64_t>();
        const auto& c = j.at("config");
        model.config.n_estimators = c.at("n_estimators").get<int>();
        model.config.max_depth = c.at("max_depth").get<int>();
        model.config.learning_rate = c.at("learning_rate").get<double>();
        model.config.min_child_weight = c.at("min_child_weight").get<double>();
        model.config.colsample_bytree = c.at("colsample_bytree").get<double>();
        model.config.subsample = c.at("subsample").get<double>();
        model.config.seed = c.at("seed").get<std::uint64_t>();
        model.config.n_threads = c.at("n_threads").get<int>();
        for (const auto& jt : j.at("trees")) {
            RegressionTree tree;
            tree.nodes.reserve(jt.size());
            for (const auto& jn : jt) {
                TreeNode n;
                n.feature = jn.at(0).get<int>();
                n.threshold = jn.at(1).get<double>();
                n.left = jn.at(2).get<int>();
                n.right = jn.at(3).get<int>();
                n.value = jn.at(4).get<double>();
                tree.nodes.push_back(n);
            }
            model.trees.push_back(std::move(tree));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError("malformed model file " + path.string() + ": " + e.what());
    }
    return model;
}

}  // namespace optpred
