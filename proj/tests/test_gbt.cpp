#include <doctest.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "optpred/gbt.hpp"
#include "optpred/rng.hpp"
#include "oracles.hpp"
#include "test_env.hpp"

using namespace optpred;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    return m;
}

GbtConfig small_config(int trees, int depth) {
    GbtConfig cfg;
    cfg.n_estimators = trees;
    cfg.max_depth = depth;
    cfg.learning_rate = 1.0;
    cfg.min_child_weight = 1.0;
    cfg.colsample_bytree = 1.0;
    cfg.subsample = 1.0;
    return cfg;
}

// recursive structural comparison (node layouts differ between builders)
void check_same_tree(const RegressionTree& got, int gi, const oracles::BruteTree& want, int wi) {
    const auto& g = got.nodes[static_cast<std::size_t>(gi)];
    const auto& w = want.nodes[static_cast<std::size_t>(wi)];
    REQUIRE(g.is_leaf() == w.is_leaf());
    if (g.is_leaf()) {
        CHECK(g.value == doctest::Approx(w.value).epsilon(1e-12));
        return;
    }
    CHECK(g.feature == w.feature);
    CHECK(g.threshold == w.threshold);
    check_same_tree(got, g.left, want, w.left);
    check_same_tree(got, g.right, want, w.right);
}

std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& row : rows)
        for (auto& v : row) v = rng.uniform(-3.0, 3.0);
    return rows;
}

}  // namespace

TEST_SUITE("gbt") {

TEST_CASE("constant target collapses to the base score") {
    Rng rng(1);
    const auto rows = random_rows(rng, 40, 5);
    const std::vector<double> y(40, 3.7);
    const auto model = fit(to_matrix(rows), y, small_config(20, 3));
    CHECK(model.base_score == doctest::Approx(3.7).epsilon(1e-15));
    for (const double p : predict(model, to_matrix(rows)))
        CHECK(p == doctest::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("zero learning rate predicts the base score everywhere") {
    Rng rng(2);
    const auto rows = random_rows(rng, 30, 4);
    std::vector<double> y(30);
    for (auto& v : y) v = rng.uniform(-5.0, 5.0);
    auto cfg = small_config(10, 3);
    cfg.learning_rate = 0.0;
    const auto model = fit(to_matrix(rows), y, cfg);
    const double base = model.base_score;
    for (const double p : predict(model, to_matrix(rows))) CHECK(p == base);
}

TEST_CASE("single stump on a separable 4-point set matches exhaustive search") {
    const std::vector<std::vector<double>> rows = {{1.0, 5.0}, {2.0, 5.0}, {8.0, 5.0}, {9.0, 5.0}};
    const std::vector<double> y = {1.0, 1.2, 7.0, 7.4};
    const auto model = fit(to_matrix(rows), y, small_config(1, 1));

    const auto oracle = oracles::brute_force_tree(rows, y, 1, 1.0);
    REQUIRE(model.trees.size() == 1);
    // the booster fits residuals about the mean; shift oracle leaves
    oracles::BruteTree shifted = oracle;
    for (auto& n : shifted.nodes)
        if (n.is_leaf()) n.value -= model.base_score;
    check_same_tree(model.trees[0], 0, shifted, 0);

    CHECK(model.trees[0].nodes[0].feature == 0);
    CHECK(model.trees[0].nodes[0].threshold == 5.0);  // midpoint of 2 and 8
}

TEST_CASE("greedy trees equal per-node exhaustive search (N <= 30, depth <= 2)") {
    Rng rng(33);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 6 + rng.uniform_index(25);
        const std::size_t d = 1 + rng.uniform_index(4);
        const int depth = 1 + static_cast<int>(rng.uniform_index(2));
        const double mcw = 1.0 + static_cast<double>(rng.uniform_index(3));

        auto rows = random_rows(rng, n, d);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = std::sin(rows[i][0]) + 0.3 * rng.uniform(-1.0, 1.0);

        auto cfg = small_config(1, depth);
        cfg.min_child_weight = mcw;
        const auto model = fit(to_matrix(rows), y, cfg);

        std::vector<double> residual(y);
        for (auto& v : residual) v -= model.base_score;
        const auto oracle = oracles::brute_force_tree(rows, residual, depth, mcw);
        check_same_tree(model.trees[0], 0, oracle, 0);
    }
}

TEST_CASE("structural audit: depth cap and min_child_weight hold on every tree") {
    Rng rng(44);
    const std::size_t n = 400;
    auto rows = random_rows(rng, n, 6);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = rows[i][1] * rows[i][1] + std::sin(3.0 * rows[i][3]) + 0.1 * rng.normal();

    GbtConfig cfg;
    cfg.n_estimators = 30;
    cfg.max_depth = 4;
    cfg.learning_rate = 0.3;
    cfg.min_child_weight = 7.0;
    cfg.subsample = 1.0;  // full sampling so leaf counts are externally checkable
    cfg.colsample_bytree = 1.0;
    const auto model = fit(to_matrix(rows), y, cfg);
    const auto x = to_matrix(rows);

    for (const auto& tree : model.trees) {
        CHECK(tree.depth() <= cfg.max_depth);

        // route all training rows and count arrivals per node
        std::vector<std::size_t> count(tree.nodes.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int idx = 0;
            ++count[0];
            while (!tree.nodes[static_cast<std::size_t>(idx)].is_leaf()) {
                const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
                idx = x.at(i, static_cast<std::size_t>(node.feature)) <= node.threshold
                          ? node.left
                          : node.right;
                ++count[static_cast<std::size_t>(idx)];
            }
        }
        for (std::size_t k = 0; k < tree.nodes.size(); ++k)
            if (tree.nodes[k].is_leaf())
                CHECK(static_cast<double>(count[k]) >= cfg.min_child_weight);
    }
}

TEST_CASE("in-sample loss is non-increasing with full sampling") {
    Rng rng(55);
    const std::size_t n = 300;
    auto rows = random_rows(rng, n, 5);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = rows[i][0] * 1.5 - rows[i][2] + 0.2 * rng.normal();

    GbtConfig cfg;
    cfg.n_estimators = 40;
    cfg.max_depth = 3;
    cfg.learning_rate = 0.2;
    cfg.subsample = 1.0;
    cfg.colsample_bytree = 1.0;
    cfg.min_child_weight = 2.0;
    const auto model = fit(to_matrix(rows), y, cfg);
    const auto x = to_matrix(rows);

    std::vector<double> pred(n, model.base_score);
    double prev_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) prev_loss += (y[i] - pred[i]) * (y[i] - pred[i]);
    for (const auto& tree : model.trees) {
        for (std::size_t i = 0; i < n; ++i)
            pred[i] += cfg.learning_rate * tree.value_at(x.row(i));
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += (y[i] - pred[i]) * (y[i] - pred[i]);
        CHECK(loss <= prev_loss * (1.0 + 1e-12) + 1e-12);
        prev_loss = loss;
    }
}

TEST_CASE("fit is deterministic and thread-count independent") {
    Rng rng(66);
    const std::size_t n = 500;
    auto rows = random_rows(rng, n, 8);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::cos(rows[i][4]) + 0.05 * rng.normal();

    GbtConfig cfg;
    cfg.n_estimators = 25;
    cfg.max_depth = 5;
    cfg.seed = 987;
    cfg.n_threads = 1;
    const auto m1 = fit(to_matrix(rows), y, cfg);
    cfg.n_threads = 4;
    const auto m2 = fit(to_matrix(rows), y, cfg);
    cfg.n_threads = 7;
    const auto m3 = fit(to_matrix(rows), y, cfg);

    REQUIRE(m1.trees.size() == m2.trees.size());
    for (std::size_t t = 0; t < m1.trees.size(); ++t) {
        REQUIRE(m1.trees[t].nodes.size() == m2.trees[t].nodes.size());
        REQUIRE(m1.trees[t].nodes.size() == m3.trees[t].nodes.size());
        for (std::size_t k = 0; k < m1.trees[t].nodes.size(); ++k) {
            const auto &a = m1.trees[t].nodes[k], &b = m2.trees[t].nodes[k],
                       &c = m3.trees[t].nodes[k];
            CHECK(a.feature == b.feature);
            CHECK(a.threshold == b.threshold);
            CHECK(a.value == b.value);
            CHECK(a.feature == c.feature);
            CHECK(a.threshold == c.threshold);
            CHECK(a.value == c.value);
        }
    }
}

TEST_CASE("smooth-function self-consistency with the default configuration") {
    Rng rng(77);
    const std::size_t n = 2000;
    std::vector<std::vector<double>> rows(n, std::vector<double>(23));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : rows[i]) v = rng.uniform(-2.0, 2.0);
        y[i] = std::sin(rows[i][3]);
    }
    GbtConfig cfg;  // defaults: 750 trees, depth 7, lr 0.03
    cfg.seed = 4242;
    const auto model = fit(to_matrix(rows), y, cfg);
    const auto pred = predict(model, to_matrix(rows));
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (pred[i] - y[i]) * (pred[i] - y[i]);
    CHECK(std::sqrt(ss / static_cast<double>(n)) < 0.05);
}

TEST_CASE("predict validates dimensions and handles the empty matrix") {
    Rng rng(9);
    const auto rows = random_rows(rng, 20, 3);
    std::vector<double> y(20, 1.0);
    const auto model = fit(to_matrix(rows), y, small_config(2, 2));

    CHECK(predict(model, Matrix(0, 3)).empty());
    CHECK(predict(model, Matrix(0, 0)).empty());
    CHECK_THROWS_AS(predict(model, Matrix(2, 7)), std::invalid_argument);
    CHECK_THROWS_AS(fit(Matrix(0, 3), std::vector<double>{}, small_config(1, 1)),
                    std::invalid_argument);
}

TEST_CASE("predict is permutation equivariant over rows") {
    Rng rng(10);
    auto rows = random_rows(rng, 50, 4);
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) y[i] = rows[i][0];
    const auto model = fit(to_matrix(rows), y, small_config(5, 3));

    auto reversed = rows;
    std::reverse(reversed.begin(), reversed.end());
    const auto p1 = predict(model, to_matrix(rows));
    const auto p2 = predict(model, to_matrix(reversed));
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[p2.size() - 1 - i]);
}

TEST_CASE("model save/load round trip predicts bit-identically") {
    TempDir tmp("model");
    Rng rng(12);
    const auto rows = random_rows(rng, 200, 6);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = rows[i][2] + 0.5 * rng.normal();

    GbtConfig cfg;
    cfg.n_estimators = 50;
    cfg.max_depth = 4;
    cfg.seed = 31337;
    const auto model = fit(to_matrix(rows), y, cfg);

    const auto file = tmp.path / "model.json";
    save_model(model, file);
    const auto loaded = load_model(file);
    CHECK(loaded.train_fingerprint == model.train_fingerprint);
    CHECK(loaded.base_score == model.base_score);

    const auto probe = random_rows(rng, 50, 6);
    const auto p1 = predict(model, to_matrix(probe));
    const auto p2 = predict(loaded, to_matrix(probe));
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("model loader rejects damaged and foreign files") {
    TempDir tmp("badmodel");
    const auto truncated = tmp.path / "truncated.json";
    {
        std::ofstream out(truncated);
        out << R"({"format":"optpred-gbt","version":1,"trees":[[)";
    }
    CHECK_THROWS_AS(load_model(truncated), ModelFormatError);

    const auto foreign = tmp.path / "foreign.json";
    {
        std::ofstream out(foreign);
        out << R"({"format":"something-else","version":1})";
    }
    CHECK_THROWS_AS(load_model(foreign), ModelFormatError);

    const auto future = tmp.path / "future.json";
    {
        std::ofstream out(future);
        out << R"({"format":"optpred-gbt","version":99,"trees":[]})";
    }
    CHECK_THROWS_AS(load_model(future), ModelFormatError);

    CHECK_THROWS_AS(load_model(tmp.path / "missing.json"), std::runtime_error);
}

}  // TEST_SUITE
