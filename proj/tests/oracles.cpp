#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace oracles {
namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double phi(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi_v<double>);
}

}  // namespace

double quad_bsm_call(double spot, double strike, double rate, double vol, double ttm_years) {
    if (strike == 0.0) return spot;
    const double vs = vol * std::sqrt(ttm_years);
    const double df = std::exp(-rate * ttm_years);
    if (vs == 0.0) return std::max(spot - strike * df, 0.0);

    // payoff is zero below z0
    const double z0 = (std::log(strike / spot) - (rate - 0.5 * vol * vol) * ttm_years) / vs;
    const double lo = std::max(z0, -12.0);
    const double hi = std::max(12.0, z0 + 8.0);

    const int panels = 96;
    const double h = (hi - lo) / panels;
    long double total = 0.0L;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        const double mid = a + 0.5 * h;
        const double half = 0.5 * h;
        long double panel = 0.0L;
        for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
            for (const double sign : {-1.0, 1.0}) {
                const double z = mid + sign * half * kGlNodes[i];
                const double st =
                    spot * std::exp((rate - 0.5 * vol * vol) * ttm_years + vs * z);
                const double payoff = st > strike ? st - strike : 0.0;
                panel += static_cast<long double>(kGlWeights[i]) * payoff * phi(z);
            }
        }
        total += panel * half;
    }
    return static_cast<double>(df * total);
}

double cir_mean_vol_rk4(double kappa, double theta, double v0, double tau, std::size_t steps) {
    // m' = kappa (theta - m), a' = m, integrated 0..tau
    const double h = tau / static_cast<double>(steps);
    long double m = v0;
    long double a = 0.0L;
    const auto fm = [&](long double mv) { return kappa * (theta - mv); };
    for (std::size_t i = 0; i < steps; ++i) {
        const long double k1m = fm(m);
        const long double k1a = m;
        const long double k2m = fm(m + 0.5 * h * k1m);
        const long double k2a = m + 0.5 * h * k1m;
        const long double k3m = fm(m + 0.5 * h * k2m);
        const long double k3a = m + 0.5 * h * k2m;
        const long double k4m = fm(m + h * k3m);
        const long double k4a = m + h * k3m;
        m += h / 6.0L * (k1m + 2.0L * k2m + 2.0L * k3m + k4m);
        a += h / 6.0L * (k1a + 2.0L * k2a + 2.0L * k3a + k4a);
    }
    return std::sqrt(static_cast<double>(a / tau));
}

std::vector<double> insertion_sort(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double key = out[i];
        std::size_t j = i;
        while (j > 0 && out[j - 1] > key) {
            out[j] = out[j - 1];
            --j;
        }
        out[j] = key;
    }
    return out;
}

double percentile(std::span<const double> sample, double pct) {
    if (sample.empty()) throw std::invalid_argument("percentile: empty sample");
    std::vector<double> sorted = insertion_sort(sample);
    const double pos = (pct / 100.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

double subset_mean(std::span<const double> y, const std::vector<std::size_t>& rows) {
    double sum = 0.0;
    for (const std::size_t r : rows) sum += y[r];
    return sum / static_cast<double>(rows.size());
}

// mirrors the documented model-file convention: midpoint, nudged down when
// rounding would reach the upper value; rows with x <= threshold go left
double brute_threshold(double lo, double hi) {
    double mid = lo + 0.5 * (hi - lo);
    if (!(mid < hi)) mid = lo;
    return mid;
}

struct BruteSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
};

// Exhaustive enumeration of (feature, threshold), each candidate rescored
// from scratch. The score is the documented squared-error gain with sums
// accumulated in ascending row order, so equal-gain ties resolve exactly by
// the lowest feature index, then the lowest threshold.
BruteSplit best_split(const std::vector<std::vector<double>>& x, std::span<const double> y,
                      const std::vector<std::size_t>& rows, double min_child_weight) {
    BruteSplit best;
    double total_sum = 0.0;
    for (const std::size_t r : rows) total_sum += y[r];
    const auto total_count = static_cast<double>(rows.size());
    const std::size_t n_features = x.empty() ? 0 : x[0].size();

    for (std::size_t f = 0; f < n_features; ++f) {
        std::set<double> values;
        for (const std::size_t r : rows) values.insert(x[r][f]);
        if (values.size() < 2) continue;
        std::vector<double> sorted(values.begin(), values.end());
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            const double thr = brute_threshold(sorted[k], sorted[k + 1]);
            std::vector<std::size_t> left, right;
            double left_sum = 0.0;
            for (const std::size_t r : rows) {
                if (x[r][f] <= thr) {
                    left.push_back(r);
                    left_sum += y[r];
                } else {
                    right.push_back(r);
                }
            }
            if (left.size() < min_child_weight || right.size() < min_child_weight) continue;
            const auto left_count = static_cast<double>(left.size());
            const double right_sum = total_sum - left_sum;
            const double right_count = total_count - left_count;
            const double gain = left_sum * left_sum / left_count +
                                right_sum * right_sum / right_count -
                                total_sum * total_sum / total_count;
            if (gain <= 0.0) continue;
            if (!best.found || gain > best.gain) {
                best = {true, static_cast<int>(f), thr, gain, std::move(left), std::move(right)};
            }
        }
    }
    return best;
}

int grow(BruteTree& tree, const std::vector<std::vector<double>>& x, std::span<const double> y,
         const std::vector<std::size_t>& rows, int depth_left, double min_child_weight) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (depth_left == 0) {
        tree.nodes[idx].value = subset_mean(y, rows);
        return idx;
    }
    BruteSplit split = best_split(x, y, rows, min_child_weight);
    if (!split.found) {
        tree.nodes[idx].value = subset_mean(y, rows);
        return idx;
    }
    tree.nodes[idx].feature = split.feature;
    tree.nodes[idx].threshold = split.threshold;
    const int left = grow(tree, x, y, split.left, depth_left - 1, min_child_weight);
    const int right = grow(tree, x, y, split.right, depth_left - 1, min_child_weight);
    tree.nodes[idx].left = left;
    tree.nodes[idx].right = right;
    return idx;
}

}  // namespace

BruteTree brute_force_tree(const std::vector<std::vector<double>>& x, std::span<const double> y,
                           int max_depth, double min_child_weight) {
    BruteTree tree;
    std::vector<std::size_t> rows(y.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow(tree, x, y, rows, max_depth, min_child_weight);
    return tree;
}

}  // namespace oracles
