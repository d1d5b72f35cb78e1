#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fscale/learners/dataset.hpp"

namespace fscale {

// CART with Gini impurity and Laplace-smoothed leaf probabilities.
// mtry < cols enables per-split feature subsampling (random forest use).
class DecisionTree {
public:
    struct Hyper {
        std::size_t max_depth = 12;
        std::size_t min_leaf = 5;
        std::size_t mtry = 0;  // 0 = all features
    };

    struct Node {
        std::int32_t feature = -1;  // -1 = leaf
        double threshold = 0.0;     // go left if x[feature] <= threshold
        std::int32_t left = -1, right = -1;
        std::size_t n_pos = 0, n_neg = 0;
    };

    std::vector<Node> nodes;
    Hyper hyper;
    std::size_t n_features = 0;

    void fit(const Dataset& d, const Hyper& h, std::uint64_t seed) {
        hyper = h;
        n_features = d.cols;
        nodes.clear();
        Rng rng(seed);
        std::vector<std::size_t> idx(d.rows());
        std::iota(idx.begin(), idx.end(), 0);
        build(d, idx, 0, rng);
    }

    // Bootstrap-sample variant used by the forest.
    void fit_on(const Dataset& d, std::vector<std::size_t> idx, const Hyper& h, Rng& rng) {
        hyper = h;
        n_features = d.cols;
        nodes.clear();
        build(d, idx, 0, rng);
    }

    double predict_proba(std::span<const double> x) const {
        std::int32_t cur = 0;
        while (nodes[cur].feature >= 0)
            cur = x[static_cast<std::size_t>(nodes[cur].feature)] <= nodes[cur].threshold
                      ? nodes[cur].left
                      : nodes[cur].right;
        const Node& leaf = nodes[cur];
        return (static_cast<double>(leaf.n_pos) + 1.0) /
               (static_cast<double>(leaf.n_pos + leaf.n_neg) + 2.0);
    }

    // Total Gini-impurity decrease per feature, weighted by node size.
    std::vector<double> raw_importance() const {
        std::vector<double> w(n_features, 0.0);
        if (nodes.empty()) return w;
        double total = static_cast<double>(nodes[0].n_pos + nodes[0].n_neg);
        for (const Node& nd : nodes) {
            if (nd.feature < 0) continue;
            const Node& l = nodes[nd.left];
            const Node& r = nodes[nd.right];
            double n = static_cast<double>(nd.n_pos + nd.n_neg);
            double nl = static_cast<double>(l.n_pos + l.n_neg);
            double nr = static_cast<double>(r.n_pos + r.n_neg);
            double dec = gini(nd.n_pos, nd.n_neg) -
                         (nl / n) * gini(l.n_pos, l.n_neg) -
                         (nr / n) * gini(r.n_pos, r.n_neg);
            w[static_cast<std::size_t>(nd.feature)] += (n / total) * dec;
        }
        return w;
    }

private:
    static double gini(std::size_t np, std::size_t nn) {
        double n = static_cast<double>(np + nn);
        if (n == 0.0) return 0.0;
        double p = static_cast<double>(np) / n;
        return 2.0 * p * (1.0 - p);
    }

    struct Split {
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = -1.0;  // impurity decrease
    };

    std::int32_t build(const Dataset& d, std::vector<std::size_t>& idx, std::size_t depth,
                       Rng& rng) {
        std::size_t np = 0;
        for (std::size_t i : idx)
            if (d.y[i] == 1) ++np;
        std::size_t nn = idx.size() - np;

        std::int32_t me = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(Node{-1, 0.0, -1, -1, np, nn});

        if (depth >= hyper.max_depth || np == 0 || nn == 0 ||
            idx.size() < 2 * hyper.min_leaf)
            return me;

        // zero-gain splits are kept while the node is impure: XOR-style
        // concepts need them to make progress
        Split best = find_split(d, idx, rng);
        if (best.score < 0.0) return me;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (d.row(i)[best.feature] <= best.threshold ? left : right).push_back(i);
        if (left.size() < hyper.min_leaf || right.size() < hyper.min_leaf) return me;

        idx.clear();
        idx.shrink_to_fit();
        std::int32_t l = build(d, left, depth + 1, rng);
        std::int32_t r = build(d, right, depth + 1, rng);
        nodes[me].feature = static_cast<std::int32_t>(best.feature);
        nodes[me].threshold = best.threshold;
        nodes[me].left = l;
        nodes[me].right = r;
        return me;
    }

    Split find_split(const Dataset& d, const std::vector<std::size_t>& idx, Rng& rng) {
        std::vector<std::size_t> feats(d.cols);
        std::iota(feats.begin(), feats.end(), 0);
        if (hyper.mtry > 0 && hyper.mtry < d.cols) {
            for (std::size_t i = 0; i < hyper.mtry; ++i) {
                std::size_t j = i + rng() % (d.cols - i);
                std::swap(feats[i], feats[j]);
            }
            feats.resize(hyper.mtry);
            std::sort(feats.begin(), feats.end());
        }

        Split best;
        std::vector<std::pair<double, int>> vals;
        vals.reserve(idx.size());
        double n = static_cast<double>(idx.size());
        std::size_t np_total = 0;
        for (std::size_t i : idx)
            if (d.y[i] == 1) ++np_total;
        double parent = gini(np_total, idx.size() - np_total);

        for (std::size_t f : feats) {
            vals.clear();
            for (std::size_t i : idx) vals.emplace_back(d.row(i)[f], d.y[i]);
            std::sort(vals.begin(), vals.end());
            std::size_t lp = 0, ln = 0;
            for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
                if (vals[k].second == 1) ++lp;
                else ++ln;
                if (vals[k].first == vals[k + 1].first) continue;
                std::size_t nl = k + 1;
                if (nl < hyper.min_leaf || vals.size() - nl < hyper.min_leaf) continue;
                std::size_t rp = np_total - lp;
                std::size_t rn = (idx.size() - np_total) - ln;
                double dec = parent -
                             (static_cast<double>(nl) / n) * gini(lp, ln) -
                             (static_cast<double>(vals.size() - nl) / n) * gini(rp, rn);
                double thr = vals[k].first + (vals[k + 1].first - vals[k].first) / 2.0;
                if (dec > best.score + 1e-15) {
                    best = Split{f, thr, dec};
                }
            }
        }
        return best;
    }
};

}  // namespace fscale
