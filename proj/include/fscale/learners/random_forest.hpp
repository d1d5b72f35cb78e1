#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "fscale/learners/decision_tree.hpp"

namespace fscale {

class RandomForest {
public:
    struct Hyper {
        std::size_t n_trees = 50;
        std::size_t max_depth = 12;
        std::size_t min_leaf = 5;
        bool bootstrap = true;
        std::size_t mtry = 0;  // 0 = sqrt(cols), rounded
    };

    std::vector<DecisionTree> trees;
    Hyper hyper;

    void fit(const Dataset& d, const Hyper& h, std::uint64_t seed) {
        hyper = h;
        trees.assign(h.n_trees, DecisionTree{});
        std::size_t mtry = h.mtry ? h.mtry
                                  : static_cast<std::size_t>(
                                        std::lround(std::sqrt(static_cast<double>(d.cols))));
        DecisionTree::Hyper th{h.max_depth, h.min_leaf, mtry};
        for (std::size_t t = 0; t < h.n_trees; ++t) {
            Rng rng(derive_seed(seed, t));
            std::vector<std::size_t> idx(d.rows());
            if (h.bootstrap) {
                for (auto& i : idx) i = rng() % d.rows();
            } else {
                std::iota(idx.begin(), idx.end(), 0);
            }
            trees[t].fit_on(d, std::move(idx), th, rng);
        }
    }

    double predict_proba(std::span<const double> x) const {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict_proba(x);
        return sum / static_cast<double>(trees.size());
    }

    std::vector<double> raw_importance() const {
        std::vector<double> w;
        for (const auto& t : trees) {
            auto wi = t.raw_importance();
            if (w.empty()) w.assign(wi.size(), 0.0);
            for (std::size_t j = 0; j < wi.size(); ++j) w[j] += wi[j];
        }
        return w;
    }
};

}  // namespace fscale
