#pragma once

#include <map>
#include <span>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fscale/learners/dataset.hpp"
#include "fscale/learners/decision_tree.hpp"
#include "fscale/learners/logistic_regression.hpp"
#include "fscale/learners/naive_bayes.hpp"
#include "fscale/learners/random_forest.hpp"

namespace fscale {

enum class ClassifierKind { logreg, gnb, cart, rforest };

// Complexity order used for model-selection tie breaking: simpler first.
inline constexpr ClassifierKind kKindsByComplexity[] = {
    ClassifierKind::logreg, ClassifierKind::gnb, ClassifierKind::cart,
    ClassifierKind::rforest};

inline const char* kind_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::logreg: return "logreg";
        case ClassifierKind::gnb: return "gnb";
        case ClassifierKind::cart: return "cart";
        case ClassifierKind::rforest: return "rforest";
    }
    throw std::logic_error("bad kind");
}

inline ClassifierKind kind_from_name(const std::string& s) {
    for (ClassifierKind k : kKindsByComplexity)
        if (s == kind_name(k)) return k;
    throw std::invalid_argument("unknown classifier kind '" + s + "'");
}

using HyperMap = std::map<std::string, double>;

// Value-semantic classifier: fit once, then immutable and safe for
// concurrent predict_proba.
class Classifier {
public:
    Classifier() = default;

    static Classifier fit(ClassifierKind kind, const Dataset& train, const HyperMap& hyper,
                          std::uint64_t seed) {
        train.validate();
        Classifier c;
        c.kind_ = kind;
        c.dim_ = train.cols;
        c.feature_names_ = train.feature_names;
        c.seed_ = seed;
        c.hyper_ = hyper;
        auto get = [&](const char* k, double dflt) {
            auto it = hyper.find(k);
            return it == hyper.end() ? dflt : it->second;
        };
        switch (kind) {
            case ClassifierKind::logreg: {
                LogisticRegression m;
                LogisticRegression::Hyper h;
                h.l2 = get("l2", 1e-4);
                h.learning_rate = get("learning_rate", 0.5);
                h.max_epochs = static_cast<std::size_t>(get("max_epochs", 500));
                h.grad_tol = get("grad_tol", 1e-6);
                m.fit(train, h);
                c.impl_ = std::move(m);
                break;
            }
            case ClassifierKind::gnb: {
                GaussianNB m;
                m.fit(train);
                c.impl_ = std::move(m);
                break;
            }
            case ClassifierKind::cart: {
                DecisionTree m;
                DecisionTree::Hyper h;
                h.max_depth = static_cast<std::size_t>(get("max_depth", 12));
                h.min_leaf = static_cast<std::size_t>(get("min_leaf", 5));
                m.fit(train, h, seed);
                c.impl_ = std::move(m);
                break;
            }
            case ClassifierKind::rforest: {
                RandomForest m;
                RandomForest::Hyper h;
                h.n_trees = static_cast<std::size_t>(get("n_trees", 50));
                h.max_depth = static_cast<std::size_t>(get("max_depth", 12));
                h.min_leaf = static_cast<std::size_t>(get("min_leaf", 5));
                h.bootstrap = get("bootstrap", 1.0) != 0.0;
                h.mtry = static_cast<std::size_t>(get("mtry", 0));
                m.fit(train, h, seed);
                c.impl_ = std::move(m);
                break;
            }
        }
        return c;
    }

    ClassifierKind kind() const { return require_fit(), kind_; }
    std::size_t dim() const { return require_fit(), dim_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    double predict_proba(std::span<const double> x) const {
        require_fit();
        if (x.size() != dim_)
            throw std::invalid_argument("feature dimension mismatch: got " +
                                        std::to_string(x.size()) + ", expected " +
                                        std::to_string(dim_));
        return std::visit(
            [&](const auto& m) -> double {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, std::monostate>)
                    throw std::logic_error("classifier not fitted");
                else
                    return m.predict_proba(x);
            },
            impl_);
    }

    // Eq. 5 argmax with the 0.5 threshold; ties classify inactive.
    int classify(std::span<const double> x) const { return predict_proba(x) > 0.5 ? 1 : -1; }

    // Per-feature weights Fw, normalized to sum 1.
    std::vector<double> feature_weights() const {
        require_fit();
        auto w = std::visit(
            [](const auto& m) -> std::vector<double> {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, std::monostate>)
                    throw std::logic_error("classifier not fitted");
                else
                    return m.raw_importance();
            },
            impl_);
        double sum = 0.0;
        for (double x : w) sum += x;
        if (sum > 0.0)
            for (double& x : w) x /= sum;
        return w;
    }

    nlohmann::json to_json() const {
        require_fit();
        nlohmann::json j;
        j["kind"] = kind_name(kind_);
        j["dim"] = dim_;
        j["feature_names"] = feature_names_;
        j["seed"] = seed_;
        j["hyper"] = hyper_;
        std::visit([&](const auto& m) { params_to_json(m, j["params"]); }, impl_);
        return j;
    }

    static Classifier from_json(const nlohmann::json& j) {
        Classifier c;
        c.kind_ = kind_from_name(j.at("kind").get<std::string>());
        c.dim_ = j.at("dim").get<std::size_t>();
        c.feature_names_ = j.at("feature_names").get<std::vector<std::string>>();
        c.seed_ = j.at("seed").get<std::uint64_t>();
        c.hyper_ = j.at("hyper").get<HyperMap>();
        const auto& p = j.at("params");
        switch (c.kind_) {
            case ClassifierKind::logreg: {
                LogisticRegression m;
                m.weights = p.at("weights").get<std::vector<double>>();
                m.bias = p.at("bias").get<double>();
                m.mean = p.at("mean").get<std::vector<double>>();
                m.scale = p.at("scale").get<std::vector<double>>();
                c.impl_ = std::move(m);
                break;
            }
            case ClassifierKind::gnb: {
                GaussianNB m;
                m.log_prior[0] = p.at("log_prior")[0].get<double>();
                m.log_prior[1] = p.at("log_prior")[1].get<double>();
                for (int cl = 0; cl < 2; ++cl) {
                    m.mean[cl] = p.at("mean")[cl].get<std::vector<double>>();
                    m.var[cl] = p.at("var")[cl].get<std::vector<double>>();
                }
                c.impl_ = std::move(m);
                break;
            }
            case ClassifierKind::cart: {
                DecisionTree m;
                tree_from_json(p, m);
                c.impl_ = std::move(m);
                break;
            }
            case ClassifierKind::rforest: {
                RandomForest m;
                for (const auto& tj : p.at("trees")) {
                    DecisionTree t;
                    tree_from_json(tj, t);
                    m.trees.push_back(std::move(t));
                }
                c.impl_ = std::move(m);
                break;
            }
        }
        return c;
    }

private:
    void require_fit() const {
        if (std::holds_alternative<std::monostate>(impl_))
            throw std::logic_error("classifier not fitted");
    }

    static void params_to_json(const std::monostate&, nlohmann::json&) {}
    static void params_to_json(const LogisticRegression& m, nlohmann::json& j) {
        j["weights"] = m.weights;
        j["bias"] = m.bias;
        j["mean"] = m.mean;
        j["scale"] = m.scale;
    }
    static void params_to_json(const GaussianNB& m, nlohmann::json& j) {
        j["log_prior"] = {m.log_prior[0], m.log_prior[1]};
        j["mean"] = {m.mean[0], m.mean[1]};
        j["var"] = {m.var[0], m.var[1]};
    }
    static void tree_to_json(const DecisionTree& m, nlohmann::json& j) {
        j["n_features"] = m.n_features;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& nd : m.nodes)
            arr.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.n_pos, nd.n_neg});
        j["nodes"] = std::move(arr);
    }
    static void params_to_json(const DecisionTree& m, nlohmann::json& j) {
        tree_to_json(m, j);
    }
    static void params_to_json(const RandomForest& m, nlohmann::json& j) {
        j["trees"] = nlohmann::json::array();
        for (const auto& t : m.trees) {
            nlohmann::json tj;
            tree_to_json(t, tj);
            j["trees"].push_back(std::move(tj));
        }
    }
    static void tree_from_json(const nlohmann::json& j, DecisionTree& m) {
        m.n_features = j.at("n_features").get<std::size_t>();
        for (const auto& nj : j.at("nodes")) {
            DecisionTree::Node nd;
            nd.feature = nj[0].get<std::int32_t>();
            nd.threshold = nj[1].get<double>();
            nd.left = nj[2].get<std::int32_t>();
            nd.right = nj[3].get<std::int32_t>();
            nd.n_pos = nj[4].get<std::size_t>();
            nd.n_neg = nj[5].get<std::size_t>();
            m.nodes.push_back(nd);
        }
    }

    ClassifierKind kind_ = ClassifierKind::logreg;
    std::size_t dim_ = 0;
    std::vector<std::string> feature_names_;
    std::uint64_t seed_ = 0;
    HyperMap hyper_;
    std::variant<std::monostate, LogisticRegression, GaussianNB, DecisionTree, RandomForest>
        impl_;
};

}  // namespace fscale
