#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fscale/cascade.hpp"
#include "fscale/features.hpp"
#include "fscale/graph.hpp"
#include "fscale/learners/classifier.hpp"
#include "fscale/rng.hpp"

namespace fscale {

// One (node, message, evaluation time) training instance before feature
// extraction. Positives are evaluated strictly before the node's own
// activation; negatives at the cascade's last observed timestamp.
struct InstanceRef {
    std::size_t cascade = 0;
    NodeId node = 0;
    double eval_time = 0.0;
    int label = 0;  // +1 / -1
};

// Balanced instance construction: every activation with exposure context
// becomes a positive; exposed-but-never-activated (node, message) pairs
// become negatives, downsampled uniformly to the positive count.
inline std::vector<InstanceRef> build_instance_refs(const SocialGraph& g,
                                                    const Corpus& corpus,
                                                    std::uint64_t seed) {
    std::vector<InstanceRef> positives, negatives;
    for (std::size_t mi = 0; mi < corpus.cascades.size(); ++mi) {
        const Cascade& c = corpus.cascades[mi];
        std::unordered_map<NodeId, double> seen;  // node -> activation time
        for (const auto& e : c.events) {
            // exclude seed/root activations: no activated parent before t(v)
            bool exposed = false;
            for (NodeId p : g.parents(e.node)) {
                auto it = seen.find(p);
                if (it != seen.end() && it->second < e.t) {
                    exposed = true;
                    break;
                }
            }
            if (exposed) positives.push_back({mi, e.node, e.t, +1});
            seen.try_emplace(e.node, e.t);
        }
    }
    for (NodeId v = 0; v < g.node_count(); ++v) {
        for (const auto& exp : corpus.exposures(v)) {
            if (exp.own_time < kInf || exp.first_parent_time == kInf) continue;
            double t_end = corpus.cascades[exp.message].last_time();
            negatives.push_back({exp.message, v, t_end, -1});
        }
    }
    if (positives.empty()) throw std::runtime_error("corpus yields zero positive instances");
    if (negatives.empty()) throw std::runtime_error("corpus yields zero negative instances");

    if (negatives.size() > positives.size()) {
        Rng rng(derive_seed(seed, "negatives"));
        for (std::size_t i = negatives.size(); i > 1; --i)
            std::swap(negatives[i - 1], negatives[rng() % i]);
        negatives.resize(positives.size());
        std::sort(negatives.begin(), negatives.end(), [](const auto& a, const auto& b) {
            return a.cascade != b.cascade ? a.cascade < b.cascade : a.node < b.node;
        });
    }
    std::vector<InstanceRef> all = std::move(positives);
    all.insert(all.end(), negatives.begin(), negatives.end());
    return all;
}

inline Dataset build_instances(const SocialGraph& g, const Corpus& corpus,
                               std::uint64_t seed,
                               std::vector<InstanceRef>* refs_out = nullptr) {
    auto refs = build_instance_refs(g, corpus, seed);
    Dataset d;
    d.cols = kNumFeatures;
    d.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    for (const auto& r : refs) {
        const Cascade& c = corpus.cascades[r.cascade];
        CascadeState s = r.label > 0 ? observe_before(g, c, r.eval_time)
                                     : full_state(g, c);
        FeatureVector x = extract(g, corpus, s, r.node, corpus.messages[r.cascade]);
        d.add_row(x, r.label);
    }
    if (refs_out) *refs_out = std::move(refs);
    return d;
}

// Seeded stratified k-fold CV accuracy; the J criterion everywhere below.
inline double cv_accuracy(ClassifierKind kind, const Dataset& d, std::size_t folds,
                          std::uint64_t seed, const HyperMap& hyper = {}) {
    auto assign = stratified_folds(d, folds, derive_seed(seed, "folds"));
    std::size_t correct = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, val;
        for (std::size_t i = 0; i < d.rows(); ++i)
            (assign[i] == f ? val : train).push_back(i);
        if (val.empty()) continue;
        Classifier c = Classifier::fit(kind, d.select_rows(train), hyper,
                                       derive_seed(seed, f));
        for (std::size_t i : val)
            if (c.classify(d.row(i)) == d.y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(d.rows());
}

struct ModelSelectResult {
    ClassifierKind kind;
    std::map<std::string, double> accuracy;  // per candidate kind
};

// Argmax of k-fold CV accuracy over candidate kinds; ties within 0.005
// go to the simpler kind (logreg < gnb < cart < rforest).
inline ModelSelectResult model_select(const Dataset& d, std::size_t folds,
                                      std::uint64_t seed) {
    ModelSelectResult r{ClassifierKind::logreg, {}};
    double best = -1.0;
    for (ClassifierKind k : kKindsByComplexity) {
        double acc = cv_accuracy(k, d, folds, derive_seed(seed, kind_name(k)));
        r.accuracy[kind_name(k)] = acc;
        best = std::max(best, acc);
    }
    for (ClassifierKind k : kKindsByComplexity) {
        if (r.accuracy[kind_name(k)] >= best - 0.005) {
            r.kind = k;
            break;
        }
    }
    return r;
}

namespace detail {

class SubsetCriterion {
public:
    SubsetCriterion(ClassifierKind kind, const Dataset& d, std::size_t folds,
                    std::uint64_t seed)
        : kind_(kind), data_(d), folds_(folds), seed_(seed) {}

    double operator()(std::uint32_t mask) {
        auto it = cache_.find(mask);
        if (it != cache_.end()) return it->second;
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < data_.cols; ++j)
            if (mask & (1u << j)) idx.push_back(j);
        double j = cv_accuracy(kind_, data_.select_columns(idx), folds_, seed_);
        cache_.emplace(mask, j);
        return j;
    }

private:
    ClassifierKind kind_;
    const Dataset& data_;
    std::size_t folds_;
    std::uint64_t seed_;
    std::unordered_map<std::uint32_t, double> cache_;
};

inline std::vector<std::size_t> mask_to_indices(std::uint32_t mask, std::size_t d) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < d; ++j)
        if (mask & (1u << j)) idx.push_back(j);
    return idx;
}

}  // namespace detail

// Sequential Floating Backward Selection: start from the full set,
// alternate exclusion of the least useful feature with conditional
// re-inclusion of a removed one whenever that strictly improves the best
// criterion value recorded at the target size. The feature excluded in
// the current alternation is barred from immediate re-inclusion.
struct SfbsTrail {
    // best criterion value and subset seen at each size k..d
    std::vector<double> best_j;          // indexed by size
    std::vector<std::uint32_t> best_set;
};

inline std::vector<std::size_t> sfbs(ClassifierKind kind, const Dataset& data,
                                     std::size_t k, std::size_t folds, std::uint64_t seed,
                                     double* j_out = nullptr, SfbsTrail* trail = nullptr) {
    const std::size_t d = data.cols;
    if (k < 1 || k > d) throw std::invalid_argument("desired feature count out of range");
    if (d > 31) throw std::invalid_argument("sfbs supports at most 31 features");

    detail::SubsetCriterion J(kind, data, folds, seed);
    const std::uint32_t full = d == 32 ? 0xffffffffu : ((1u << d) - 1u);
    std::uint32_t cur = full;
    std::size_t size = d;
    // best criterion value and subset seen at each size
    std::vector<double> best_j(d + 1, -1.0);
    std::vector<std::uint32_t> best_set(d + 1, 0);
    best_j[d] = J(full);
    best_set[d] = full;

    while (size > k) {
        // Exclusion: drop the feature whose removal maximizes J
        std::uint32_t excluded = 0;
        double best_after = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            std::uint32_t bit = 1u << j;
            if (!(cur & bit)) continue;
            double val = J(cur & ~bit);
            if (val > best_after) {
                best_after = val;
                excluded = bit;
            }
        }
        cur &= ~excluded;
        --size;
        if (best_after > best_j[size]) {
            best_j[size] = best_after;
            best_set[size] = cur;
        }

        // Conditional inclusion: float back up while it strictly improves
        // the recorded best at that size (never re-adding `excluded`).
        while (size < d) {
            std::uint32_t add = 0;
            double best_inc = -1.0;
            for (std::size_t j = 0; j < d; ++j) {
                std::uint32_t bit = 1u << j;
                if ((cur & bit) || bit == excluded) continue;
                double val = J(cur | bit);
                if (val > best_inc) {
                    best_inc = val;
                    add = bit;
                }
            }
            if (add == 0 || best_inc <= best_j[size + 1]) break;
            cur |= add;
            ++size;
            best_j[size] = best_inc;
            best_set[size] = cur;
            excluded = 0;
        }
    }
    if (j_out) *j_out = best_j[k];
    if (trail) *trail = SfbsTrail{best_j, best_set};
    return detail::mask_to_indices(best_set[k], d);
}

// Plain sequential backward selection, kept as the comparison oracle for
// the floating variant.
inline std::vector<std::size_t> sbs(ClassifierKind kind, const Dataset& data, std::size_t k,
                                    std::size_t folds, std::uint64_t seed,
                                    double* j_out = nullptr) {
    const std::size_t d = data.cols;
    if (k < 1 || k > d) throw std::invalid_argument("desired feature count out of range");
    detail::SubsetCriterion J(kind, data, folds, seed);
    std::uint32_t cur = (1u << d) - 1u;
    std::size_t size = d;
    double j_cur = J(cur);
    while (size > k) {
        std::uint32_t drop = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            std::uint32_t bit = 1u << j;
            if (!(cur & bit)) continue;
            double val = J(cur & ~bit);
            if (val > best) {
                best = val;
                drop = bit;
            }
        }
        cur &= ~drop;
        --size;
        j_cur = best;
    }
    if (j_out) *j_out = j_cur;
    return detail::mask_to_indices(cur, d);
}

// Normalized per-mechanism sums of the selected-feature weights.
inline std::array<double, 4> mechanism_measure(const std::vector<double>& weights,
                                               const std::vector<std::size_t>& selected) {
    std::array<double, 4> w{};
    for (std::size_t i = 0; i < selected.size(); ++i)
        w[static_cast<std::size_t>(kFeatureMechanism[selected[i]])] += weights[i];
    double sum = w[0] + w[1] + w[2] + w[3];
    if (sum > 0.0)
        for (double& x : w) x /= sum;
    return w;
}

struct TrainedModel {
    Classifier classifier;                  // fitted on the selected subspace
    std::vector<std::size_t> selected;      // Fr, sorted indices into the 18-space
    std::vector<double> weights;            // Fw over selected, sums to 1
    std::array<double, 4> mechanism;        // W: CSM, TAM, SCM, EM
    // provenance
    std::uint64_t seed = 0;
    std::size_t folds = 10;
    std::map<std::string, double> candidate_accuracy;
    double selected_accuracy = 0.0;

    std::vector<double> project(const FeatureVector& x) const {
        std::vector<double> v(selected.size());
        for (std::size_t i = 0; i < selected.size(); ++i) v[i] = x[selected[i]];
        return v;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format"] = "fscale-model";
        j["feature_space"] = nlohmann::json::object();
        j["feature_space"]["names"] = kFeatureNames;
        std::vector<std::string> mech;
        for (auto m : kFeatureMechanism)
            mech.push_back(kMechanismNames[static_cast<std::size_t>(m)]);
        j["feature_space"]["mechanisms"] = mech;
        j["classifier"] = classifier.to_json();
        j["selected"] = selected;
        j["weights"] = weights;
        j["mechanism_measure"] = {{"CSM", mechanism[0]},
                                  {"TAM", mechanism[1]},
                                  {"SCM", mechanism[2]},
                                  {"EM", mechanism[3]}};
        j["provenance"] = {{"seed", seed},
                           {"folds", folds},
                           {"candidate_accuracy", candidate_accuracy},
                           {"selected_accuracy", selected_accuracy}};
        return j;
    }

    static TrainedModel from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "fscale-model")
            throw std::runtime_error("not a model file");
        TrainedModel m;
        m.classifier = Classifier::from_json(j.at("classifier"));
        m.selected = j.at("selected").get<std::vector<std::size_t>>();
        m.weights = j.at("weights").get<std::vector<double>>();
        const auto& mm = j.at("mechanism_measure");
        m.mechanism = {mm.at("CSM").get<double>(), mm.at("TAM").get<double>(),
                       mm.at("SCM").get<double>(), mm.at("EM").get<double>()};
        const auto& p = j.at("provenance");
        m.seed = p.at("seed").get<std::uint64_t>();
        m.folds = p.at("folds").get<std::size_t>();
        m.candidate_accuracy = p.at("candidate_accuracy").get<std::map<std::string, double>>();
        m.selected_accuracy = p.at("selected_accuracy").get<double>();
        return m;
    }
};

struct LearnConfig {
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::optional<ClassifierKind> force_kind;  // skip model selection when set
};

// End-to-end model learning: instances, model selection, SFBS over every
// target size in ceil(d/2)..d keeping the best-J subset, refit, weights
// and mechanism measure.
inline TrainedModel learn(const SocialGraph& g, const Corpus& corpus,
                          const LearnConfig& cfg) {
    Dataset data = build_instances(g, corpus, cfg.seed);
    data.validate();

    TrainedModel m;
    m.seed = cfg.seed;
    m.folds = cfg.folds;

    ClassifierKind kind;
    if (cfg.force_kind) {
        kind = *cfg.force_kind;
    } else {
        auto sel = model_select(data, cfg.folds, derive_seed(cfg.seed, "model-select"));
        kind = sel.kind;
        m.candidate_accuracy = sel.accuracy;
    }

    // One floating pass down to ceil(d/2) visits every target size in
    // Algorithm 1's loop; keep the best-J subset, smaller sets breaking ties.
    const std::size_t d = data.cols;
    SfbsTrail trail;
    sfbs(kind, data, (d + 1) / 2, cfg.folds, derive_seed(cfg.seed, "sfbs"), nullptr,
         &trail);
    std::size_t best_k = d;
    double best_j = -1.0;
    for (std::size_t k = (d + 1) / 2; k <= d; ++k) {
        if (trail.best_j[k] > best_j) {
            best_j = trail.best_j[k];
            best_k = k;
        }
    }
    m.selected = detail::mask_to_indices(trail.best_set[best_k], d);
    m.selected_accuracy = best_j;

    m.classifier = Classifier::fit(kind, data.select_columns(m.selected), {},
                                   derive_seed(cfg.seed, "final-fit"));
    m.weights = m.classifier.feature_weights();
    m.mechanism = mechanism_measure(m.weights, m.selected);
    return m;
}

}  // namespace fscale
