#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "fscale/baselines.hpp"
#include "fscale/cascade.hpp"
#include "fscale/graph.hpp"
#include "fscale/propagation.hpp"

namespace fscale {

struct ClassificationMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
    bool degenerate = false;  // some denominator was empty and reported as 0
};

inline ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                                    const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("label vectors differ in length");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_pred[i] == 1)
            (y_true[i] == 1 ? tp : fp)++;
        else
            (y_true[i] == 1 ? fn : tn)++;
    }
    ClassificationMetrics m;
    if (tp + fp) m.precision = double(tp) / double(tp + fp);
    else m.degenerate = true;
    if (tp + fn) m.recall = double(tp) / double(tp + fn);
    else m.degenerate = true;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else m.degenerate = true;
    if (!y_true.empty())
        m.accuracy = double(tp + tn) / double(y_true.size());
    return m;
}

// Node-level accuracy over the evaluation universe: union of truth
// activations, predicted activations, and every node ever susceptible in
// either run. Counting all |V| nodes would inflate accuracy with
// trivially inactive nodes.
inline double contagion_accuracy(const SocialGraph& g, const Cascade& truth,
                                 const Cascade& predicted,
                                 const std::vector<NodeId>& pred_ever_susceptible,
                                 double at_time = kInf) {
    std::unordered_set<NodeId> truth_act, pred_act, universe;
    for (const auto& e : truth.events)
        if (e.t < at_time) truth_act.insert(e.node);
    for (const auto& e : predicted.events)
        if (e.t < at_time) pred_act.insert(e.node);
    universe.insert(truth_act.begin(), truth_act.end());
    universe.insert(pred_act.begin(), pred_act.end());
    for (const auto& e : truth.events)
        for (NodeId c : g.children(e.node)) universe.insert(c);
    universe.insert(pred_ever_susceptible.begin(), pred_ever_susceptible.end());
    if (universe.empty()) return 1.0;
    std::size_t agree = 0;
    for (NodeId v : universe)
        if (truth_act.count(v) == pred_act.count(v)) ++agree;
    return double(agree) / double(universe.size());
}

// Believable activated nodes: ground-truth prefix by activation order.
inline CascadeState observe_fraction(const SocialGraph& g, const Cascade& c,
                                     double fraction) {
    std::size_t k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(c.events.size())));
    k = std::clamp<std::size_t>(k, 1, c.events.size());
    Cascade prefix{c.message_id, {c.events.begin(), c.events.begin() + k}};
    return full_state(g, prefix);
}

struct ExperimentRow {
    std::string experiment;
    std::string method;
    std::size_t group = 0;   // minimum cascade size of the group
    double fraction = 0.0;   // observed fraction (or checkpoint seconds)
    std::string metric;
    double value = 0.0;
};

struct ExperimentConfig {
    std::vector<double> fractions = {0.05, 0.10, 0.15, 0.20};
    std::vector<std::size_t> size_groups = {200, 400, 600};
    std::size_t cascades_per_group = 30;
    double horizon = 432000.0;  // 5 days
    double delta_T = 300.0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    double process_duration_cap = 172800.0;  // "popular for only 2 days" filter
    std::vector<double> checkpoints;         // offsets from observation time
};

using NamedModel = std::pair<std::string, const BehaviorModel*>;

namespace detail {

// Seeded sample of up to `count` cascades with final size >= min_size.
inline std::vector<std::size_t> sample_group(const Corpus& corpus, std::size_t min_size,
                                             std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < corpus.cascades.size(); ++i)
        if (corpus.cascades[i].events.size() >= min_size) ids.push_back(i);
    Rng rng(derive_seed(seed, "group-sample"));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
    if (ids.size() > count) ids.resize(count);
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Runs fn(i) for i in [0, n) across cfg.threads workers; results must be
// written into pre-sized slots so the thread count never changes output.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t nw = std::min(threads, n);
    for (std::size_t w = 0; w < nw; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += nw) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Contagion-states protocol: seed the engine with an early ground-truth
// prefix, run to the horizon, score node-level accuracy, average per
// (group, fraction, method).
inline std::vector<ExperimentRow> contagion_states_experiment(
    const SocialGraph& g, const Corpus& corpus, const std::vector<NamedModel>& models,
    const ExperimentConfig& cfg) {
    std::vector<ExperimentRow> rows;
    for (std::size_t group : cfg.size_groups) {
        auto ids = detail::sample_group(corpus, group, cfg.cascades_per_group,
                                        derive_seed(cfg.seed, group));
        if (ids.empty()) {
            rows.push_back({"states", "-", group, 0.0, "empty_group", 1.0});
            continue;
        }
        for (const auto& [name, model] : models) {
            for (double frac : cfg.fractions) {
                std::vector<double> acc(ids.size());
                detail::parallel_for(ids.size(), cfg.threads, [&](std::size_t i) {
                    const Cascade& truth = corpus.cascades[ids[i]];
                    CascadeState obs = observe_fraction(g, truth, frac);
                    SimConfig sim;
                    sim.delta_T = cfg.delta_T;
                    sim.horizon_T = cfg.horizon;
                    sim.seed = derive_seed(cfg.seed, ids[i]);
                    RunResult r = run(g, corpus, std::move(obs), *model, sim);
                    acc[i] = contagion_accuracy(g, truth, r.predicted,
                                                r.ever_susceptible);
                });
                double mean = 0.0;
                for (double a : acc) mean += a;
                mean /= static_cast<double>(acc.size());
                rows.push_back({"states", name, group, frac, "accuracy", mean});
            }
        }
    }
    return rows;
}

// Process-prediction protocol: 10% observed, accuracy of the temporal
// contagion state at each checkpoint after the observation boundary.
inline std::vector<ExperimentRow> process_prediction_experiment(
    const SocialGraph& g, const Corpus& corpus, const std::vector<NamedModel>& models,
    const ExperimentConfig& cfg, double fraction = 0.10) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < corpus.cascades.size(); ++i) {
        const Cascade& c = corpus.cascades[i];
        if (c.events.size() < 2) continue;
        if (c.last_time() - c.first_time() <= cfg.process_duration_cap) ids.push_back(i);
    }
    {
        Rng rng(derive_seed(cfg.seed, "process-sample"));
        for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
        if (ids.size() > cfg.cascades_per_group) ids.resize(cfg.cascades_per_group);
        std::sort(ids.begin(), ids.end());
    }
    std::vector<double> checkpoints = cfg.checkpoints;
    if (checkpoints.empty())
        for (int i = 1; i <= 8; ++i) checkpoints.push_back(cfg.horizon * i / 8.0);

    std::vector<ExperimentRow> rows;
    if (ids.empty()) {
        rows.push_back({"process", "-", 0, 0.0, "empty_group", 1.0});
        return rows;
    }
    for (const auto& [name, model] : models) {
        std::vector<std::vector<double>> acc(ids.size(),
                                             std::vector<double>(checkpoints.size()));
        detail::parallel_for(ids.size(), cfg.threads, [&](std::size_t i) {
            const Cascade& truth = corpus.cascades[ids[i]];
            CascadeState obs = observe_fraction(g, truth, fraction);
            double t_obs = obs.now;
            SimConfig sim;
            sim.delta_T = cfg.delta_T;
            sim.horizon_T = cfg.horizon;
            sim.seed = derive_seed(cfg.seed, ids[i]);
            RunResult r = run(g, corpus, std::move(obs), *model, sim);
            for (std::size_t k = 0; k < checkpoints.size(); ++k)
                acc[i][k] = contagion_accuracy(g, truth, r.predicted, r.ever_susceptible,
                                               t_obs + checkpoints[k]);
        });
        for (std::size_t k = 0; k < checkpoints.size(); ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < ids.size(); ++i) mean += acc[i][k];
            mean /= static_cast<double>(ids.size());
            rows.push_back({"process", name, 0, checkpoints[k], "accuracy", mean});
        }
    }
    return rows;
}

// 0.2-Precision predicate: a size prediction is correct iff
// |predicted - true| <= 0.2 * true (boundary counts as correct).
inline bool size_within_tolerance(double predicted, double truth, double tol = 0.2) {
    return std::abs(predicted - truth) <= tol * truth;
}

// Size-prediction protocol with the 0.2-Precision metric: a prediction is
// correct iff |predicted - true| <= 0.2 * true. Propagation-hosted models
// predict via the simulated final size; CG-CPred regresses it from the
// observed cascade graph.
inline std::vector<ExperimentRow> size_prediction_experiment(
    const SocialGraph& g, const Corpus& corpus, const std::vector<NamedModel>& models,
    const ExperimentConfig& cfg) {
    std::vector<ExperimentRow> rows;
    for (std::size_t group : cfg.size_groups) {
        auto ids = detail::sample_group(corpus, group, cfg.cascades_per_group,
                                        derive_seed(cfg.seed, group));
        if (ids.empty()) {
            rows.push_back({"size", "-", group, 0.0, "empty_group", 1.0});
            continue;
        }
        // CG-CPred trains on cascades outside the evaluation sample
        CgCPred cg;
        bool cg_ok = true;
        {
            std::unordered_set<std::size_t> eval_set(ids.begin(), ids.end());
            std::vector<std::size_t> train_ids;
            for (std::size_t i = 0; i < corpus.cascades.size(); ++i)
                if (!eval_set.count(i)) train_ids.push_back(i);
            try {
                cg.train(g, corpus, train_ids, cfg.fractions);
            } catch (const std::exception&) {
                cg_ok = false;
            }
        }
        for (double frac : cfg.fractions) {
            for (const auto& [name, model] : models) {
                std::vector<char> correct(ids.size(), 0);
                detail::parallel_for(ids.size(), cfg.threads, [&](std::size_t i) {
                    const Cascade& truth = corpus.cascades[ids[i]];
                    CascadeState obs = observe_fraction(g, truth, frac);
                    SimConfig sim;
                    sim.delta_T = cfg.delta_T;
                    sim.horizon_T = cfg.horizon;
                    sim.seed = derive_seed(cfg.seed, ids[i]);
                    RunResult r = run(g, corpus, std::move(obs), *model, sim);
                    double pred = static_cast<double>(r.predicted.events.size());
                    double truth_size = static_cast<double>(truth.events.size());
                    correct[i] = size_within_tolerance(pred, truth_size) ? 1 : 0;
                });
                double prec = 0.0;
                for (char c : correct) prec += c;
                prec /= static_cast<double>(ids.size());
                rows.push_back({"size", name, group, frac, "p02", prec});
            }
            if (cg_ok) {
                std::vector<char> correct(ids.size(), 0);
                detail::parallel_for(ids.size(), cfg.threads, [&](std::size_t i) {
                    const Cascade& truth = corpus.cascades[ids[i]];
                    CascadeState obs = observe_fraction(g, truth, frac);
                    if (obs.cascade.events.size() < 2) return;
                    double pred = cg.predict(g, corpus, obs);
                    double truth_size = static_cast<double>(truth.events.size());
                    correct[i] = size_within_tolerance(pred, truth_size) ? 1 : 0;
                });
                double prec = 0.0;
                for (char c : correct) prec += c;
                prec /= static_cast<double>(ids.size());
                rows.push_back({"size", "cgcpred", group, frac, "p02", prec});
            }
        }
    }
    return rows;
}

inline std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = "experiment,method,group,fraction,metric,value\n";
    for (const auto& r : rows) {
        out += r.experiment + ',' + r.method + ',' + std::to_string(r.group) + ',' +
               std::to_string(r.fraction) + ',' + r.metric + ',' +
               std::to_string(r.value) + '\n';
    }
    return out;
}

}  // namespace fscale
