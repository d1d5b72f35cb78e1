#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fscale/cascade.hpp"
#include "fscale/graph.hpp"
#include "fscale/learners/logistic_regression.hpp"
#include "fscale/pipeline.hpp"
#include "fscale/propagation.hpp"

namespace fscale {

// v's ego network: v, its parents and children, and all graph edges
// among those nodes, re-indexed locally.
struct EgoNetwork {
    std::vector<NodeId> nodes;                    // sorted; contains v
    std::size_t center = 0;                       // local index of v
    std::vector<std::vector<std::size_t>> out;    // local child lists (u -> follower)
    std::vector<std::vector<std::size_t>> undirected;

    std::size_t local(NodeId v) const {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
        return it != nodes.end() && *it == v ? static_cast<std::size_t>(it - nodes.begin())
                                             : nodes.size();
    }
};

inline EgoNetwork ego_network(const SocialGraph& g, NodeId v) {
    EgoNetwork ego;
    ego.nodes.push_back(v);
    for (NodeId p : g.parents(v)) ego.nodes.push_back(p);
    for (NodeId c : g.children(v)) ego.nodes.push_back(c);
    std::sort(ego.nodes.begin(), ego.nodes.end());
    ego.nodes.erase(std::unique(ego.nodes.begin(), ego.nodes.end()), ego.nodes.end());
    ego.center = ego.local(v);
    ego.out.assign(ego.nodes.size(), {});
    ego.undirected.assign(ego.nodes.size(), {});
    for (std::size_t i = 0; i < ego.nodes.size(); ++i) {
        for (NodeId c : g.children(ego.nodes[i])) {
            std::size_t j = ego.local(c);
            if (j >= ego.nodes.size()) continue;
            ego.out[i].push_back(j);
            ego.undirected[i].push_back(j);
            ego.undirected[j].push_back(i);
        }
    }
    return ego;
}

// Random walk with restart on the ego network, restarting at the center.
// Walk mass leaving through dangling nodes is dropped, so the result sums
// to at most 1. Power iteration until max change < 1e-10.
inline std::vector<double> rwr(const EgoNetwork& ego, double restart = 0.15,
                               std::size_t max_iters = 500) {
    if (!(restart > 0.0 && restart < 1.0))
        throw std::invalid_argument("restart probability must be in (0,1)");
    const std::size_t n = ego.nodes.size();
    std::vector<double> p(n, 0.0), next(n);
    p[ego.center] = 1.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        next[ego.center] = restart;
        for (std::size_t i = 0; i < n; ++i) {
            if (ego.out[i].empty() || p[i] == 0.0) continue;
            double share = (1.0 - restart) * p[i] / static_cast<double>(ego.out[i].size());
            for (std::size_t j : ego.out[i]) next[j] += share;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - p[i]));
        p.swap(next);
        if (diff < 1e-10) break;
    }
    return p;
}

inline std::vector<double> rwr(const SocialGraph& g, NodeId v, double restart = 0.15,
                               std::size_t max_iters = 500) {
    return rwr(ego_network(g, v), restart, max_iters);
}

// Active neighbors of v with their walk probabilities and time deltas.
struct EgoContext {
    NodeId v = 0;
    std::vector<std::size_t> active;      // local indices into ego.nodes
    std::vector<double> rwr_prob;         // aligned with active
    std::vector<double> time_diff;        // h_{v_i} = now - t(v_i)
    std::size_t circle_count = 0;         // components of S_v inside the ego
};

inline EgoContext ego_context(const SocialGraph& g, const CascadeState& s, NodeId v,
                              double restart = 0.15) {
    EgoNetwork ego = ego_network(g, v);
    auto probs = rwr(ego, restart);
    EgoContext ctx;
    ctx.v = v;
    for (std::size_t i = 0; i < ego.nodes.size(); ++i) {
        if (i == ego.center || !s.activated[ego.nodes[i]]) continue;
        ctx.active.push_back(i);
        ctx.rwr_prob.push_back(probs[i]);
        ctx.time_diff.push_back(s.now - s.activated_time[ego.nodes[i]]);
    }
    // circles: connected components of the active-neighbor induced subgraph
    std::unordered_map<std::size_t, std::size_t> comp;
    for (std::size_t i : ctx.active) comp[i] = i;
    auto find = [&](std::size_t a) {
        while (comp[a] != a) a = comp[a] = comp[comp[a]];
        return a;
    };
    for (std::size_t i : ctx.active)
        for (std::size_t j : ego.undirected[i])
            if (comp.count(j)) comp[find(i)] = find(j);
    std::size_t roots = 0;
    for (std::size_t i : ctx.active)
        if (find(i) == i) ++roots;
    ctx.circle_count = roots;
    return ctx;
}

// LRC-Q1: pairwise influence g = sum of walk probabilities; structure
// influence f = exp(-mu * |C(S_v)|).
inline std::pair<double, double> lrcq1_features(const EgoContext& ctx, double mu) {
    double gsum = 0.0;
    for (double p : ctx.rwr_prob) gsum += p;
    return {gsum, std::exp(-mu * static_cast<double>(ctx.circle_count))};
}

// LRC-Q2: g = sum h_i * p_i (or exp(-h_i) * p_i with decay enabled);
// f = a*log(|S_v|+1) + b*exp(-mu*|C(S_v)|).
inline std::pair<double, double> lrcq2_features(const EgoContext& ctx, double mu, double a,
                                                double b, bool decay = false) {
    double gsum = 0.0;
    for (std::size_t i = 0; i < ctx.active.size(); ++i) {
        double h = ctx.time_diff[i];
        gsum += (decay ? std::exp(-h) : h) * ctx.rwr_prob[i];
    }
    double f = a * std::log(static_cast<double>(ctx.active.size()) + 1.0) +
               b * std::exp(-mu * static_cast<double>(ctx.circle_count));
    return {gsum, f};
}

struct LrcqParams {
    int variant = 1;        // 1 or 2
    double restart = 0.15;
    double mu = 1.0;
    double a = 0.5, b = 0.5;
    bool decay = false;     // optional exp(-h) substitution in Q2's g
};

// LRC-Q hosted behind the BehaviorModel contract so FScaleADP can run it
// as the local estimation module.
class LrcqModel : public BehaviorModel {
public:
    LrcqParams params;
    LogisticRegression logreg;

    std::pair<double, double> features(const SocialGraph& g, const CascadeState& s,
                                       NodeId v) const {
        EgoContext ctx = ego_context(g, s, v, params.restart);
        return params.variant == 1 ? lrcq1_features(ctx, params.mu)
                                   : lrcq2_features(ctx, params.mu, params.a, params.b,
                                                    params.decay);
    }

    double activation_probability(const SocialGraph& g, const Corpus&,
                                  const CascadeState& s, NodeId v,
                                  const Message&) const override {
        auto [gv, fv] = features(g, s, v);
        double x[2] = {gv, fv};
        return logreg.predict_proba({x, 2});
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format"] = "fscale-model";
        j["kind"] = params.variant == 1 ? "lrcq1" : "lrcq2";
        j["params"] = {{"restart", params.restart}, {"mu", params.mu},
                       {"a", params.a},             {"b", params.b},
                       {"decay", params.decay}};
        j["logreg"] = {{"weights", logreg.weights},
                       {"bias", logreg.bias},
                       {"mean", logreg.mean},
                       {"scale", logreg.scale}};
        return j;
    }

    static LrcqModel from_json(const nlohmann::json& j) {
        LrcqModel m;
        std::string kind = j.at("kind").get<std::string>();
        if (kind != "lrcq1" && kind != "lrcq2")
            throw std::runtime_error("not an LRC-Q model file");
        m.params.variant = kind == "lrcq1" ? 1 : 2;
        const auto& p = j.at("params");
        m.params.restart = p.at("restart").get<double>();
        m.params.mu = p.at("mu").get<double>();
        m.params.a = p.at("a").get<double>();
        m.params.b = p.at("b").get<double>();
        m.params.decay = p.at("decay").get<bool>();
        const auto& lr = j.at("logreg");
        m.logreg.weights = lr.at("weights").get<std::vector<double>>();
        m.logreg.bias = lr.at("bias").get<double>();
        m.logreg.mean = lr.at("mean").get<std::vector<double>>();
        m.logreg.scale = lr.at("scale").get<std::vector<double>>();
        return m;
    }
};

// Trains logistic regression over the 2-feature (g, f) space on the same
// balanced instance set as the main pipeline.
inline LrcqModel lrcq_train(const SocialGraph& g, const Corpus& corpus,
                            const LrcqParams& params, std::uint64_t seed) {
    auto refs = build_instance_refs(g, corpus, seed);
    Dataset d;
    d.cols = 2;
    d.feature_names = {"g", "f"};
    LrcqModel m;
    m.params = params;
    for (const auto& r : refs) {
        const Cascade& c = corpus.cascades[r.cascade];
        CascadeState s =
            r.label > 0 ? observe_before(g, c, r.eval_time) : full_state(g, c);
        auto [gv, fv] = m.features(g, s, r.node);
        double row[2] = {gv, fv};
        d.add_row({row, 2}, r.label);
    }
    d.validate();
    m.logreg.fit(d, LogisticRegression::Hyper{});
    return m;
}

// Cascade-graph size predictor: least-squares fit of log(final size) on
// features of the partially observed cascade graph.
class CgCPred {
public:
    static constexpr std::size_t kDim = 8;  // intercept + 7 features
    std::array<double, kDim> beta{};

    static std::array<double, kDim> graph_features(const SocialGraph& g,
                                                   const Corpus& corpus,
                                                   const CascadeState& s) {
        if (s.cascade.events.size() < 2)
            throw std::invalid_argument("CG-CPred needs at least 2 observed events");
        const auto& ev = s.cascade.events;
        // max depth from root via activated-parent links
        std::unordered_map<NodeId, std::size_t> depth;
        std::size_t max_depth = 0;
        for (const auto& e : ev) {
            std::size_t d = 0;
            for (NodeId p : g.parents(e.node)) {
                auto it = depth.find(p);
                if (it != depth.end()) d = std::max(d, it->second + 1);
            }
            depth[e.node] = d;
            max_depth = std::max(max_depth, d);
        }
        double mean_gap = (ev.back().t - ev.front().t) / static_cast<double>(ev.size() - 1);
        std::size_t mi = corpus.message_index(s.cascade.message_id);
        const Message& m = corpus.messages[mi];
        return {1.0,
                static_cast<double>(ev.size()),
                static_cast<double>(max_depth),
                mean_gap,
                static_cast<double>(s.susceptible.size()),
                static_cast<double>(m.content_length),
                m.has_keyword ? 1.0 : 0.0,
                s.now - m.origin_time};
    }

    // Ridge-stabilized normal equations.
    void fit(const std::vector<std::array<double, kDim>>& X, const std::vector<double>& y) {
        double A[kDim][kDim] = {};
        double b[kDim] = {};
        for (std::size_t r = 0; r < X.size(); ++r) {
            for (std::size_t i = 0; i < kDim; ++i) {
                b[i] += X[r][i] * y[r];
                for (std::size_t j = 0; j < kDim; ++j) A[i][j] += X[r][i] * X[r][j];
            }
        }
        for (std::size_t i = 0; i < kDim; ++i) A[i][i] += 1e-8;
        // Gaussian elimination with partial pivoting
        for (std::size_t col = 0; col < kDim; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < kDim; ++r)
                if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
            std::swap(A[col], A[piv]);
            std::swap(b[col], b[piv]);
            for (std::size_t r = 0; r < kDim; ++r) {
                if (r == col || A[r][col] == 0.0) continue;
                double f = A[r][col] / A[col][col];
                for (std::size_t c = col; c < kDim; ++c) A[r][c] -= f * A[col][c];
                b[r] -= f * b[col];
            }
        }
        for (std::size_t i = 0; i < kDim; ++i) beta[i] = b[i] / A[i][i];
    }

    // Trains on every (cascade, observation fraction) pair in the pool.
    void train(const SocialGraph& g, const Corpus& corpus,
               const std::vector<std::size_t>& cascade_ids,
               const std::vector<double>& fractions) {
        std::vector<std::array<double, kDim>> X;
        std::vector<double> y;
        for (std::size_t ci : cascade_ids) {
            const Cascade& c = corpus.cascades[ci];
            if (c.events.size() < 2) continue;
            for (double frac : fractions) {
                std::size_t k = static_cast<std::size_t>(
                    std::ceil(frac * static_cast<double>(c.events.size())));
                if (k < 2) k = 2;
                Cascade prefix{c.message_id, {c.events.begin(), c.events.begin() + k}};
                CascadeState s = full_state(g, prefix);
                X.push_back(graph_features(g, corpus, s));
                y.push_back(std::log(static_cast<double>(c.events.size())));
            }
        }
        if (X.size() < kDim) throw std::runtime_error("too few cascades to train CG-CPred");
        fit(X, y);
    }

    double predict(const SocialGraph& g, const Corpus& corpus,
                   const CascadeState& s) const {
        auto x = graph_features(g, corpus, s);
        double z = 0.0;
        for (std::size_t i = 0; i < kDim; ++i) z += beta[i] * x[i];
        return std::round(std::exp(z));
    }
};

}  // namespace fscale
