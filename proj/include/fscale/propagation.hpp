#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "fscale/cascade.hpp"
#include "fscale/features.hpp"
#include "fscale/graph.hpp"
#include "fscale/pipeline.hpp"
#include "fscale/rng.hpp"

namespace fscale {

// Local spreading-behavior estimator hosted by the propagation engine.
// Implementations must be pure functions of the pre-step state.
class BehaviorModel {
public:
    virtual ~BehaviorModel() = default;
    virtual double activation_probability(const SocialGraph& g, const Corpus& corpus,
                                          const CascadeState& s, NodeId v,
                                          const Message& m) const = 0;
};

class LearnedBehaviorModel : public BehaviorModel {
public:
    explicit LearnedBehaviorModel(TrainedModel model) : model_(std::move(model)) {}

    double activation_probability(const SocialGraph& g, const Corpus& corpus,
                                  const CascadeState& s, NodeId v,
                                  const Message& m) const override {
        FeatureVector x = extract(g, corpus, s, v, m);
        return model_.classifier.predict_proba(model_.project(x));
    }

    const TrainedModel& model() const { return model_; }

private:
    TrainedModel model_;
};

// Deterministic |AP| >= theta rule; test and generator companion.
class ThresholdRule : public BehaviorModel {
public:
    explicit ThresholdRule(std::size_t theta) : theta_(theta) {}

    double activation_probability(const SocialGraph& g, const Corpus&,
                                  const CascadeState& s, NodeId v,
                                  const Message&) const override {
        std::size_t n = 0;
        for (NodeId p : g.parents(v))
            if (s.activated[p]) ++n;
        return n >= theta_ ? 1.0 : 0.0;
    }

private:
    std::size_t theta_;
};

struct SimConfig {
    double delta_T = 300.0;       // shell time increment (seconds)
    double horizon_T = 432000.0;  // prediction period (seconds), 5 days
    std::uint64_t seed = 0;
    enum class Mode { deterministic, bernoulli } mode = Mode::deterministic;
    std::size_t patience = 3;     // quiescent steps before convergence

    void validate() const {
        if (!(delta_T > 0.0)) throw std::invalid_argument("delta_T must be positive");
        if (horizon_T < 0.0) throw std::invalid_argument("horizon must be non-negative");
        if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    }
};

// Susceptible frontier split into independent singletons and correlated
// connected components of the susceptible-induced subgraph (directed
// dependencies treated as undirected).
struct ShellPartition {
    std::vector<NodeId> independent;
    std::vector<std::vector<NodeId>> correlated;  // each size >= 2, sorted
};

inline ShellPartition partition_susceptible(const SocialGraph& g, const CascadeState& s) {
    const auto& susc = s.susceptible;
    std::vector<std::size_t> parent_uf(susc.size());
    for (std::size_t i = 0; i < susc.size(); ++i) parent_uf[i] = i;
    auto find = [&](std::size_t a) {
        while (parent_uf[a] != a) {
            parent_uf[a] = parent_uf[parent_uf[a]];
            a = parent_uf[a];
        }
        return a;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent_uf[find(a)] = find(b); };

    auto local = [&](NodeId v) -> std::size_t {
        auto it = std::lower_bound(susc.begin(), susc.end(), v);
        if (it == susc.end() || *it != v) return susc.size();
        return static_cast<std::size_t>(it - susc.begin());
    };
    for (std::size_t i = 0; i < susc.size(); ++i)
        for (NodeId c : g.children(susc[i])) {
            std::size_t j = local(c);
            if (j < susc.size()) unite(i, j);
        }

    std::vector<std::vector<NodeId>> comps(susc.size());
    for (std::size_t i = 0; i < susc.size(); ++i) comps[find(i)].push_back(susc[i]);
    ShellPartition p;
    for (auto& comp : comps) {
        if (comp.empty()) continue;
        if (comp.size() == 1) p.independent.push_back(comp[0]);
        else p.correlated.push_back(std::move(comp));
    }
    std::sort(p.independent.begin(), p.independent.end());
    std::sort(p.correlated.begin(), p.correlated.end());
    return p;
}

// Uniform choice of one representative per correlated set; tests inject a
// scripted picker to pin the walkthrough fixtures.
struct Picker {
    virtual ~Picker() = default;
    virtual std::size_t pick(std::size_t n) = 0;  // index in [0, n)
};

struct RngPicker : Picker {
    explicit RngPicker(Rng& rng) : rng(rng) {}
    std::size_t pick(std::size_t n) override { return rng() % n; }
    Rng& rng;
};

// IN = all independent nodes plus one uniformly chosen node per
// correlated set, returned sorted.
inline std::vector<NodeId> select_update_set(const ShellPartition& p, Picker& picker) {
    std::vector<NodeId> in = p.independent;
    for (const auto& comp : p.correlated) in.push_back(comp[picker.pick(comp.size())]);
    std::sort(in.begin(), in.end());
    return in;
}

struct StepResult {
    std::vector<CascadeEvent> activations;  // ascending NodeId, equal timestamps
    double delta_t = 0.0;
    std::size_t shell_size = 0;       // |N| before the step
    std::size_t update_set_size = 0;  // |IN|
    std::vector<NodeId> evaluated;    // = IN
};

// One asynchronous update: classify every IN member against the frozen
// pre-step state, then apply activations atomically and advance time by
// delta_t = |IN|/|N| * delta_T (|N| taken before the update).
inline StepResult step(const SocialGraph& g, const Corpus& corpus, CascadeState& s,
                       const BehaviorModel& model, const SimConfig& cfg, Picker& picker,
                       Rng& rng) {
    if (s.susceptible.empty()) throw std::logic_error("step on empty susceptible set");
    StepResult res;
    res.shell_size = s.susceptible.size();

    ShellPartition part = partition_susceptible(g, s);
    std::vector<NodeId> in = select_update_set(part, picker);
    res.update_set_size = in.size();
    res.evaluated = in;
    res.delta_t = static_cast<double>(in.size()) /
                  static_cast<double>(res.shell_size) * cfg.delta_T;

    std::size_t mi = corpus.message_index(s.cascade.message_id);
    const Message& m = mi == Corpus::npos ? throw std::runtime_error(
                                                "message '" + s.cascade.message_id +
                                                "' not in corpus")
                                          : corpus.messages[mi];

    std::vector<NodeId> to_activate;
    for (NodeId v : in) {
        double p = model.activation_probability(g, corpus, s, v, m);
        bool act = cfg.mode == SimConfig::Mode::deterministic
                       ? p > 0.5
                       : std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
        if (act) to_activate.push_back(v);
    }

    double t_new = s.now + res.delta_t;
    s.now = t_new;
    for (NodeId v : to_activate) {
        s.cascade.events.push_back({v, t_new});
        s.activated[v] = 1;
        s.activated_time[v] = t_new;
        res.activations.push_back({v, t_new});
    }
    if (!to_activate.empty()) {
        // incremental susceptible update: remove activated, add exposed
        std::vector<NodeId> next;
        next.reserve(s.susceptible.size());
        std::set_difference(s.susceptible.begin(), s.susceptible.end(),
                            to_activate.begin(), to_activate.end(),
                            std::back_inserter(next));
        for (NodeId v : to_activate)
            for (NodeId c : g.children(v))
                if (!s.activated[c]) next.push_back(c);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        s.susceptible = std::move(next);
    }
    return res;
}

struct StepTrace {
    std::size_t index;
    std::size_t shell_size;
    std::size_t update_set_size;
    double delta_t;
    std::size_t activation_count;
    double t_after;
};

struct RunResult {
    Cascade predicted;                // observed prefix + simulated growth
    CascadeState final_state;
    std::vector<StepTrace> trace;
    std::vector<NodeId> ever_susceptible;  // sorted union over the run
};

// FScaleADP main loop: step until the horizon is exhausted, the frontier
// empties, or the process is quiescent (no activation for `patience`
// consecutive steps with every susceptible node re-evaluated since the
// last activation).
inline RunResult run(const SocialGraph& g, const Corpus& corpus, CascadeState state,
                     const BehaviorModel& model, const SimConfig& cfg) {
    cfg.validate();
    RunResult out;
    Rng rng(derive_seed(cfg.seed, "propagation"));
    RngPicker picker(rng);

    const double t_end = state.now + cfg.horizon_T;
    std::unordered_set<NodeId> ever(state.susceptible.begin(), state.susceptible.end());
    std::unordered_set<NodeId> evaluated;
    std::size_t quiet = 0;
    std::size_t step_idx = 0;

    while (state.now < t_end && !state.susceptible.empty()) {
        StepResult sr = step(g, corpus, state, model, cfg, picker, rng);
        ++step_idx;
        out.trace.push_back({step_idx, sr.shell_size, sr.update_set_size, sr.delta_t,
                             sr.activations.size(), state.now});
        for (NodeId v : state.susceptible) ever.insert(v);
        if (sr.activations.empty()) {
            ++quiet;
            for (NodeId v : sr.evaluated) evaluated.insert(v);
            bool covered = std::all_of(state.susceptible.begin(), state.susceptible.end(),
                                       [&](NodeId v) { return evaluated.count(v) != 0; });
            if (quiet >= cfg.patience && covered) break;
        } else {
            quiet = 0;
            evaluated.clear();
        }
    }

    out.predicted = state.cascade;
    out.ever_susceptible.assign(ever.begin(), ever.end());
    std::sort(out.ever_susceptible.begin(), out.ever_susceptible.end());
    out.final_state = std::move(state);
    return out;
}

// BFS closure of the |AP| >= theta rule; independent oracle for the
// deterministic engine path.
inline std::vector<char> threshold_closure(const SocialGraph& g,
                                           const std::vector<char>& seed_activated,
                                           std::size_t theta) {
    std::vector<char> act = seed_activated;
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId v = 0; v < act.size(); ++v) {
            if (act[v]) continue;
            std::size_t n = 0;
            for (NodeId p : g.parents(v))
                if (act[p]) ++n;
            if (n >= theta) {
                act[v] = 1;
                changed = true;
            }
        }
    }
    return act;
}

}  // namespace fscale
