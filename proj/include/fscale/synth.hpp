#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fscale/cascade.hpp"
#include "fscale/features.hpp"
#include "fscale/graph.hpp"
#include "fscale/rng.hpp"

namespace fscale {

// Directed preferential-attachment follower graph; each new follow edge
// is reciprocated with the given probability, which creates friends.
inline SocialGraph gen_network(std::size_t n, std::size_t m_per_node, double reciprocity,
                               std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("need at least 2 nodes");
    if (m_per_node < 1) throw std::invalid_argument("m_per_node must be >= 1");
    if (reciprocity < 0.0 || reciprocity > 1.0)
        throw std::invalid_argument("reciprocity must be in [0,1]");
    SocialGraph g;
    for (std::size_t i = 0; i < n; ++i) g.intern("u" + std::to_string(i));
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // targets weighted by degree + 1 via a repeated-node urn
    std::vector<NodeId> urn;
    std::size_t m0 = std::min(n, m_per_node + 1);
    for (NodeId i = 0; i < m0; ++i) {
        for (NodeId j = 0; j < m0; ++j) {
            if (i == j) continue;
            g.add_edge(i, j);
            urn.push_back(j);
            if (unif(rng) < reciprocity) {
                g.add_edge(j, i);
                urn.push_back(i);
            }
        }
    }
    for (NodeId v = static_cast<NodeId>(m0); v < n; ++v) {
        std::vector<NodeId> targets;
        std::size_t attempts = 0;
        while (targets.size() < std::min<std::size_t>(m_per_node, v) && attempts < 50 * m_per_node) {
            ++attempts;
            NodeId t = urn.empty() ? static_cast<NodeId>(rng() % v)
                                   : urn[rng() % urn.size()];
            if (t == v || std::find(targets.begin(), targets.end(), t) != targets.end())
                continue;
            targets.push_back(t);
        }
        for (NodeId t : targets) {
            g.add_edge(v, t);
            urn.push_back(t);
            urn.push_back(v);
            if (unif(rng) < reciprocity) {
                g.add_edge(t, v);
                urn.push_back(v);
                urn.push_back(t);
            }
        }
    }
    g.finalize();
    return g;
}

// The data-generating rule behind synthetic cascades: either a logistic
// model over the 18-feature space or a deterministic |AP| >= theta rule.
struct PlantedRule {
    enum class Kind { logistic, threshold } kind = Kind::logistic;
    std::size_t theta = 2;
    FeatureVector weights{};
    double bias = 0.0;

    // Default logistic rule puts its mass on temporal and surrounding
    // features so the learned mechanism measure skews toward TAM.
    static PlantedRule default_logistic() {
        PlantedRule r;
        r.kind = Kind::logistic;
        r.weights[kSurT] = -2.0e-3;      // novelty decays over ~ hour scale
        r.weights[kAvgExpT] = -1.5e-3;
        r.weights[kSocialReR] = 4.0;
        r.bias = 0.8;
        return r;
    }

    double probability(const SocialGraph& g, const Corpus& corpus, const CascadeState& s,
                       NodeId v, const Message& m) const {
        if (kind == Kind::threshold) {
            std::size_t n = 0;
            for (NodeId p : g.parents(v))
                if (s.activated[p]) ++n;
            return n >= theta ? 1.0 : 0.0;
        }
        FeatureVector x = extract(g, corpus, s, v, m);
        double z = bias;
        for (std::size_t i = 0; i < kNumFeatures; ++i) z += weights[i] * x[i];
        return 1.0 / (1.0 + std::exp(-z));
    }
};

struct CorpusGenConfig {
    std::size_t n_messages = 100;
    std::size_t n_topics = 5;
    double delay_mean = 600.0;     // exponential inter-activation delay (s)
    std::size_t max_rounds = 60;
    double keyword_prob = 0.3;
    double verified_prob = 0.1;
};

inline std::vector<double> dirichlet(std::size_t k, double alpha, Rng& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> v(k);
    double sum = 0.0;
    for (double& x : v) sum += (x = gamma(rng));
    for (double& x : v) x /= sum;
    return v;
}

// Generates messages, profiles and ground-truth cascades by running the
// planted rule in synchronous rounds with exponential delays. Cascades
// are generated sequentially so each one sees the exposure history of the
// previous ones through the corpus index.
inline Corpus gen_corpus(const SocialGraph& g, const CorpusGenConfig& cfg,
                         const PlantedRule& rule, std::uint64_t seed) {
    Corpus corpus;
    Rng init_rng(derive_seed(seed, "profiles"));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    corpus.profiles.resize(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        auto& p = corpus.profiles[v];
        p.node = v;
        p.verified = unif(init_rng) < cfg.verified_prob;
        p.account_created = -unif(init_rng) * 3.0e7;  // up to ~1 year before t=0
        // planted interest used while generating; rebuild() replaces it
        // with the empirical history mean afterwards
        p.interest = dirichlet(cfg.n_topics, 0.5, init_rng);
        p.cold = false;
    }

    Rng msg_rng(derive_seed(seed, "messages"));
    std::lognormal_distribution<double> lend(4.0, 0.8);
    for (std::size_t mi = 0; mi < cfg.n_messages; ++mi) {
        Message m;
        m.message_id = "m" + std::to_string(mi);
        m.content_length = static_cast<std::uint64_t>(std::lround(lend(msg_rng))) + 1;
        m.has_keyword = unif(msg_rng) < cfg.keyword_prob;
        m.topic = dirichlet(cfg.n_topics, 0.5, msg_rng);
        m.origin_time = 0.0;
        corpus.add_message(std::move(m));
    }

    for (std::size_t mi = 0; mi < cfg.n_messages; ++mi) {
        Rng rng(derive_seed(seed, 1000 + mi));
        std::exponential_distribution<double> delay(1.0 / cfg.delay_mean);
        NodeId root = static_cast<NodeId>(rng() % g.node_count());

        Cascade c;
        c.message_id = corpus.messages[mi].message_id;
        c.events.push_back({root, 0.0});
        CascadeState s;
        s.cascade = c;
        s.activated.assign(g.node_count(), 0);
        s.activated_time.assign(g.node_count(), kInf);
        s.activated[root] = 1;
        s.activated_time[root] = 0.0;
        s.susceptible = compute_susceptible(g, s.activated);
        s.now = 0.0;

        for (std::size_t round = 0; round < cfg.max_rounds && !s.susceptible.empty();
             ++round) {
            std::vector<CascadeEvent> fresh;
            for (NodeId v : s.susceptible) {
                double p = rule.probability(g, corpus, s, v, corpus.messages[mi]);
                bool act = rule.kind == PlantedRule::Kind::threshold
                               ? p > 0.5
                               : unif(rng) < p;
                if (act) fresh.push_back({v, s.now + delay(rng)});
            }
            if (fresh.empty()) break;
            std::sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) {
                return a.t != b.t ? a.t < b.t : a.node < b.node;
            });
            for (const auto& e : fresh) {
                s.cascade.events.push_back(e);
                s.activated[e.node] = 1;
                s.activated_time[e.node] = e.t;
            }
            s.now = fresh.back().t;  // rounds never interleave in time
            s.susceptible = compute_susceptible(g, s.activated);
        }
        corpus.set_cascade(mi, s.cascade, g);
    }
    corpus.compute_interest();
    return corpus;
}

}  // namespace fscale
