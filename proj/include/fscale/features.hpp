#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fscale/cascade.hpp"
#include "fscale/graph.hpp"

namespace fscale {

// The four driving mechanisms of local spreading behavior.
enum class Mechanism { CSM, TAM, SCM, EM };

inline constexpr std::size_t kNumFeatures = 18;

enum FeatureIndex : std::size_t {
    // content semantic
    kKeyW = 0,
    kContLen,
    kIntDiv,
    kIntSim,
    // temporal activity
    kAvgExpT,
    kSurT,
    kAvgFordD,
    // surrounding conditions
    kSocialRe,
    kSocialReR,
    kActRecRel,
    kActRecRelR,
    kRecRel,
    kRecRelR,
    // endogenous
    kVerSta,
    kReMsg,
    kChlNode,
    kAccCreT,
    kCPNodesR,
};

inline constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "KeyW",      "ContLen",  "IntDiv",     "IntSim",  "AvgExpT", "SurT",
    "AvgFordD",  "SocialRe", "SocialReR",  "ActRecRel", "ActRecRelR", "RecRel",
    "RecRelR",   "VerSta",   "ReMsg",      "ChlNode", "AccCreT", "CPNodesR"};

inline constexpr std::array<Mechanism, kNumFeatures> kFeatureMechanism = {
    Mechanism::CSM, Mechanism::CSM, Mechanism::CSM, Mechanism::CSM,
    Mechanism::TAM, Mechanism::TAM, Mechanism::TAM,
    Mechanism::SCM, Mechanism::SCM, Mechanism::SCM, Mechanism::SCM,
    Mechanism::SCM, Mechanism::SCM,
    Mechanism::EM,  Mechanism::EM,  Mechanism::EM,  Mechanism::EM,
    Mechanism::EM};

inline constexpr std::array<const char*, 4> kMechanismNames = {"CSM", "TAM", "SCM", "EM"};

using FeatureVector = std::array<double, kNumFeatures>;

// IntDiv: Shannon entropy of the interest distribution, in nats.
inline double interest_diversity(std::span<const double> p) {
    double h = 0.0;
    for (double x : p) {
        if (x < 0.0) throw std::domain_error("negative probability entry");
        if (x > 0.0) h -= x * std::log(x);
    }
    return h;
}

// IntSim: symmetric Kullback-Leibler divergence (D(p||q)+D(q||p))/2.
// Both vectors are epsilon-smoothed and renormalized so zero support
// cannot blow up the logarithms.
inline double interest_similarity(std::span<const double> p, std::span<const double> q,
                                  double eps = 1e-9) {
    if (p.size() != q.size()) throw std::domain_error("topic vector length mismatch");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i] + eps;
        sq += q[i] + eps;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double a = (p[i] + eps) / sp;
        double b = (q[i] + eps) / sq;
        kl += a * std::log(a / b) + b * std::log(b / a);
    }
    return kl / 2.0;
}

struct TemporalFeatures {
    double avg_exposure_time = 0.0;  // mean over AP_v of now - t(parent)
    double survival_time = 0.0;      // now - message origin
    double avg_forward_delay = 0.0;  // mean gap between successive observed events
};

inline TemporalFeatures temporal_features(const SocialGraph& g, const CascadeState& s,
                                          NodeId v, const Message& m) {
    TemporalFeatures f;
    double sum = 0.0;
    std::size_t n_ap = 0;
    for (NodeId p : g.parents(v)) {
        if (!s.activated[p]) continue;
        sum += s.now - s.activated_time[p];
        ++n_ap;
    }
    f.avg_exposure_time = n_ap ? sum / static_cast<double>(n_ap) : 0.0;
    f.survival_time = s.now - m.origin_time;
    const auto& ev = s.cascade.events;
    if (ev.size() >= 2)
        f.avg_forward_delay = (ev.back().t - ev.front().t) / static_cast<double>(ev.size() - 1);
    return f;
}

// The six surrounding-condition values, canonical order
// (SocialRe, SocialReR, ActRecRel, ActRecRelR, RecRel, RecRelR).
// Every ratio with a zero denominator is 0.
inline std::array<double, 6> structural_features(const SocialGraph& g,
                                                 const CascadeState& s, NodeId v) {
    const auto& parents = g.parents(v);
    auto friends = g.friends(v);
    double n_parents = static_cast<double>(parents.size());
    double social_re = 0.0;
    for (NodeId p : parents)
        if (s.activated[p]) social_re += 1.0;
    double act_rec_rel = 0.0;
    for (NodeId fr : friends)
        if (s.activated[fr]) act_rec_rel += 1.0;
    double rec_rel = static_cast<double>(friends.size());
    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    return {social_re,
            ratio(social_re, n_parents),
            act_rec_rel,
            ratio(act_rec_rel, social_re),
            rec_rel,
            ratio(rec_rel, n_parents)};
}

// Full 18-feature vector for an (inactivated user, candidate message)
// instance at s.now. Pure in all arguments.
inline FeatureVector extract(const SocialGraph& g, const Corpus& corpus,
                             const CascadeState& s, NodeId v, const Message& m) {
    FeatureVector x{};
    const UserProfile& prof = corpus.profile(v);

    x[kKeyW] = m.has_keyword ? 1.0 : 0.0;
    x[kContLen] = static_cast<double>(m.content_length);
    if (!prof.cold) {
        x[kIntDiv] = interest_diversity(prof.interest);
        x[kIntSim] = interest_similarity(prof.interest, m.topic);
    }

    TemporalFeatures tf = temporal_features(g, s, v, m);
    x[kAvgExpT] = tf.avg_exposure_time;
    x[kSurT] = tf.survival_time;
    x[kAvgFordD] = tf.avg_forward_delay;

    auto scm = structural_features(g, s, v);
    for (std::size_t i = 0; i < 6; ++i) x[kSocialRe + i] = scm[i];

    x[kVerSta] = prof.verified ? 1.0 : 0.0;
    // ReMsg counts candidate messages at s.now: historic exposures from the
    // corpus (excluding this message) plus the live exposure to m itself.
    std::size_t mi = corpus.message_index(m.message_id);
    std::size_t remsg = corpus.candidate_count(v, s.now, mi);
    if (x[kSocialRe] > 0.0) remsg += 1;
    x[kReMsg] = static_cast<double>(remsg);
    x[kChlNode] = static_cast<double>(g.children(v).size());
    x[kAccCreT] = s.now - prof.account_created;  // account age
    double n_parents = static_cast<double>(g.parents(v).size());
    x[kCPNodesR] = n_parents > 0.0 ? x[kChlNode] / n_parents : 0.0;
    return x;
}

}  // namespace fscale
