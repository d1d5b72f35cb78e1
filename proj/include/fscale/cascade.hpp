#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fscale/graph.hpp"

namespace fscale {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CascadeEvent {
    NodeId node;
    double t;  // seconds
};

// Activation sequence for one message: events sorted by time, each node
// at most once (activated nodes cannot be re-activated or inactivated).
struct Cascade {
    std::string message_id;
    std::vector<CascadeEvent> events;

    double first_time() const { return events.empty() ? kInf : events.front().t; }
    double last_time() const { return events.empty() ? -kInf : events.back().t; }
};

struct Message {
    std::string message_id;
    std::uint64_t content_length = 0;    // ContLen_m, opaque content units
    bool has_keyword = false;            // KeyW_m
    std::vector<double> topic;           // T_m, probability vector over K topics
    double origin_time = 0.0;
};

struct UserProfile {
    NodeId node = 0;
    bool verified = false;               // VerSta_u
    double account_created = 0.0;        // AccCreT_u (absolute time)
    std::vector<double> interest;        // I_u, empty when cold
    bool cold = true;                    // no history messages
};

// Live state of one cascade at time `now`. susceptible is always the set
// of inactivated children of activated nodes.
struct CascadeState {
    Cascade cascade;
    std::vector<char> activated;          // |V| flags
    std::vector<double> activated_time;   // kInf when inactive
    std::vector<NodeId> susceptible;      // sorted
    double now = 0.0;

    bool is_activated(NodeId v) const { return activated[v] != 0; }
};

inline std::vector<NodeId> compute_susceptible(const SocialGraph& g,
                                               const std::vector<char>& activated) {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < activated.size(); ++v) {
        if (!activated[v]) continue;
        for (NodeId c : g.children(v))
            if (!activated[c]) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Partially observed cascade C_m(t) = { v | t(v) < t } (strict cut).
inline CascadeState observe_before(const SocialGraph& g, const Cascade& c, double t) {
    CascadeState s;
    s.cascade.message_id = c.message_id;
    s.activated.assign(g.node_count(), 0);
    s.activated_time.assign(g.node_count(), kInf);
    s.now = t;
    for (const auto& e : c.events) {
        if (!(e.t < t)) break;
        s.cascade.events.push_back(e);
        s.activated[e.node] = 1;
        s.activated_time[e.node] = e.t;
    }
    s.susceptible = compute_susceptible(g, s.activated);
    return s;
}

// Full cascade as a state with now = last event time.
inline CascadeState full_state(const SocialGraph& g, const Cascade& c) {
    CascadeState s;
    s.cascade = c;
    s.activated.assign(g.node_count(), 0);
    s.activated_time.assign(g.node_count(), kInf);
    s.now = c.events.empty() ? 0.0 : c.events.back().t;
    for (const auto& e : c.events) {
        s.activated[e.node] = 1;
        s.activated_time[e.node] = e.t;
    }
    s.susceptible = compute_susceptible(g, s.activated);
    return s;
}

// Activated parent set AP_v with activation times, sorted by time then id.
inline std::vector<std::pair<NodeId, double>> activated_parents(const SocialGraph& g,
                                                                const CascadeState& s,
                                                                NodeId v) {
    std::vector<std::pair<NodeId, double>> out;
    for (NodeId p : g.parents(v))
        if (s.activated[p]) out.emplace_back(p, s.activated_time[p]);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    return out;
}

// Per-node exposure record for one message: when the node first had an
// activated parent and when (if ever) it activated itself.
struct Exposure {
    std::size_t message;          // index into Corpus::cascades / messages
    double first_parent_time;     // kInf if never exposed
    double own_time;              // kInf if never activated
};

class Corpus {
public:
    std::vector<Cascade> cascades;
    std::vector<Message> messages;            // aligned with cascades
    std::vector<UserProfile> profiles;        // indexed by NodeId

    std::size_t message_index(const std::string& id) const {
        auto it = msg_index_.find(id);
        return it == msg_index_.end() ? npos : it->second;
    }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    const std::vector<Exposure>& exposures(NodeId v) const {
        static const std::vector<Exposure> kEmpty;
        return v < exposure_.size() ? exposure_[v] : kEmpty;
    }

    const UserProfile& profile(NodeId v) const {
        if (v >= profiles.size() || profiles[v].node != v)
            throw std::runtime_error("missing profile for node " + std::to_string(v));
        return profiles[v];
    }

    void add_message(Message m) {
        msg_index_[m.message_id] = messages.size();
        messages.push_back(std::move(m));
        cascades.emplace_back();
        cascades.back().message_id = messages.back().message_id;
    }

    // Registers a finished cascade and updates the per-node exposure index.
    void set_cascade(std::size_t mi, Cascade c, const SocialGraph& g) {
        validate_cascade(c);
        cascades[mi] = std::move(c);
        index_cascade(mi, g);
    }

    // Recomputes exposure index and user interest vectors from scratch.
    void rebuild(const SocialGraph& g) {
        exposure_.assign(g.node_count(), {});
        for (std::size_t mi = 0; mi < cascades.size(); ++mi) {
            validate_cascade(cascades[mi]);
            index_cascade(mi, g);
        }
        compute_interest();
    }

    // I_u = unweighted mean of topic vectors of all history messages of u,
    // frozen at dataset end. Users without history are flagged cold.
    void compute_interest() {
        for (auto& p : profiles) {
            p.interest.clear();
            p.cold = true;
        }
        std::vector<std::size_t> counts(profiles.size(), 0);
        for (const auto& c : cascades) {
            std::size_t mi = message_index(c.message_id);
            const auto& topic = messages[mi].topic;
            for (const auto& e : c.events) {
                auto& p = profiles[e.node];
                if (p.interest.empty()) p.interest.assign(topic.size(), 0.0);
                for (std::size_t i = 0; i < topic.size(); ++i) p.interest[i] += topic[i];
                ++counts[e.node];
            }
        }
        for (std::size_t v = 0; v < profiles.size(); ++v) {
            if (counts[v] == 0) continue;
            for (double& x : profiles[v].interest) x /= static_cast<double>(counts[v]);
            profiles[v].cold = false;
        }
    }

    // History messages HM_v (activated before t) and candidate messages
    // CM_v (exposed before t, not activated before t), as message indices.
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> message_sets(
        NodeId v, double t) const {
        std::vector<std::size_t> hm, cm;
        for (const auto& e : exposures(v)) {
            if (e.own_time < t) hm.push_back(e.message);
            else if (e.first_parent_time < t) cm.push_back(e.message);
        }
        return {std::move(hm), std::move(cm)};
    }

    // |CM_v| at time t, optionally excluding one message (used when that
    // message's exposure is taken from live simulation state instead).
    std::size_t candidate_count(NodeId v, double t, std::size_t exclude = npos) const {
        std::size_t n = 0;
        for (const auto& e : exposures(v))
            if (e.message != exclude && e.first_parent_time < t && !(e.own_time < t)) ++n;
        return n;
    }

private:
    static void validate_cascade(const Cascade& c) {
        for (std::size_t i = 1; i < c.events.size(); ++i)
            if (c.events[i].t < c.events[i - 1].t)
                throw std::runtime_error("cascade " + c.message_id + " not sorted by time");
    }

    void index_cascade(std::size_t mi, const SocialGraph& g) {
        if (exposure_.size() < g.node_count()) exposure_.resize(g.node_count());
        const auto& c = cascades[mi];
        std::unordered_map<NodeId, Exposure> touched;
        for (const auto& e : c.events) {
            auto [it, fresh] = touched.try_emplace(e.node, Exposure{mi, kInf, kInf});
            it->second.own_time = std::min(it->second.own_time, e.t);
            for (NodeId child : g.children(e.node)) {
                auto [cit, cfresh] = touched.try_emplace(child, Exposure{mi, kInf, kInf});
                cit->second.first_parent_time = std::min(cit->second.first_parent_time, e.t);
            }
        }
        std::vector<std::pair<NodeId, Exposure>> rows(touched.begin(), touched.end());
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [v, exp] : rows) exposure_[v].push_back(exp);
    }

    std::unordered_map<std::string, std::size_t> msg_index_;
    std::vector<std::vector<Exposure>> exposure_;  // per node
};

}  // namespace fscale
