#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fscale {

using NodeId = std::uint32_t;

struct GraphLoadStats {
    std::size_t lines = 0;       // non-comment, non-empty lines seen
    std::size_t edges = 0;       // edges kept after dedup
    std::size_t duplicates = 0;  // repeated edge lines dropped
    std::size_t self_loops = 0;  // rejected self-loop lines
};

struct GraphParseError : std::runtime_error {
    std::size_t line_no;
    GraphParseError(std::size_t line, const std::string& what)
        : std::runtime_error("edge list line " + std::to_string(line) + ": " + what),
          line_no(line) {}
};

// Directed follower graph. Edge (i -> j) means i follows j: j is a parent
// of i, i is a child of j, and i is exposed to j's messages.
class SocialGraph {
public:
    SocialGraph() = default;

    std::size_t node_count() const { return parents_.size(); }

    const std::vector<NodeId>& parents(NodeId v) const {
        check(v);
        return parents_[v];
    }
    const std::vector<NodeId>& children(NodeId v) const {
        check(v);
        return children_[v];
    }

    // friends(v) = parents(v) ∩ children(v): mutual followers.
    std::vector<NodeId> friends(NodeId v) const {
        check(v);
        std::vector<NodeId> out;
        std::set_intersection(parents_[v].begin(), parents_[v].end(),
                              children_[v].begin(), children_[v].end(),
                              std::back_inserter(out));
        return out;
    }

    bool has_edge(NodeId child, NodeId parent) const {
        check(child);
        const auto& p = parents_[child];
        return std::binary_search(p.begin(), p.end(), parent);
    }

    NodeId intern(const std::string& ext) {
        auto it = ext_to_id_.find(ext);
        if (it != ext_to_id_.end()) return it->second;
        NodeId id = static_cast<NodeId>(parents_.size());
        ext_to_id_.emplace(ext, id);
        id_to_ext_.push_back(ext);
        parents_.emplace_back();
        children_.emplace_back();
        return id;
    }

    NodeId lookup(const std::string& ext) const {
        auto it = ext_to_id_.find(ext);
        if (it == ext_to_id_.end())
            throw std::out_of_range("unknown node id '" + ext + "'");
        return it->second;
    }
    bool contains(const std::string& ext) const { return ext_to_id_.count(ext) != 0; }
    const std::string& external_id(NodeId v) const {
        check(v);
        return id_to_ext_[v];
    }

    // child follows parent; duplicates must be handled by the caller
    // before finalize().
    void add_edge(NodeId child, NodeId parent) {
        if (child == parent) throw std::invalid_argument("self-loop");
        check(child);
        check(parent);
        parents_[child].push_back(parent);
        children_[parent].push_back(child);
    }

    // Sorts adjacency and drops duplicate edges; returns duplicate count.
    std::size_t finalize() {
        std::size_t dups = 0;
        for (auto& adj : parents_) {
            std::sort(adj.begin(), adj.end());
            auto last = std::unique(adj.begin(), adj.end());
            dups += static_cast<std::size_t>(adj.end() - last);
            adj.erase(last, adj.end());
        }
        for (auto& adj : children_) {
            std::sort(adj.begin(), adj.end());
            adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        }
        return dups;
    }

private:
    void check(NodeId v) const {
        if (v >= parents_.size())
            throw std::out_of_range("node id " + std::to_string(v) + " out of range");
    }

    std::vector<std::vector<NodeId>> parents_;   // P_i
    std::vector<std::vector<NodeId>> children_;  // C_i
    std::unordered_map<std::string, NodeId> ext_to_id_;
    std::vector<std::string> id_to_ext_;
};

struct Neighborhood {
    std::vector<NodeId> parents;
    std::vector<NodeId> children;
    std::vector<NodeId> friends;
};

inline Neighborhood neighborhood(const SocialGraph& g, NodeId v) {
    return Neighborhood{g.parents(v), g.children(v), g.friends(v)};
}

// Edge list format: UTF-8, one `child<TAB>parent` pair per line,
// `#`-prefixed comment lines and blank lines skipped.
inline SocialGraph load_graph(std::istream& in, GraphLoadStats* stats = nullptr) {
    SocialGraph g;
    GraphLoadStats st;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<NodeId, NodeId>> pending;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        ++st.lines;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw GraphParseError(line_no, "expected 'child<TAB>parent'");
        if (line.find('\t', tab + 1) != std::string::npos)
            throw GraphParseError(line_no, "more than two fields");
        NodeId child = g.intern(line.substr(0, tab));
        NodeId parent = g.intern(line.substr(tab + 1));
        if (child == parent) {
            ++st.self_loops;
            continue;
        }
        pending.emplace_back(child, parent);
    }
    for (auto [c, p] : pending) g.add_edge(c, p);
    st.duplicates = g.finalize();
    st.edges = pending.size() - st.duplicates;
    if (stats) *stats = st;
    return g;
}

}  // namespace fscale
