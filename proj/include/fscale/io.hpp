#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fscale/cascade.hpp"
#include "fscale/graph.hpp"

namespace fscale {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw DataError("cannot read " + p.string());
    return f;
}

inline void write_graph(const SocialGraph& g, const std::filesystem::path& p) {
    auto f = open_out(p);
    f << "# child<TAB>parent\n";
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId par : g.parents(v))
            f << g.external_id(v) << '\t' << g.external_id(par) << '\n';
}

inline void write_cascades(const Corpus& corpus, const SocialGraph& g,
                           const std::filesystem::path& p) {
    auto f = open_out(p);
    for (const auto& c : corpus.cascades) {
        for (const auto& e : c.events) {
            nlohmann::json j = {{"m", c.message_id},
                                {"v", g.external_id(e.node)},
                                {"t", e.t}};
            f << j.dump() << '\n';
        }
    }
}

inline void write_cascade(const Cascade& c, const SocialGraph& g,
                          const std::filesystem::path& p) {
    auto f = open_out(p);
    for (const auto& e : c.events) {
        nlohmann::json j = {{"m", c.message_id}, {"v", g.external_id(e.node)}, {"t", e.t}};
        f << j.dump() << '\n';
    }
}

inline void write_messages(const Corpus& corpus, const std::filesystem::path& p) {
    auto f = open_out(p);
    for (const auto& m : corpus.messages) {
        nlohmann::json j = {{"message_id", m.message_id},
                            {"content_length", m.content_length},
                            {"has_keyword", m.has_keyword},
                            {"topic", m.topic},
                            {"origin_time", m.origin_time}};
        f << j.dump() << '\n';
    }
}

inline void write_profiles(const Corpus& corpus, const SocialGraph& g,
                           const std::filesystem::path& p) {
    auto f = open_out(p);
    for (const auto& prof : corpus.profiles) {
        nlohmann::json j = {{"node", g.external_id(prof.node)},
                            {"verified", prof.verified},
                            {"account_created", prof.account_created}};
        f << j.dump() << '\n';
    }
}

struct DataDir {
    SocialGraph graph;
    Corpus corpus;
    GraphLoadStats graph_stats;
};

inline nlohmann::json parse_json_line(const std::string& line,
                                      const std::filesystem::path& file,
                                      std::size_t line_no) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

// Loads graph.tsv, messages.jsonl, profiles.jsonl and cascades.jsonl from
// a dataset directory and rebuilds the exposure index and interest
// vectors.
inline DataDir load_data_dir(const std::filesystem::path& dir) {
    DataDir d;
    {
        auto f = open_in(dir / "graph.tsv");
        d.graph = load_graph(f, &d.graph_stats);
    }
    {
        auto f = open_in(dir / "messages.jsonl");
        std::string line;
        std::size_t ln = 0;
        while (std::getline(f, line)) {
            ++ln;
            if (line.empty()) continue;
            auto j = parse_json_line(line, dir / "messages.jsonl", ln);
            Message m;
            m.message_id = j.at("message_id").get<std::string>();
            m.content_length = j.at("content_length").get<std::uint64_t>();
            m.has_keyword = j.at("has_keyword").get<bool>();
            m.topic = j.at("topic").get<std::vector<double>>();
            m.origin_time = j.at("origin_time").get<double>();
            double sum = 0.0;
            for (double x : m.topic) {
                if (x < 0.0) throw DataError("message " + m.message_id + ": negative topic");
                sum += x;
            }
            if (!m.topic.empty() && std::abs(sum - 1.0) > 1e-9)
                throw DataError("message " + m.message_id + ": topic sums to " +
                                std::to_string(sum));
            d.corpus.add_message(std::move(m));
        }
    }
    {
        d.corpus.profiles.resize(d.graph.node_count());
        for (NodeId v = 0; v < d.graph.node_count(); ++v) d.corpus.profiles[v].node = v;
        std::vector<char> seen(d.graph.node_count(), 0);
        auto f = open_in(dir / "profiles.jsonl");
        std::string line;
        std::size_t ln = 0;
        while (std::getline(f, line)) {
            ++ln;
            if (line.empty()) continue;
            auto j = parse_json_line(line, dir / "profiles.jsonl", ln);
            std::string ext = j.at("node").get<std::string>();
            if (!d.graph.contains(ext)) continue;  // profile for unknown node
            NodeId v = d.graph.lookup(ext);
            auto& p = d.corpus.profiles[v];
            p.verified = j.at("verified").get<bool>();
            p.account_created = j.at("account_created").get<double>();
            seen[v] = 1;
        }
        for (NodeId v = 0; v < d.graph.node_count(); ++v)
            if (!seen[v]) throw DataError("missing profile for node " + d.graph.external_id(v));
    }
    {
        auto f = open_in(dir / "cascades.jsonl");
        std::string line;
        std::size_t ln = 0;
        while (std::getline(f, line)) {
            ++ln;
            if (line.empty()) continue;
            auto j = parse_json_line(line, dir / "cascades.jsonl", ln);
            std::string mid = j.at("m").get<std::string>();
            std::size_t mi = d.corpus.message_index(mid);
            if (mi == Corpus::npos)
                throw DataError("cascade event for unknown message '" + mid + "'");
            std::string ext = j.at("v").get<std::string>();
            if (!d.graph.contains(ext))
                throw DataError("cascade event for unknown node '" + ext + "'");
            d.corpus.cascades[mi].events.push_back(
                {d.graph.lookup(ext), j.at("t").get<double>()});
        }
    }
    for (auto& c : d.corpus.cascades) {
        std::stable_sort(c.events.begin(), c.events.end(),
                         [](const auto& a, const auto& b) { return a.t < b.t; });
        std::vector<char> dup(d.graph.node_count(), 0);
        for (const auto& e : c.events) {
            if (dup[e.node])
                throw DataError("cascade " + c.message_id + ": node " +
                                d.graph.external_id(e.node) + " activated twice");
            dup[e.node] = 1;
        }
    }
    d.corpus.rebuild(d.graph);
    return d;
}

inline void save_json(const nlohmann::json& j, const std::filesystem::path& p) {
    auto f = open_out(p);
    f << j.dump(2) << '\n';
}

inline nlohmann::json load_json(const std::filesystem::path& p) {
    auto f = open_in(p);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(p.string() + ": " + e.what());
    }
    return j;
}

}  // namespace fscale
