#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "fscale/cascade.hpp"
#include "fscale/graph.hpp"
#include "fscale/rng.hpp"

using namespace fscale;

namespace {

SocialGraph chain3() {
    // b follows a, c follows b
    SocialGraph g;
    NodeId a = g.intern("a"), b = g.intern("b"), c = g.intern("c");
    g.add_edge(b, a);
    g.add_edge(c, b);
    g.finalize();
    return g;
}

Cascade abc_cascade() {
    return Cascade{"m", {{0, 1.0}, {1, 2.0}, {2, 3.0}}};
}

}  // namespace

TEST_CASE("observe_before applies a strict time cut") {
    SocialGraph g = chain3();
    Cascade c = abc_cascade();
    CascadeState s = observe_before(g, c, 2.5);
    CHECK(s.is_activated(0));
    CHECK(s.is_activated(1));
    CHECK(!s.is_activated(2));
    CHECK(s.cascade.events.size() == 2);
    CHECK(s.now == 2.5);
}

TEST_CASE("observe_before at the first event time excludes it") {
    SocialGraph g = chain3();
    CascadeState s = observe_before(g, abc_cascade(), 1.0);
    CHECK(s.cascade.events.empty());
    for (NodeId v = 0; v < 3; ++v) CHECK(!s.is_activated(v));
}

TEST_CASE("observe_before at infinity reproduces the full cascade") {
    SocialGraph g = chain3();
    CascadeState s = observe_before(g, abc_cascade(), kInf);
    CHECK(s.cascade.events.size() == 3);
    for (NodeId v = 0; v < 3; ++v) CHECK(s.is_activated(v));
}

TEST_CASE("observation is monotone in t") {
    SocialGraph g = chain3();
    Cascade c = abc_cascade();
    std::size_t prev = 0;
    for (double t : {0.5, 1.5, 2.0, 2.5, 3.5, 10.0}) {
        CascadeState s = observe_before(g, c, t);
        CHECK(s.cascade.events.size() >= prev);
        prev = s.cascade.events.size();
    }
}

TEST_CASE("susceptible = inactivated children of activated nodes") {
    SocialGraph g = chain3();
    CascadeState s = observe_before(g, abc_cascade(), 1.5);  // only a active
    CHECK(s.susceptible == std::vector<NodeId>{1});
    s = observe_before(g, abc_cascade(), 2.5);  // a,b active
    CHECK(s.susceptible == std::vector<NodeId>{2});
}

TEST_CASE("susceptible matches brute force on random graphs") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        SocialGraph g;
        const std::size_t n = 1000;
        for (std::size_t i = 0; i < n; ++i) g.intern("n" + std::to_string(i));
        for (int e = 0; e < 4000; ++e) {
            NodeId a = rng() % n, b = rng() % n;
            if (a != b) g.add_edge(a, b);
        }
        g.finalize();
        std::vector<char> act(n, 0);
        for (std::size_t i = 0; i < n / 10; ++i) act[rng() % n] = 1;

        std::set<NodeId> brute;
        for (NodeId v = 0; v < n; ++v) {
            if (act[v]) continue;
            for (NodeId p : g.parents(v))
                if (act[p]) brute.insert(v);
        }
        std::vector<NodeId> expect(brute.begin(), brute.end());
        CHECK(compute_susceptible(g, act) == expect);
    }
}

TEST_CASE("activated_parents returns only active parents, time-sorted") {
    SocialGraph g;
    NodeId v = g.intern("v"), p = g.intern("p"), q = g.intern("q");
    g.add_edge(v, p);
    g.add_edge(v, q);
    g.finalize();

    CascadeState s;
    s.activated.assign(3, 0);
    s.activated_time.assign(3, kInf);
    s.activated[p] = 1;
    s.activated_time[p] = 5.0;

    auto ap = activated_parents(g, s, v);
    REQUIRE(ap.size() == 1);
    CHECK(ap[0] == std::pair<NodeId, double>{p, 5.0});
}

TEST_CASE("activated_parents of an orphan is empty") {
    SocialGraph g = chain3();
    CascadeState s = full_state(g, abc_cascade());
    CHECK(activated_parents(g, s, 0).empty());  // a has no parents
}

TEST_CASE("activated_parents matches brute scan when everything is active") {
    Rng rng(7);
    SocialGraph g;
    const std::size_t n = 50;
    for (std::size_t i = 0; i < n; ++i) g.intern("n" + std::to_string(i));
    for (int e = 0; e < 300; ++e) {
        NodeId a = rng() % n, b = rng() % n;
        if (a != b) g.add_edge(a, b);
    }
    g.finalize();
    Cascade c{"m", {}};
    for (NodeId v = 0; v < n; ++v) c.events.push_back({v, static_cast<double>(rng() % 17)});
    std::stable_sort(c.events.begin(), c.events.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    CascadeState s = full_state(g, c);
    for (NodeId v = 0; v < n; ++v) {
        std::vector<std::pair<NodeId, double>> brute;
        for (const auto& e : c.events)
            if (g.has_edge(v, e.node)) brute.emplace_back(e.node, e.t);
        std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second < b.second : a.first < b.first;
        });
        CHECK(activated_parents(g, s, v) == brute);
    }
}

namespace {

Corpus two_message_corpus(SocialGraph& g) {
    // v follows u; u active on m1 (v re-shares) and on m2 (v never does)
    NodeId u = g.intern("u"), v = g.intern("v");
    g.add_edge(v, u);
    g.finalize();
    Corpus corpus;
    Message m1;
    m1.message_id = "m1";
    m1.topic = {1.0};
    Message m2;
    m2.message_id = "m2";
    m2.topic = {1.0};
    corpus.add_message(m1);
    corpus.add_message(m2);
    corpus.profiles.resize(2);
    for (NodeId i = 0; i < 2; ++i) corpus.profiles[i].node = i;
    corpus.cascades[0].events = {{u, 1.0}, {v, 3.0}};
    corpus.cascades[1].events = {{u, 2.0}};
    corpus.rebuild(g);
    return corpus;
}

}  // namespace

TEST_CASE("message sets split history from candidates") {
    SocialGraph g;
    Corpus corpus = two_message_corpus(g);
    NodeId v = g.lookup("v");

    auto [hm, cm] = corpus.message_sets(v, 5.0);
    CHECK(hm == std::vector<std::size_t>{0});  // activated on m1 at t=3
    CHECK(cm == std::vector<std::size_t>{1});  // exposed to m2, never activated

    auto [hm2, cm2] = corpus.message_sets(v, 0.5);  // before any event
    CHECK(hm2.empty());
    CHECK(cm2.empty());

    CHECK(hm.size() + cm.size() == 2);  // HM and CM never overlap
}

TEST_CASE("candidate_count honors the exclusion parameter") {
    SocialGraph g;
    Corpus corpus = two_message_corpus(g);
    NodeId v = g.lookup("v");
    CHECK(corpus.candidate_count(v, 5.0) == 1);
    CHECK(corpus.candidate_count(v, 5.0, 1) == 0);   // exclude m2
    CHECK(corpus.candidate_count(v, 2.5, 1) == 1);   // m1 pending until t=3
}

TEST_CASE("interest is the unweighted mean of history topics") {
    SocialGraph g;
    NodeId u = g.intern("u");
    g.intern("w");
    g.finalize();
    Corpus corpus;
    Message m1;
    m1.message_id = "m1";
    m1.topic = {1.0, 0.0};
    Message m2;
    m2.message_id = "m2";
    m2.topic = {0.0, 1.0};
    corpus.add_message(m1);
    corpus.add_message(m2);
    corpus.profiles.resize(2);
    for (NodeId i = 0; i < 2; ++i) corpus.profiles[i].node = i;
    corpus.cascades[0].events = {{u, 1.0}};
    corpus.cascades[1].events = {{u, 2.0}};
    corpus.rebuild(g);

    CHECK(!corpus.profile(u).cold);
    REQUIRE(corpus.profile(u).interest.size() == 2);
    CHECK(corpus.profile(u).interest[0] == doctest::Approx(0.5));
    CHECK(corpus.profile(u).interest[1] == doctest::Approx(0.5));
    CHECK(corpus.profile(g.lookup("w")).cold);  // no history
}

TEST_CASE("unsorted cascade events are rejected") {
    SocialGraph g = chain3();
    Corpus corpus;
    Message m;
    m.message_id = "m";
    corpus.add_message(m);
    corpus.cascades[0].events = {{0, 5.0}, {1, 1.0}};
    CHECK_THROWS(corpus.rebuild(g));
}

TEST_CASE("exposures of an unindexed node are empty") {
    Corpus corpus;
    CHECK(corpus.exposures(12345).empty());
}
