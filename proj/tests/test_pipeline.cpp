#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "fscale/pipeline.hpp"
#include "fscale/synth.hpp"

using namespace fscale;

namespace {

// b follows a, c follows a; cascade a(t=1) -> b(t=2); c never re-shares.
struct MiniCorpus {
    SocialGraph g;
    Corpus corpus;
    MiniCorpus() {
        NodeId a = g.intern("a"), b = g.intern("b"), c = g.intern("c");
        g.add_edge(b, a);
        g.add_edge(c, a);
        g.finalize();
        Message m;
        m.message_id = "m";
        m.topic = {1.0};
        corpus.add_message(m);
        corpus.profiles.resize(3);
        for (NodeId v = 0; v < 3; ++v) corpus.profiles[v].node = v;
        corpus.cascades[0].events = {{a, 1.0}, {b, 2.0}};
        corpus.rebuild(g);
    }
};

Dataset planted_dataset(std::size_t d, std::vector<std::size_t> informative,
                        std::size_t n, std::uint64_t seed) {
    Dataset data;
    data.cols = d;
    for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("f" + std::to_string(j));
    Rng rng(seed);
    std::normal_distribution<double> nrm(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (double& x : row) x = nrm(rng);
        double z = 0.0;
        for (std::size_t j : informative) z += row[j];
        data.add_row(row, z > 0 ? 1 : -1);
    }
    return data;
}

}  // namespace

TEST_CASE("minimal cascade yields one positive and one negative") {
    MiniCorpus mc;
    auto refs = build_instance_refs(mc.g, mc.corpus, 1);
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].label == 1);
    CHECK(refs[0].node == mc.g.lookup("b"));
    CHECK(refs[0].eval_time == 2.0);
    CHECK(refs[1].label == -1);
    CHECK(refs[1].node == mc.g.lookup("c"));
    // root a excluded: no activated parent before its own event
}

TEST_CASE("negative sampling is seeded and balanced") {
    SocialGraph g = gen_network(200, 3, 0.3, 5);
    Corpus corpus = gen_corpus(g, {}, PlantedRule::default_logistic(), 5);
    auto a = build_instance_refs(g, corpus, 42);
    auto b = build_instance_refs(g, corpus, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].cascade == b[i].cascade);
        CHECK(a[i].node == b[i].node);
        CHECK(a[i].label == b[i].label);
    }
    std::size_t pos = 0, neg = 0;
    for (const auto& r : a) (r.label == 1 ? pos : neg)++;
    CHECK(pos == neg);  // downsampled to balance
    CHECK(pos > 0);
}

TEST_CASE("build_instances evaluates positives before their own activation") {
    MiniCorpus mc;
    std::vector<InstanceRef> refs;
    Dataset d = build_instances(mc.g, mc.corpus, 1, &refs);
    REQUIRE(d.rows() == 2);
    CHECK(d.cols == kNumFeatures);
    // positive row for b: parent a active, b itself not yet ->
    // SocialRe = 1 and the instant is t(b) = 2
    CHECK(d.row(0)[kSocialRe] == 1.0);
    CHECK(d.row(0)[kSurT] == 2.0);
    // negative row for c at cascade end (t = 2): a active
    CHECK(d.row(1)[kSocialRe] == 1.0);
}

TEST_CASE("cv accuracy is high on separable data and deterministic") {
    Dataset d = planted_dataset(4, {0}, 300, 8);
    double acc = cv_accuracy(ClassifierKind::logreg, d, 5, 77);
    CHECK(acc > 0.9);
    CHECK(acc == cv_accuracy(ClassifierKind::logreg, d, 5, 77));
}

TEST_CASE("model selection prefers simple models on linear data") {
    Dataset d = planted_dataset(3, {0, 1}, 400, 15);
    auto sel = model_select(d, 5, 3);
    CHECK(sel.accuracy.size() == 4);
    // linear concept: logreg must be at worst 0.005 below the winner
    CHECK(sel.kind == ClassifierKind::logreg);
}

TEST_CASE("model selection picks a tree-based learner on XOR-like data") {
    Dataset d;
    d.cols = 2;
    d.feature_names = {"a", "b"};
    Rng rng(25);
    std::normal_distribution<double> nrm(0.0, 0.15);
    for (int i = 0; i < 400; ++i) {
        int a = static_cast<int>(rng() % 2), b = static_cast<int>(rng() % 2);
        double row[2] = {a + nrm(rng), b + nrm(rng)};
        d.add_row({row, 2}, (a ^ b) ? 1 : -1);
    }
    auto sel = model_select(d, 5, 3);
    bool tree_based = sel.kind == ClassifierKind::cart || sel.kind == ClassifierKind::rforest;
    CHECK(tree_based);
}

TEST_CASE("identical candidate accuracies resolve to the simplest kind") {
    // degenerate single-feature dataset where every learner scores the same
    Dataset d;
    d.cols = 1;
    d.feature_names = {"x"};
    for (int i = 0; i < 60; ++i) {
        double row[1] = {i % 2 ? 1.0 : -1.0};
        d.add_row({row, 1}, i % 2 ? 1 : -1);
    }
    auto sel = model_select(d, 5, 9);
    double first = sel.accuracy.begin()->second;
    bool all_equal = std::all_of(sel.accuracy.begin(), sel.accuracy.end(),
                                 [&](const auto& kv) { return kv.second == first; });
    CHECK(all_equal);
    CHECK(sel.kind == ClassifierKind::logreg);
}

TEST_CASE("sfbs recovers the informative feature at k=1") {
    Dataset d = planted_dataset(3, {1}, 400, 33);
    auto sel = sfbs(ClassifierKind::logreg, d, 1, 5, 7);
    CHECK(sel == std::vector<std::size_t>{1});
}

TEST_CASE("sfbs with k=d returns the full set") {
    Dataset d = planted_dataset(4, {0}, 150, 3);
    auto sel = sfbs(ClassifierKind::logreg, d, 4, 5, 7);
    CHECK(sel == std::vector<std::size_t>({0, 1, 2, 3}));
}

TEST_CASE("sfbs criterion dominates plain backward selection") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Dataset d = planted_dataset(6, {0, 3}, 300, 100 + seed);
        double j_sfbs = 0.0, j_sbs = 0.0;
        sfbs(ClassifierKind::logreg, d, 2, 5, seed, &j_sfbs);
        sbs(ClassifierKind::logreg, d, 2, 5, seed, &j_sbs);
        CHECK(j_sfbs >= j_sbs);
    }
}

TEST_CASE("sfbs trail covers every size down to k") {
    Dataset d = planted_dataset(6, {0, 1}, 200, 44);
    SfbsTrail trail;
    sfbs(ClassifierKind::logreg, d, 3, 5, 9, nullptr, &trail);
    for (std::size_t k = 3; k <= 6; ++k) {
        CHECK(trail.best_j[k] >= 0.0);
        CHECK(detail::mask_to_indices(trail.best_set[k], 6).size() == k);
    }
}

TEST_CASE("sfbs rejects out-of-range k") {
    Dataset d = planted_dataset(3, {0}, 60, 1);
    CHECK_THROWS_AS(sfbs(ClassifierKind::logreg, d, 0, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(sfbs(ClassifierKind::logreg, d, 4, 5, 1), std::invalid_argument);
}

TEST_CASE("mechanism measure: paper proportions") {
    // one feature per mechanism, weights proportional to the published
    // percentages 4.786 / 91.985 / 2.897 / 0.332
    std::vector<std::size_t> selected = {kKeyW, kAvgExpT, kSocialRe, kVerSta};
    std::vector<double> weights = {4.786, 91.985, 2.897, 0.332};
    auto w = mechanism_measure(weights, selected);
    CHECK(w[0] == doctest::Approx(0.04786).epsilon(1e-6));
    CHECK(w[1] == doctest::Approx(0.91985).epsilon(1e-6));
    CHECK(w[2] == doctest::Approx(0.02897).epsilon(1e-6));
    CHECK(w[3] == doctest::Approx(0.00332).epsilon(1e-6));
}

TEST_CASE("mechanism measure degenerate cases") {
    auto all_csm = mechanism_measure({1.0}, {kIntDiv});
    CHECK(all_csm == std::array<double, 4>{1.0, 0.0, 0.0, 0.0});
    auto uniform = mechanism_measure({0.25, 0.25, 0.25, 0.25},
                                     {kContLen, kSurT, kRecRel, kChlNode});
    for (double x : uniform) CHECK(x == doctest::Approx(0.25));
}

TEST_CASE("mechanism measure sums to 1 on random weights") {
    Rng rng(61);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t k = 1 + rng() % kNumFeatures;
        std::vector<std::size_t> sel;
        for (std::size_t j = 0; j < kNumFeatures; ++j) sel.push_back(j);
        for (std::size_t i = sel.size(); i > 1; --i) std::swap(sel[i - 1], sel[rng() % i]);
        sel.resize(k);
        std::vector<double> w(k);
        for (double& x : w) x = unif(rng) + 1e-6;
        auto m = mechanism_measure(w, sel);
        CHECK(m[0] + m[1] + m[2] + m[3] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("learn produces a usable model deterministically") {
    SocialGraph g = gen_network(250, 3, 0.3, 17);
    CorpusGenConfig cc;
    cc.n_messages = 60;
    Corpus corpus = gen_corpus(g, cc, PlantedRule::default_logistic(), 17);

    LearnConfig cfg;
    cfg.folds = 5;
    cfg.seed = 4;
    cfg.force_kind = ClassifierKind::logreg;  // keep the test fast
    TrainedModel m = learn(g, corpus, cfg);

    CHECK(m.selected.size() >= 9);    // within ceil(18/2)..18
    CHECK(m.selected.size() <= 18);
    CHECK(std::is_sorted(m.selected.begin(), m.selected.end()));
    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.mechanism[0] + m.mechanism[1] + m.mechanism[2] + m.mechanism[3] ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.selected_accuracy > 0.7);

    TrainedModel m2 = learn(g, corpus, cfg);
    CHECK(m.to_json() == m2.to_json());  // same seed, same serialization
}

TEST_CASE("trained model JSON round-trip") {
    SocialGraph g = gen_network(150, 3, 0.3, 23);
    CorpusGenConfig cc;
    cc.n_messages = 40;
    Corpus corpus = gen_corpus(g, cc, PlantedRule::default_logistic(), 23);
    LearnConfig cfg;
    cfg.folds = 5;
    cfg.seed = 2;
    cfg.force_kind = ClassifierKind::gnb;
    TrainedModel m = learn(g, corpus, cfg);
    TrainedModel back = TrainedModel::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    FeatureVector x{};
    for (std::size_t i = 0; i < kNumFeatures; ++i) x[i] = static_cast<double>(i);
    CHECK(back.classifier.predict_proba(back.project(x)) ==
          m.classifier.predict_proba(m.project(x)));
}
