#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fscale/learners/classifier.hpp"
#include "fscale/rng.hpp"

using namespace fscale;

namespace {

Dataset separable_1d(std::size_t n = 100, std::uint64_t seed = 3) {
    Dataset d;
    d.cols = 1;
    d.feature_names = {"x"};
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        double x = unif(rng) * (i % 2 ? 1.0 : -1.0);
        double row[1] = {x};
        d.add_row({row, 1}, x > 0 ? 1 : -1);
    }
    return d;
}

Dataset xor_points(std::size_t copies = 25) {
    Dataset d;
    d.cols = 2;
    d.feature_names = {"a", "b"};
    for (std::size_t r = 0; r < copies; ++r) {
        for (int a = 0; a <= 1; ++a)
            for (int b = 0; b <= 1; ++b) {
                double row[2] = {static_cast<double>(a), static_cast<double>(b)};
                d.add_row({row, 2}, (a ^ b) ? 1 : -1);
            }
    }
    return d;
}

double train_accuracy(const Classifier& c, const Dataset& d) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.rows(); ++i)
        if (c.classify(d.row(i)) == d.y[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(d.rows());
}

}  // namespace

TEST_CASE("dataset validation rejects bad input") {
    Dataset d;
    CHECK_THROWS(d.validate());  // empty
    d.cols = 1;
    double row[1] = {1.0};
    d.add_row({row, 1}, 1);
    CHECK_THROWS(d.validate());  // single class
    d.add_row({row, 1}, -1);
    CHECK_NOTHROW(d.validate());
    d.add_row({row, 1}, 0);
    CHECK_THROWS(d.validate());  // bad label
}

TEST_CASE("column and row selection") {
    Dataset d;
    d.cols = 3;
    d.feature_names = {"a", "b", "c"};
    double r1[3] = {1, 2, 3}, r2[3] = {4, 5, 6};
    d.add_row({r1, 3}, 1);
    d.add_row({r2, 3}, -1);

    Dataset cols = d.select_columns({0, 2});
    CHECK(cols.cols == 2);
    CHECK(cols.feature_names == std::vector<std::string>{"a", "c"});
    CHECK(cols.row(1)[1] == 6.0);

    Dataset rows = d.select_rows({1});
    CHECK(rows.rows() == 1);
    CHECK(rows.y[0] == -1);
    CHECK(rows.row(0)[0] == 4.0);
}

TEST_CASE("stratified folds balance both classes") {
    Dataset d = separable_1d(100);
    auto assign = stratified_folds(d, 5, 77);
    std::size_t per_fold_pos[5] = {0}, per_fold_neg[5] = {0};
    for (std::size_t i = 0; i < d.rows(); ++i)
        (d.y[i] == 1 ? per_fold_pos : per_fold_neg)[assign[i]]++;
    for (int f = 0; f < 5; ++f) {
        CHECK(per_fold_pos[f] == 10);
        CHECK(per_fold_neg[f] == 10);
    }
    CHECK(assign == stratified_folds(d, 5, 77));       // seeded determinism
    CHECK(assign != stratified_folds(d, 5, 78));
}

TEST_CASE("logreg separates 1-D data perfectly") {
    Dataset d = separable_1d();
    Classifier c = Classifier::fit(ClassifierKind::logreg, d, {}, 1);
    CHECK(train_accuracy(c, d) == 1.0);
}

TEST_CASE("logreg gradient matches central finite differences") {
    Dataset d = separable_1d(40, 9);
    double r2[1];
    // widen to 3 columns with noise so the check is not trivial
    Dataset d3;
    d3.cols = 3;
    Rng rng(5);
    std::normal_distribution<double> nrm(0.0, 1.0);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        double row[3] = {d.row(i)[0], nrm(rng), nrm(rng)};
        d3.add_row({row, 3}, d.y[i]);
    }
    (void)r2;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int pt = 0; pt < 10; ++pt) {
        std::vector<double> w = {unif(rng), unif(rng), unif(rng)};
        double b = unif(rng);
        std::vector<double> gw(3);
        double gb = 0.0;
        LogisticRegression::gradient(w, b, d3, 1e-4, gw, gb);
        const double h = 1e-6;
        for (std::size_t j = 0; j <= 3; ++j) {
            auto wp = w, wm = w;
            double bp = b, bm = b;
            if (j < 3) {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            double fd = (LogisticRegression::loss(wp, bp, d3, 1e-4) -
                         LogisticRegression::loss(wm, bm, d3, 1e-4)) /
                        (2.0 * h);
            double an = j < 3 ? gw[j] : gb;
            REQUIRE(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("zero-weight logreg outputs 0.5 everywhere") {
    LogisticRegression m;
    m.weights = {0.0, 0.0};
    m.bias = 0.0;
    m.mean = {3.0, -1.0};
    m.scale = {2.0, 5.0};
    double x[2] = {17.0, 42.0};
    CHECK(m.predict_proba({x, 2}) == doctest::Approx(0.5));
}

TEST_CASE("XOR: cart solves it, logreg cannot beat 75%") {
    Dataset d = xor_points();
    Classifier cart = Classifier::fit(ClassifierKind::cart,
                                      d, {{"max_depth", 4}, {"min_leaf", 1}}, 1);
    CHECK(train_accuracy(cart, d) == 1.0);
    Classifier lr = Classifier::fit(ClassifierKind::logreg, d, {}, 1);
    CHECK(train_accuracy(lr, d) <= 0.75);
}

TEST_CASE("gnb with symmetric classes outputs 0.5") {
    GaussianNB m;
    m.log_prior[0] = m.log_prior[1] = std::log(0.5);
    m.mean[0] = m.mean[1] = {1.0, 2.0};
    m.var[0] = m.var[1] = {0.5, 0.5};
    double x[2] = {0.3, 0.9};
    CHECK(m.predict_proba({x, 2}) == doctest::Approx(0.5));
}

TEST_CASE("gnb learns well-separated gaussians") {
    Dataset d;
    d.cols = 2;
    Rng rng(31);
    std::normal_distribution<double> nrm(0.0, 0.5);
    for (int i = 0; i < 200; ++i) {
        double c = i % 2 ? 3.0 : -3.0;
        double row[2] = {c + nrm(rng), c + nrm(rng)};
        d.add_row({row, 2}, i % 2 ? 1 : -1);
    }
    Classifier c = Classifier::fit(ClassifierKind::gnb, d, {}, 1);
    CHECK(train_accuracy(c, d) == 1.0);
}

TEST_CASE("cart leaf probability is Laplace smoothed") {
    DecisionTree t;
    t.n_features = 1;
    t.nodes.push_back({-1, 0.0, -1, -1, 3, 1});  // leaf: 3 pos, 1 neg
    double x[1] = {0.0};
    CHECK(t.predict_proba({x, 1}) == doctest::Approx(4.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("cart respects min_leaf and max_depth") {
    Dataset d = separable_1d(40);
    Classifier c = Classifier::fit(ClassifierKind::cart, d,
                                   {{"max_depth", 0}, {"min_leaf", 1}}, 1);
    double x[1] = {1.0};
    // depth 0 forces a single leaf: probability strictly inside (0,1)
    double p = c.predict_proba({x, 1});
    CHECK(p > 0.0);
    CHECK(p < 1.0);
}

TEST_CASE("predict_proba stays in [0,1] for every learner") {
    Dataset d = separable_1d(60, 17);
    Rng rng(23);
    std::uniform_real_distribution<double> unif(-10.0, 10.0);
    for (ClassifierKind k : kKindsByComplexity) {
        Classifier c = Classifier::fit(k, d, {}, 5);
        for (int i = 0; i < 200; ++i) {
            double x[1] = {unif(rng)};
            double p = c.predict_proba({x, 1});
            REQUIRE(p >= 0.0);
            REQUIRE(p <= 1.0);
        }
    }
}

TEST_CASE("same seed gives bit-identical parameters") {
    Dataset d = xor_points(10);
    for (ClassifierKind k : kKindsByComplexity) {
        Classifier a = Classifier::fit(k, d, {}, 123);
        Classifier b = Classifier::fit(k, d, {}, 123);
        CHECK(a.to_json() == b.to_json());
    }
}

TEST_CASE("rforest with one unbagged full-mtry tree equals cart") {
    Dataset d = xor_points(10);
    HyperMap rf_hyper = {{"n_trees", 1},
                         {"bootstrap", 0},
                         {"mtry", 2},
                         {"max_depth", 12},
                         {"min_leaf", 5}};
    Classifier rf = Classifier::fit(ClassifierKind::rforest, d, rf_hyper, 7);
    Classifier cart = Classifier::fit(ClassifierKind::cart, d,
                                      {{"max_depth", 12}, {"min_leaf", 5}}, 7);
    Rng rng(41);
    std::uniform_real_distribution<double> unif(-1.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        double x[2] = {unif(rng), unif(rng)};
        REQUIRE(rf.predict_proba({x, 2}) == cart.predict_proba({x, 2}));
    }
}

TEST_CASE("feature weights normalize to 1 and find the planted feature") {
    Dataset d;
    d.cols = 3;
    d.feature_names = {"signal", "noise", "constant"};
    Rng rng(19);
    std::normal_distribution<double> nrm(0.0, 1.0);
    for (int i = 0; i < 400; ++i) {
        double s = nrm(rng);
        double row[3] = {s, nrm(rng), 1.0};
        d.add_row({row, 3}, s > 0 ? 1 : -1);
    }
    for (ClassifierKind k : kKindsByComplexity) {
        Classifier c = Classifier::fit(k, d, {}, 3);
        auto w = c.feature_weights();
        double sum = w[0] + w[1] + w[2];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        if (k == ClassifierKind::cart) {
            CHECK(w[0] > 0.9);       // planted feature dominates
            CHECK(w[2] == 0.0);      // never splits on a constant
        }
    }
}

TEST_CASE("classifier JSON round-trip preserves predictions") {
    Dataset d = xor_points(10);
    Rng rng(53);
    std::uniform_real_distribution<double> unif(-1.0, 2.0);
    for (ClassifierKind k : kKindsByComplexity) {
        Classifier c = Classifier::fit(k, d, {}, 11);
        Classifier back = Classifier::from_json(c.to_json());
        CHECK(back.kind() == k);
        for (int i = 0; i < 50; ++i) {
            double x[2] = {unif(rng), unif(rng)};
            REQUIRE(back.predict_proba({x, 2}) == c.predict_proba({x, 2}));
        }
    }
}

TEST_CASE("unfitted classifier throws, dimension mismatch throws") {
    Classifier c;
    double x[2] = {0.0, 0.0};
    CHECK_THROWS_AS(c.predict_proba({x, 2}), std::logic_error);
    Dataset d = xor_points(5);
    Classifier f = Classifier::fit(ClassifierKind::gnb, d, {}, 1);
    double bad[3] = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(f.predict_proba({bad, 3}), std::invalid_argument);
}

TEST_CASE("kind names round-trip") {
    for (ClassifierKind k : kKindsByComplexity)
        CHECK(kind_from_name(kind_name(k)) == k);
    CHECK_THROWS_AS(kind_from_name("svm"), std::invalid_argument);
}
