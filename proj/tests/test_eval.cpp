#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "attrseq/core/rng.hpp"
#include "attrseq/eval/metrics.hpp"

using namespace attrseq;

namespace {

EmbeddingSet make_set(const std::vector<std::vector<double>>& rows,
                      const std::vector<std::string>& labels = {}) {
    EmbeddingSet e;
    std::size_t d = rows.empty() ? 0 : rows[0].size();
    e.vectors = Matrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        e.ids.push_back("p" + std::to_string(i));
        for (std::size_t j = 0; j < d; ++j) e.vectors(i, j) = rows[i][j];
    }
    e.labels = labels;
    return e;
}

EmbeddingSet random_set(Rng& rng, std::size_t n, std::size_t d) {
    EmbeddingSet e;
    e.vectors = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        e.ids.push_back("p" + std::to_string(i));
        for (std::size_t j = 0; j < d; ++j) e.vectors(i, j) = rng.uniform(-3, 3);
    }
    return e;
}

// independent O(n^2) oracle: full sort of the distance list
std::vector<double> knn_brute(const EmbeddingSet& e, std::size_t k) {
    std::vector<double> out(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        std::vector<double> d;
        for (std::size_t j = 0; j < e.size(); ++j)
            if (j != i) d.push_back(row_distance(e.vectors, i, j));
        std::sort(d.begin(), d.end());
        out[i] = d[k - 1];
    }
    return out;
}

// pairwise-comparison oracle for the AUC rank statistic
double auc_brute(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t np = 0, nn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        ++np;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    for (int l : labels)
        if (!l) ++nn;
    return wins / (static_cast<double>(np) * static_cast<double>(nn));
}

// direct transcription of the silhouette definition
double silhouette_brute(const EmbeddingSet& e, const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& own = groups[labels[i]];
        if (own.size() == 1) continue;
        double a = 0.0;
        for (auto j : own)
            if (j != i) a += row_distance(e.vectors, i, j);
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (auto& [label, members] : groups) {
            if (label == labels[i]) continue;
            double s = 0.0;
            for (auto j : members) s += row_distance(e.vectors, i, j);
            b = std::min(b, s / static_cast<double>(members.size()));
        }
        double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(labels.size());
}

}  // namespace

TEST_CASE("knn outlier scores") {
    SECTION("duplicate points score zero at k=1") {
        auto e = make_set({{1, 1}, {1, 1}, {5, 5}});
        auto s = knn_outlier_scores(e, 1);
        CHECK(s[0] == 0.0);
        CHECK(s[1] == 0.0);
    }
    SECTION("a far point dominates") {
        std::vector<std::vector<double>> rows;
        Rng rng(3);
        for (int i = 0; i < 10; ++i) rows.push_back({rng.uniform(), rng.uniform()});
        rows.push_back({100.0, 100.0});
        auto e = make_set(rows);
        auto s = knn_outlier_scores(e, 3);
        CHECK(*std::max_element(s.begin(), s.end()) == s.back());
    }
    SECTION("matches the brute-force oracle on random sets") {
        Rng rng(9);
        for (int trial = 0; trial < 10; ++trial) {
            auto e = random_set(rng, 50, 3);
            std::size_t k = 1 + rng.below(10);
            auto fast = knn_outlier_scores(e, k);
            auto slow = knn_brute(e, k);
            for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == slow[i]);
        }
    }
    SECTION("k bounds") {
        auto e = make_set({{0}, {1}, {2}});
        CHECK_THROWS_AS(knn_outlier_scores(e, 0), ConfigError);
        CHECK_THROWS_AS(knn_outlier_scores(e, 3), ConfigError);
    }
}

TEST_CASE("roc auc") {
    CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), UndefinedMetricError);

    SECTION("matches the pairwise oracle, including ties") {
        Rng rng(13);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t n = 5 + rng.below(40);
            std::vector<double> scores;
            std::vector<int> labels;
            bool pos = false, neg = false;
            for (std::size_t i = 0; i < n; ++i) {
                scores.push_back(static_cast<double>(rng.below(8)));  // coarse grid forces ties
                int l = rng.uniform() < 0.4 ? 1 : 0;
                labels.push_back(l);
                (l ? pos : neg) = true;
            }
            if (!pos || !neg) continue;
            CHECK(roc_auc(scores, labels) == Catch::Approx(auc_brute(scores, labels)).margin(1e-12));
        }
    }

    SECTION("negated scores flip the AUC") {
        Rng rng(14);
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 60; ++i) {
            scores.push_back(rng.uniform());
            labels.push_back(i % 3 == 0 ? 1 : 0);
        }
        std::vector<double> neg;
        for (double s : scores) neg.push_back(-s);
        CHECK(roc_auc(neg, labels) == Catch::Approx(1.0 - roc_auc(scores, labels)).margin(1e-12));
    }
}

TEST_CASE("nmi") {
    CHECK(nmi({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
    CHECK(nmi({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
    CHECK_THROWS_AS(nmi({0, 1}, {0, 1, 0}), DimensionError);

    SECTION("bitwise symmetric") {
        Rng rng(15);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<int> a, b;
            for (int i = 0; i < 200; ++i) {
                a.push_back(static_cast<int>(rng.below(5)));
                b.push_back(static_cast<int>(rng.below(3)));
            }
            double ab = nmi(a, b);
            double ba = nmi(b, a);
            CHECK(ab == ba);
        }
    }

    SECTION("independent labelings score near zero") {
        Rng rng(16);
        std::vector<int> a, b;
        for (int i = 0; i < 10000; ++i) {
            a.push_back(static_cast<int>(rng.below(4)));
            b.push_back(static_cast<int>(rng.below(4)));
        }
        CHECK(nmi(a, b) < 0.01);
    }
}

TEST_CASE("density clustering") {
    SECTION("two well-separated blobs give exactly two clusters") {
        Rng rng(21);
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < 20; ++i) rows.push_back({0.1 * rng.normal(), 0.1 * rng.normal()});
        for (int i = 0; i < 20; ++i) rows.push_back({10.0 + 0.1 * rng.normal(), 0.1 * rng.normal()});
        auto e = make_set(rows);
        auto labels = density_cluster(e, 3, 1.0);
        std::set<int> distinct(labels.begin(), labels.end());
        CHECK(distinct == std::set<int>{0, 1});
        for (int i = 0; i < 20; ++i) CHECK(labels[i] == 0);
        for (int i = 20; i < 40; ++i) CHECK(labels[i] == 1);
    }
    SECTION("identical points form one cluster") {
        auto e = make_set({{1, 2}, {1, 2}, {1, 2}, {1, 2}});
        auto labels = density_cluster(e, 2, 0.5);
        for (int l : labels) CHECK(l == 0);
    }
    SECTION("min_cluster_size above n marks everything noise") {
        auto e = make_set({{0, 0}, {0.1, 0}, {0, 0.1}});
        auto labels = density_cluster(e, 5, 1.0);
        for (int l : labels) CHECK(l == -1);
    }
    SECTION("permutation invariant up to relabeling") {
        Rng rng(22);
        auto e = random_set(rng, 40, 2);
        auto base = density_cluster(e, 2, 1.5);

        std::vector<std::size_t> perm(e.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        EmbeddingSet shuffled;
        shuffled.vectors = Matrix(e.size(), e.dim());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.ids.push_back(e.ids[perm[i]]);
            for (std::size_t j = 0; j < e.dim(); ++j) shuffled.vectors(i, j) = e.vectors(perm[i], j);
        }
        auto moved = density_cluster(shuffled, 2, 1.5);
        // same partition: pairs agree on same-cluster/noise relations
        for (std::size_t i = 0; i < perm.size(); ++i) {
            CHECK((moved[i] == -1) == (base[perm[i]] == -1));
            for (std::size_t j = i + 1; j < perm.size(); ++j)
                CHECK((moved[i] == moved[j]) == (base[perm[i]] == base[perm[j]]));
        }
    }
    SECTION("parameter validation") {
        auto e = make_set({{0}, {1}});
        CHECK_THROWS_AS(density_cluster(e, 1, 1.0), ConfigError);
        CHECK_THROWS_AS(density_cluster(e, 2, 0.0), ConfigError);
    }
}

TEST_CASE("silhouette") {
    SECTION("matches the brute-force definition") {
        Rng rng(23);
        auto e = random_set(rng, 30, 3);
        std::vector<int> labels;
        for (std::size_t i = 0; i < 30; ++i) labels.push_back(static_cast<int>(rng.below(3)));
        CHECK(silhouette(e, labels) == Catch::Approx(silhouette_brute(e, labels)).margin(1e-12));
    }
    SECTION("coincident clusters score zero") {
        auto e = make_set({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
        CHECK(silhouette(e, {0, 0, 1, 1}) == 0.0);
    }
    SECTION("single cluster is undefined") {
        auto e = make_set({{1, 1}, {2, 2}});
        CHECK_THROWS_AS(silhouette(e, {0, 0}), UndefinedMetricError);
    }
}

TEST_CASE("accuracy") {
    CHECK(accuracy({"a", "b"}, {"a", "b"}) == 1.0);
    CHECK(accuracy({"a", "b"}, {"b", "a"}) == 0.0);
    CHECK_THROWS_AS(accuracy({"a"}, {"a", "b"}), DimensionError);

    SECTION("matches a counting oracle") {
        Rng rng(24);
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t n = 1 + rng.below(50);
            std::vector<std::string> p, t;
            std::size_t hits = 0;
            for (std::size_t i = 0; i < n; ++i) {
                std::string a = std::to_string(rng.below(3));
                std::string b = std::to_string(rng.below(3));
                p.push_back(a);
                t.push_back(b);
                if (a == b) ++hits;
            }
            CHECK(accuracy(p, t) == static_cast<double>(hits) / static_cast<double>(n));
        }
    }
}
