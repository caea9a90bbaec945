#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "attrseq/core/grad_check.hpp"
#include "attrseq/data/synthetic.hpp"
#include "attrseq/eval/metrics.hpp"
#include "attrseq/mlas/mlas.hpp"

using namespace attrseq;

namespace {

MlasConfig toy_config(FusionKind fusion, std::size_t u = 4, std::size_t r = 5,
                      std::size_t width = 4) {
    MlasConfig cfg;
    cfg.attr_width = u;
    cfg.vocab_size = r;
    cfg.att_hidden = width;
    cfg.seq_hidden = width;
    cfg.out_dim = width;
    cfg.fusion = fusion;
    return cfg;
}

AttributedSequence make_record(Vector attrs, std::vector<std::size_t> items, std::string label = "") {
    AttributedSequence rec;
    rec.id = "t";
    rec.attributes = std::move(attrs);
    rec.items = std::move(items);
    rec.label = std::move(label);
    return rec;
}

AttributedSequence random_record(Rng& rng, std::size_t u, std::size_t r, std::size_t len) {
    Vector attrs(u);
    for (auto& a : attrs) a = rng.uniform(0.1, 0.9);
    std::vector<std::size_t> items;
    for (std::size_t t = 0; t < len; ++t) items.push_back(rng.below(r));
    return make_record(attrs, items);
}

}  // namespace

TEST_CASE("contrastive loss pointwise values") {
    CHECK(contrastive_loss(0.3, 0, 1.0) == Catch::Approx(0.045).epsilon(1e-15));
    CHECK(contrastive_loss(1.2, 1, 1.0) == 0.0);
    CHECK(contrastive_loss(0.4, 1, 1.0) == Catch::Approx(0.18).epsilon(1e-15));
}

TEST_CASE("contrastive loss is continuous at the margin") {
    const double g = 1.0;
    const double eps = 1e-9;
    double below = contrastive_loss(g - eps, 1, g);
    double at = contrastive_loss(g, 1, g);
    double above = contrastive_loss(g + eps, 1, g);
    CHECK(at == 0.0);
    CHECK(below < 1e-15);
    CHECK(above == 0.0);
}

TEST_CASE("balanced fusion at zero parameters gives the sigmoid midpoint") {
    MlasModel m = MlasModel::zeros(toy_config(FusionKind::Balanced));
    auto rec = make_record(Vector{0.1, 0.2, 0.3, 0.4}, {1, 2});
    Vector z = mlas_embed(m, rec);
    REQUIRE(z.size() == 4);
    for (double v : z) CHECK(v == 0.5);
}

TEST_CASE("att-centric embedding width is independent of the sequence length") {
    Rng rng(3);
    MlasConfig cfg = toy_config(FusionKind::AttCentric, 4, 5, 3);
    MlasModel m = MlasModel::init(cfg, rng);
    auto short_rec = random_record(rng, 4, 5, 1);
    auto long_rec = random_record(rng, 4, 5, 9);
    CHECK(mlas_embed(m, short_rec).size() == 3);
    CHECK(mlas_embed(m, long_rec).size() == 3);
}

TEST_CASE("the three fusion designs give finite, distinct embeddings") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto rec = random_record(rng, 4, 5, 4);
        std::vector<Vector> embeddings;
        for (FusionKind kind : {FusionKind::Balanced, FusionKind::AttCentric, FusionKind::SeqCentric}) {
            Rng mrng(100 + seed);
            MlasModel m = MlasModel::init(toy_config(kind), mrng);
            Vector z = mlas_embed(m, rec);
            z.check_finite();
            embeddings.push_back(z);
        }
        CHECK_FALSE(embeddings[0] == embeddings[1]);
        CHECK_FALSE(embeddings[0] == embeddings[2]);
        CHECK_FALSE(embeddings[1] == embeddings[2]);
    }
}

TEST_CASE("the metric is the Euclidean norm of the embedding difference") {
    // stubbed embeddings (0,0) vs (3,4)
    CHECK(norm2(sub(Vector{0.0, 0.0}, Vector{3.0, 4.0})) == 5.0);
    CHECK(contrastive_loss(5.0, 0, 1.0) == 12.5);
}

TEST_CASE("pair distance axioms") {
    Rng rng(5);
    MlasModel m = MlasModel::init(toy_config(FusionKind::Balanced), rng);
    auto a = random_record(rng, 4, 5, 3);
    auto b = random_record(rng, 4, 5, 5);

    CHECK(pair_distance(m, a, a) == 0.0);
    double ab = pair_distance(m, a, b);
    double ba = pair_distance(m, b, a);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);

    // triangle inequality over random triples of embeddings
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_record(rng, 4, 5, 2 + rng.below(4));
        auto y = random_record(rng, 4, 5, 2 + rng.below(4));
        auto z = random_record(rng, 4, 5, 2 + rng.below(4));
        CHECK(pair_distance(m, x, z) <= pair_distance(m, x, y) + pair_distance(m, y, z) + 1e-12);
    }
}

TEST_CASE("pair gradient matches finite differences for every fusion design") {
    for (FusionKind kind : {FusionKind::Balanced, FusionKind::AttCentric, FusionKind::SeqCentric}) {
        for (std::uint64_t seed = 0; seed < 2; ++seed) {
            Rng rng(40 + seed);
            MlasModel m = MlasModel::init(toy_config(kind), rng);
            auto left = random_record(rng, 4, 5, 3);
            auto right = random_record(rng, 4, 5, 4);
            int label = static_cast<int>(seed % 2);

            MlasModel grads = MlasModel::zeros(m.cfg);
            mlas_pair_grad(m, left, right, label, grads);
            auto loss = [&] {
                return contrastive_loss(pair_distance(m, left, right), label, m.cfg.margin);
            };
            double err = grad_check(loss, m.refs(), grads.refs(), 1e-6);
            INFO(fusion_name(kind) << " seed " << seed << " label " << label);
            CHECK(err < 1e-4);
        }
    }
}

TEST_CASE("surrogate distance gradient differs from the exact one") {
    Rng rng(7);
    MlasConfig cfg = toy_config(FusionKind::Balanced);
    cfg.dist_grad = DistanceGradient::Surrogate;
    MlasModel m = MlasModel::init(cfg, rng);
    auto left = random_record(rng, 4, 5, 3);
    auto right = random_record(rng, 4, 5, 3);

    MlasModel g_sur = MlasModel::zeros(cfg);
    mlas_pair_grad(m, left, right, 0, g_sur);
    m.cfg.dist_grad = DistanceGradient::Exact;
    MlasModel g_ex = MlasModel::zeros(m.cfg);
    mlas_pair_grad(m, left, right, 0, g_ex);
    CHECK_FALSE(flatten_values(g_sur.refs()) == flatten_values(g_ex.refs()));
}

TEST_CASE("mlas_train with zero iterations leaves the model unchanged") {
    Rng rng(8);
    Dataset ds = generate_synthetic(rng, 2, 6, 4, 6, 2, 4, 0.1);
    Rng frng(9);
    auto pairs = make_feedback(ds, frng, 6);
    Rng mrng(10);
    MlasModel m = MlasModel::init(toy_config(FusionKind::Balanced, 4, 6), mrng);
    auto before = flatten_values(m.refs());
    Rng trng(11);
    mlas_train(m, ds, pairs, 0.05, 0, 1e-9, trng);
    CHECK(flatten_values(m.refs()) == before);
}

TEST_CASE("metric learning after pre-training contracts similar pairs and separates classes") {
    int contracted = 0, separated = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig dcfg;
        dcfg.n_classes = 2;
        dcfg.per_class = 20;
        dcfg.attr_width = 5;
        dcfg.vocab_size = 8;
        dcfg.len_min = 3;
        dcfg.len_max = 6;
        dcfg.noise = 0.05;
        Rng drng(500 + seed);
        Dataset ds = generate_synthetic(drng, dcfg);
        Rng frng(600 + seed);
        auto pairs = make_feedback(ds, frng, 60);

        Rng mrng(700 + seed);
        MlasModel m = MlasModel::init(toy_config(FusionKind::Balanced, 5, 8, 6), mrng);
        Rng prng(900 + seed);
        mlas_pretrain(m, ds, 0.5, 10, 0.5, prng);

        auto mean_distances = [&] {
            auto index = ds.index_by_id();
            double sim = 0.0, dis = 0.0;
            std::size_t n_sim = 0, n_dis = 0;
            for (const auto& p : pairs) {
                double d = pair_distance(m, ds.records[index[p.left_id]], ds.records[index[p.right_id]]);
                if (p.label == 0) {
                    sim += d;
                    ++n_sim;
                } else {
                    dis += d;
                    ++n_dis;
                }
            }
            return std::pair{sim / n_sim, dis / n_dis};
        };

        auto [sim_before, dis_before] = mean_distances();
        Rng trng(800 + seed);
        mlas_train(m, ds, pairs, 0.1, 10, 0.0, trng);
        auto [sim_after, dis_after] = mean_distances();

        if (sim_after < sim_before) ++contracted;
        if (dis_after > sim_after) ++separated;
    }
    CHECK(contracted >= 4);
    CHECK(separated >= 4);
}

TEST_CASE("pretraining lowers the initial metric-learning loss against a cold start") {
    int lower = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng drng(500 + seed);
        SyntheticConfig dcfg;
        dcfg.n_classes = 2;
        dcfg.per_class = 20;
        dcfg.attr_width = 5;
        dcfg.vocab_size = 8;
        dcfg.len_min = 3;
        dcfg.len_max = 6;
        dcfg.noise = 0.05;
        Dataset ds = generate_synthetic(drng, dcfg);
        Rng frng(600 + seed);
        auto pairs = make_feedback(ds, frng, 60);
        MlasConfig cfg = toy_config(FusionKind::Balanced, 5, 8, 6);

        auto initial_loss = [&](bool pretrained) {
            Rng mrng(700 + seed);
            MlasModel m = MlasModel::init(cfg, mrng);
            if (pretrained) {
                Rng prng(900 + seed);
                mlas_pretrain(m, ds, 0.5, 10, 0.5, prng);
            }
            auto index = ds.index_by_id();
            double sum = 0.0;
            for (const auto& p : pairs)
                sum += contrastive_loss(
                    pair_distance(m, ds.records[index[p.left_id]], ds.records[index[p.right_id]]),
                    p.label, cfg.margin);
            return sum / static_cast<double>(pairs.size());
        };
        if (initial_loss(true) < initial_loss(false)) ++lower;
    }
    CHECK(lower >= 4);
}

TEST_CASE("with full attribute weight the sequence decoder head receives no gradient") {
    Rng rng(20);
    MlasConfig cfg = toy_config(FusionKind::Balanced, 4, 6);
    MlasModel m = MlasModel::init(cfg, rng);
    PretrainHeads heads = PretrainHeads::init(cfg, rng);
    auto rec = random_record(rng, 4, 6, 4);

    MlasModel grads = MlasModel::zeros(cfg);
    PretrainHeads head_grads = PretrainHeads::zeros(cfg);
    mlas_pretrain_grad(m, heads, rec, 1.0, grads, head_grads);
    for (double v : head_grads.w_seq.raw()) CHECK(v == 0.0);
    for (double v : head_grads.b_seq.raw()) CHECK(v == 0.0);
    // and the attribute head does learn
    double total = 0.0;
    for (double v : head_grads.w_att.raw()) total += std::abs(v);
    CHECK(total > 0.0);
}

TEST_CASE("pretraining") {
    Rng drng(12);
    Dataset ds = generate_synthetic(drng, 2, 8, 4, 6, 2, 4, 0.1);

    SECTION("zero epochs is a no-op") {
        Rng mrng(13);
        MlasModel m = MlasModel::init(toy_config(FusionKind::Balanced, 4, 6), mrng);
        auto before = flatten_values(m.refs());
        Rng prng(14);
        mlas_pretrain(m, ds, 0.5, 0, 0.05, prng);
        CHECK(flatten_values(m.refs()) == before);
    }

    SECTION("omega outside [0,1] is rejected") {
        Rng mrng(15);
        MlasModel m = MlasModel::init(toy_config(FusionKind::Balanced, 4, 6), mrng);
        Rng prng(16);
        CHECK_THROWS_AS(mlas_pretrain(m, ds, 1.5, 1, 0.05, prng), ConfigError);
    }

    SECTION("pretraining changes the parameters deterministically") {
        Rng m1(17), m2(17);
        MlasModel a = MlasModel::init(toy_config(FusionKind::Balanced, 4, 6), m1);
        MlasModel b = MlasModel::init(toy_config(FusionKind::Balanced, 4, 6), m2);
        Rng p1(18), p2(18);
        mlas_pretrain(a, ds, 0.5, 2, 0.05, p1);
        mlas_pretrain(b, ds, 0.5, 2, 0.05, p2);
        CHECK(flatten_values(a.refs()) == flatten_values(b.refs()));
    }
}

TEST_CASE("mlas_embed is deterministic and d-wide") {
    Rng rng(19);
    MlasModel m = MlasModel::init(toy_config(FusionKind::SeqCentric, 4, 5, 6), rng);
    auto rec = random_record(rng, 4, 5, 4);
    Vector a = mlas_embed(m, rec);
    Vector b = mlas_embed(m, rec);
    CHECK(a == b);
    CHECK(a.size() == 6);

    auto clone = rec;
    clone.id = "other";
    CHECK(mlas_embed(m, clone) == a);
}
