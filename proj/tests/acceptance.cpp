// Acceptance suite: nine go/no-go checks over the whole toolkit, one
// pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "attrseq/amas/amas.hpp"
#include "attrseq/core/grad_check.hpp"
#include "attrseq/data/split.hpp"
#include "attrseq/data/synthetic.hpp"
#include "attrseq/eval/metrics.hpp"
#include "attrseq/io/checkpoint.hpp"
#include "attrseq/mlas/mlas.hpp"
#include "attrseq/nas/nas.hpp"
#include "attrseq/olas/olas.hpp"

using namespace attrseq;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AttributedSequence random_record(Rng& rng, std::size_t u, std::size_t r, std::size_t len,
                                 std::string label = "") {
    AttributedSequence rec;
    rec.id = "q";
    rec.label = std::move(label);
    rec.attributes = Vector(u);
    for (auto& a : rec.attributes) a = rng.uniform(0.1, 0.9);
    for (std::size_t t = 0; t < len; ++t) rec.items.push_back(rng.below(r));
    return rec;
}

// ------------------------------------------------------------ criterion 1 ---

void criterion_gradients() {
    auto t0 = std::chrono::steady_clock::now();
    const double tol = 1e-4;
    const double eps = 1e-6;
    std::map<std::string, double> worst;

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        const std::size_t u = 2 + rng.below(5);   // <= 6
        const std::size_t r = 2 + rng.below(5);   // <= 6
        const std::size_t d = 2 + rng.below(5);   // <= 6
        const std::size_t len = 1 + rng.below(5); // <= 5

        {
            NasConfig cfg;
            cfg.attr_width = u;
            cfg.vocab_size = r;
            cfg.embed_dim = d;
            NasModel m = NasModel::init(cfg, rng);
            auto rec = random_record(rng, u, r, len);
            NasModel grads = NasModel::zeros(cfg);
            nas_joint_grad(m, rec, grads);
            auto loss = [&] {
                auto [la, ls] = nas_losses(m, rec);
                return la + ls;
            };
            worst["nas"] = std::max(worst["nas"], grad_check(loss, m.refs(), grads.refs(), eps));
        }

        for (FusionKind kind :
             {FusionKind::Balanced, FusionKind::AttCentric, FusionKind::SeqCentric}) {
            MlasConfig cfg;
            cfg.attr_width = u;
            cfg.vocab_size = r;
            cfg.att_hidden = d;
            cfg.seq_hidden = d;
            cfg.out_dim = d;
            cfg.fusion = kind;
            MlasModel m = MlasModel::init(cfg, rng);
            auto left = random_record(rng, u, r, len);
            auto right = random_record(rng, u, r, 1 + rng.below(5));
            int label = static_cast<int>(rng.below(2));
            MlasModel grads = MlasModel::zeros(cfg);
            mlas_pair_grad(m, left, right, label, grads);
            auto loss = [&] {
                return contrastive_loss(pair_distance(m, left, right), label, cfg.margin);
            };
            std::string key = std::string("mlas-") + fusion_name(kind);
            worst[key] = std::max(worst[key], grad_check(loss, m.refs(), grads.refs(), eps));
        }

        {
            OlasConfig cfg;
            cfg.attr_width = u;
            cfg.vocab_size = r;
            cfg.fc_depth = 2;
            cfg.fc_hidden = d;
            cfg.lstm_hidden = d;
            cfg.feature_dim = d;
            OlasModel m = OlasModel::init(cfg, rng);
            auto left = random_record(rng, u, r, len);
            auto right = random_record(rng, u, r, 1 + rng.below(5));
            int label = static_cast<int>(rng.below(2));
            OlasModel grads = OlasModel::zeros(cfg);
            olas_pair_grad(m, left, right, label, grads);
            auto loss = [&] { return olas_pair_loss(m, left, right, label); };
            worst["olas"] = std::max(worst["olas"], grad_check(loss, m.refs(), grads.refs(), eps));
        }

        for (AmasVariant variant : {AmasVariant::ASA, AmasVariant::ASHA}) {
            AmasConfig cfg;
            cfg.attr_width = u;
            cfg.vocab_size = r;
            cfg.n_classes = 2 + rng.below(3);
            cfg.att_hidden = d;
            cfg.lstm_hidden = d;
            cfg.variant = variant;
            AmasModel m = AmasModel::init(cfg, rng);
            auto rec = random_record(rng, u, r, len);
            std::size_t truth = rng.below(cfg.n_classes);
            AmasModel grads = AmasModel::zeros(cfg);
            amas_grad(m, rec, truth, grads);  // dropout off
            auto loss = [&] { return amas_loss(m, rec, truth); };
            std::string key = std::string("amas-") + amas_variant_name(variant);
            worst[key] = std::max(worst[key], grad_check(loss, m.refs(), grads.refs(), eps));
        }
    }

    double overall = 0.0;
    std::ostringstream detail;
    for (auto& [name, err] : worst) {
        overall = std::max(overall, err);
        detail << name << " " << err << "  ";
    }
    double elapsed = seconds_since(t0);
    detail << "(" << elapsed << "s)";
    report(1, "gradient fidelity < 1e-4 over 20 seeds", overall < tol && elapsed < 120.0,
           detail.str());
}

// ------------------------------------------------------------ criterion 2 ---

void criterion_loss_descent() {
    auto t0 = std::chrono::steady_clock::now();
    int nas_ok = 0, mlas_ok = 0, olas_ok = 0, amas_ok = 0;

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig dcfg;
        dcfg.n_classes = 2;
        dcfg.per_class = 30;
        dcfg.attr_width = 5;
        dcfg.vocab_size = 8;
        dcfg.len_min = 3;
        dcfg.len_max = 6;
        dcfg.noise = 0.1;
        Rng drng(2000 + seed);
        Dataset ds = generate_synthetic(drng, dcfg);
        Rng frng(2100 + seed);
        auto pairs = make_feedback(ds, frng, 60);

        {
            NasConfig cfg;
            cfg.attr_width = 5;
            cfg.vocab_size = 8;
            cfg.embed_dim = 6;
            Rng mrng(2200 + seed);
            NasModel m = NasModel::init(cfg, mrng);
            auto h = nas_train(m, ds, 0.03, 1, 1, 0.0, 0.0, 5);
            double first = h.mean_attribute_loss.front() + h.mean_sequence_loss.front();
            double last = h.mean_attribute_loss.back() + h.mean_sequence_loss.back();
            if (last < first) ++nas_ok;
        }
        {
            MlasConfig cfg;
            cfg.attr_width = 5;
            cfg.vocab_size = 8;
            cfg.att_hidden = 6;
            cfg.seq_hidden = 6;
            cfg.out_dim = 6;
            Rng mrng(2300 + seed);
            MlasModel m = MlasModel::init(cfg, mrng);
            Rng trng(2400 + seed);
            auto h = mlas_train(m, ds, pairs, 0.1, 5, 0.0, trng);
            if (h.mean_loss.back() < h.mean_loss.front()) ++mlas_ok;
        }
        {
            OlasConfig cfg;
            cfg.attr_width = 5;
            cfg.vocab_size = 8;
            cfg.fc_depth = 2;
            cfg.fc_hidden = 6;
            cfg.lstm_hidden = 6;
            cfg.feature_dim = 6;
            Rng mrng(2500 + seed);
            OlasModel m = OlasModel::init(cfg, mrng);
            auto h = olas_train(m, ds, pairs, 0.05, 5, 0.0);
            if (h.mean_loss.back() < h.mean_loss.front()) ++olas_ok;
        }
        {
            SyntheticConfig c5 = dcfg;
            c5.n_classes = 5;
            c5.per_class = 20;
            Rng d5(2600 + seed);
            Dataset ds5 = generate_synthetic(d5, c5);
            AmasConfig cfg;
            cfg.attr_width = 5;
            cfg.vocab_size = 8;
            cfg.n_classes = 5;
            cfg.att_hidden = 6;
            cfg.lstm_hidden = 6;
            cfg.variant = AmasVariant::ASA;
            Rng mrng(2700 + seed);
            AmasModel m = AmasModel::init(cfg, mrng);
            m.classes = ds5.class_labels();
            AmasTrainConfig tc;
            tc.epochs = 5;
            tc.rho = 0.01;
            Rng trng(2800 + seed);
            auto result = amas_train(m, ds5, tc, trng);
            if (result.history.back().train_loss < result.history.front().train_loss) ++amas_ok;
        }
    }

    std::ostringstream detail;
    double elapsed = seconds_since(t0);
    detail << "nas " << nas_ok << "/5, mlas " << mlas_ok << "/5, olas " << olas_ok << "/5, amas "
           << amas_ok << "/5 (" << elapsed << "s)";
    report(2, "loss descent after 5 epochs in >= 4 of 5 seeds",
           nas_ok >= 4 && mlas_ok >= 4 && olas_ok >= 4 && amas_ok >= 4 && elapsed < 300.0,
           detail.str());
}

// ------------------------------------------------------------ criterion 3 ---

void criterion_nas_dependency() {
    int conditioned_pos = 0, ablation_low = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig cfg;
        cfg.n_classes = 3;
        cfg.per_class = 12;
        cfg.attr_width = 6;
        cfg.vocab_size = 8;
        cfg.len_min = 3;
        cfg.len_max = 3;
        cfg.shared_chain = true;  // class signal only in the attributes
        cfg.attr_jitter = 0.02;
        cfg.chain_sharpness = 256.0;
        Rng drng(3000 + seed);
        Dataset ds = generate_synthetic(drng, cfg);

        auto silhouette_of = [&](bool conditioned) {
            NasConfig mc;
            mc.attr_width = 6;
            mc.vocab_size = 8;
            mc.embed_dim = 8;
            mc.conditioned = conditioned;
            Rng mrng(3100 + seed);
            NasModel m = NasModel::init(mc, mrng);
            nas_train(m, ds, 0.05, 6, 1, 0.0, 0.0, 2);
            EmbeddingSet emb;
            emb.vectors = Matrix(ds.records.size(), mc.embed_dim);
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < ds.records.size(); ++i) {
                emb.ids.push_back(ds.records[i].id);
                Vector e = nas_embed(m, ds.records[i]);
                for (std::size_t j = 0; j < e.size(); ++j) emb.vectors(i, j) = e[j];
                labels.push_back(ds.records[i].label);
            }
            return silhouette(emb, labels_to_ints(labels));
        };

        if (silhouette_of(true) > 0.0) ++conditioned_pos;
        if (silhouette_of(false) <= 0.1) ++ablation_low;
    }
    std::ostringstream detail;
    detail << "conditioned>0: " << conditioned_pos << "/5, ablation<=0.1: " << ablation_low << "/5";
    report(3, "attribute conditioning separates classes", conditioned_pos >= 4 && ablation_low >= 4,
           detail.str());
}

// ------------------------------------------------------------ criterion 4 ---

void criterion_mlas_separation() {
    int ratio_ok = 0, nmi_ok = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig dcfg;
        dcfg.n_classes = 2;
        dcfg.per_class = 25;
        dcfg.attr_width = 5;
        dcfg.vocab_size = 8;
        dcfg.len_min = 3;
        dcfg.len_max = 6;
        dcfg.noise = 0.05;
        Rng drng(4000 + seed);
        Dataset ds = generate_synthetic(drng, dcfg);
        Rng frng(4100 + seed);
        auto pairs = make_feedback(ds, frng, 100);

        MlasConfig cfg;
        cfg.attr_width = 5;
        cfg.vocab_size = 8;
        cfg.att_hidden = 6;
        cfg.seq_hidden = 6;
        cfg.out_dim = 6;
        Rng mrng(4200 + seed);
        MlasModel m = MlasModel::init(cfg, mrng);
        Rng prng(4300 + seed);
        mlas_pretrain(m, ds, 0.5, 10, 0.5, prng);
        Rng trng(4400 + seed);
        mlas_train(m, ds, pairs, 0.1, 12, 0.0, trng);

        auto index = ds.index_by_id();
        double sim = 0.0, dis = 0.0;
        std::size_t n_sim = 0, n_dis = 0;
        for (const auto& p : pairs) {
            double d =
                pair_distance(m, ds.records[index[p.left_id]], ds.records[index[p.right_id]]);
            if (p.label == 0) {
                sim += d;
                ++n_sim;
            } else {
                dis += d;
                ++n_dis;
            }
        }
        sim /= static_cast<double>(n_sim);
        dis /= static_cast<double>(n_dis);
        if (dis >= 2.0 * sim) ++ratio_ok;

        EmbeddingSet emb;
        emb.vectors = Matrix(ds.records.size(), cfg.out_dim);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            emb.ids.push_back(ds.records[i].id);
            Vector e = mlas_embed(m, ds.records[i]);
            for (std::size_t j = 0; j < e.size(); ++j) emb.vectors(i, j) = e[j];
            labels.push_back(ds.records[i].label);
        }
        auto clusters = density_cluster(emb, 5, 0.3);
        double score = nmi(clusters, labels_to_ints(labels));
        if (score >= 0.8) ++nmi_ok;
    }
    std::ostringstream detail;
    detail << "ratio>=2: " << ratio_ok << "/5, nmi>=0.8: " << nmi_ok << "/5";
    report(4, "metric learning separates planted clusters", ratio_ok >= 4 && nmi_ok >= 4,
           detail.str());
}

// ------------------------------------------------------------ criterion 5 ---

void criterion_olas_oneshot() {
    int acc_ok = 0;
    bool sanity_exact = true;
    double min_acc = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig dcfg;
        dcfg.n_classes = 10;  // 6 training / 4 one-shot
        dcfg.per_class = 51;  // 4 classes x (1 gallery + 50 queries) = 200 queries
        dcfg.attr_width = 6;
        dcfg.vocab_size = 20;
        dcfg.len_min = 5;
        dcfg.len_max = 8;
        dcfg.noise = 0.1;
        dcfg.attr_jitter = 0.02;
        dcfg.chain_sharpness = 96.0;
        Rng drng(5000 + seed);
        Dataset ds = generate_synthetic(drng, dcfg);
        Rng srng(5100 + seed);
        auto [train, oneshot] = split_classes_for_oneshot(ds, 0.6, srng);

        Rng frng(5200 + seed);
        auto triplets = make_feedback(train, frng, 120);
        OlasConfig cfg;
        cfg.attr_width = 6;
        cfg.vocab_size = 20;
        cfg.fc_depth = 2;
        cfg.fc_hidden = 16;
        cfg.lstm_hidden = 16;
        cfg.feature_dim = 16;
        Rng mrng(5300 + seed);
        OlasModel m = OlasModel::init(cfg, mrng);
        olas_train(m, train, triplets, 0.05, 8, 0.0);

        Gallery gallery;
        std::vector<AttributedSequence> queries;
        std::map<std::string, bool> taken;
        for (const auto& rec : oneshot.records) {
            if (!taken[rec.label]) {
                gallery.entries.push_back({rec, rec.label});
                taken[rec.label] = true;
            } else if (queries.size() < 200) {
                queries.push_back(rec);
            }
        }
        auto report_q = oneshot_eval(m, gallery, queries);
        min_acc = std::min(min_acc, report_q.accuracy);
        if (report_q.accuracy >= 0.9) ++acc_ok;

        std::vector<AttributedSequence> gallery_queries;
        for (const auto& [rec, label] : gallery.entries) gallery_queries.push_back(rec);
        if (oneshot_eval(m, gallery, gallery_queries).accuracy != 1.0) sanity_exact = false;
    }
    std::ostringstream detail;
    detail << "accuracy>=0.9: " << acc_ok << "/5 (min " << min_acc << "), gallery sanity "
           << (sanity_exact ? "exact" : "broken");
    report(5, "one-shot accuracy on 4 unseen classes", acc_ok >= 4 && sanity_exact, detail.str());
}

// ------------------------------------------------------------ criterion 6 ---

void criterion_amas() {
    bool schedule_exact = true;
    for (double lambda : {1.0, 1.001, 1.005, 1.01}) {
        auto counts = adaptive_sample_counts(1000, lambda, 30);
        long double running = 1000.0L;  // independent route: repeated multiplication
        for (std::size_t tau = 0; tau < counts.size(); ++tau) {
            auto expect = static_cast<std::size_t>(std::floor(static_cast<double>(running)));
            if (counts[tau] != std::max<std::size_t>(1, expect)) schedule_exact = false;
            running *= lambda;
        }
    }

    SyntheticConfig dcfg;
    dcfg.n_classes = 5;
    dcfg.per_class = 30;
    dcfg.attr_width = 6;
    dcfg.vocab_size = 10;
    dcfg.len_min = 3;
    dcfg.len_max = 6;
    dcfg.noise = 0.1;
    Rng drng(6000);
    Dataset ds = generate_synthetic(drng, dcfg);

    AmasConfig cfg;
    cfg.attr_width = 6;
    cfg.vocab_size = 10;
    cfg.n_classes = 5;
    cfg.att_hidden = 8;
    cfg.lstm_hidden = 8;
    cfg.variant = AmasVariant::ASA;
    Rng mrng(6100);
    AmasModel m = AmasModel::init(cfg, mrng);
    m.classes = ds.class_labels();
    AmasTrainConfig tc;
    tc.epochs = 20;
    tc.rho = 0.01;
    Rng trng(6200);
    amas_train(m, ds, tc, trng);

    double top1 = topk_accuracy(m, ds, 1);
    double top5 = topk_accuracy(m, ds, 5);
    std::ostringstream detail;
    detail << "schedule " << (schedule_exact ? "exact" : "WRONG") << ", top-1 " << top1 << ", top-5 "
           << top5;
    report(6, "adaptive sampling exact, top-1 >= 0.8, top-5 = 1.0",
           schedule_exact && top1 >= 0.8 && top5 == 1.0, detail.str());
}

// ------------------------------------------------------------ criterion 7 ---

void criterion_metric_oracles() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(7000);
    double worst = 0.0;
    bool ok = true;

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 10 + rng.below(91);  // <= 100
        const std::size_t d = 2 + rng.below(3);
        EmbeddingSet emb;
        emb.vectors = Matrix(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            emb.ids.push_back("p" + std::to_string(i));
            for (std::size_t j = 0; j < d; ++j) emb.vectors(i, j) = rng.uniform(-2, 2);
        }

        // knn vs full-sort brute force
        std::size_t k = 1 + rng.below(std::min<std::size_t>(n - 1, 8));
        auto fast = knn_outlier_scores(emb, k);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> dists;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) dists.push_back(row_distance(emb.vectors, i, j));
            std::sort(dists.begin(), dists.end());
            worst = std::max(worst, std::abs(fast[i] - dists[k - 1]));
        }

        // auc vs pairwise comparison oracle
        std::vector<double> scores;
        std::vector<int> labels;
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(static_cast<double>(rng.below(10)));
            labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
            (labels.back() ? pos : neg) = true;
        }
        if (pos && neg) {
            double wins = 0.0;
            std::size_t np = 0, nn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!labels[i]) continue;
                ++np;
                for (std::size_t j = 0; j < n; ++j) {
                    if (labels[j]) continue;
                    wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
                }
            }
            nn = n - np;
            worst = std::max(worst, std::abs(roc_auc(scores, labels) -
                                             wins / (static_cast<double>(np) * static_cast<double>(nn))));
        }

        // nmi vs direct plug-in computation
        std::vector<int> a, b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(static_cast<int>(rng.below(4)));
            b.push_back(static_cast<int>(rng.below(3)));
        }
        {
            std::map<int, double> pa, pb;
            std::map<std::pair<int, int>, double> pab;
            for (std::size_t i = 0; i < n; ++i) {
                pa[a[i]] += 1.0;
                pb[b[i]] += 1.0;
                pab[{a[i], b[i]}] += 1.0;
            }
            double nn = static_cast<double>(n), ha = 0, hb = 0, mi = 0;
            for (auto& [key, c] : pa) ha -= c / nn * std::log(c / nn);
            for (auto& [key, c] : pb) hb -= c / nn * std::log(c / nn);
            for (auto& [key, c] : pab)
                mi += c / nn * std::log((c / nn) / ((pa[key.first] / nn) * (pb[key.second] / nn)));
            double expect = (ha == 0.0 && hb == 0.0) ? 1.0 : mi / (0.5 * (ha + hb));
            expect = std::clamp(expect, 0.0, 1.0);
            worst = std::max(worst, std::abs(nmi(a, b) - expect));
        }

        // silhouette vs the textbook definition (when two clusters exist)
        std::vector<int> sl;
        std::map<int, std::size_t> counts;
        for (std::size_t i = 0; i < n; ++i) {
            sl.push_back(static_cast<int>(rng.below(3)));
            counts[sl.back()]++;
        }
        if (counts.size() >= 2) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[sl[i]] == 1) continue;
                std::map<int, double> sums;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) sums[sl[j]] += row_distance(emb.vectors, i, j);
                double av = sums[sl[i]] / static_cast<double>(counts[sl[i]] - 1);
                double bv = std::numeric_limits<double>::infinity();
                for (auto& [label, s] : sums)
                    if (label != sl[i]) bv = std::min(bv, s / static_cast<double>(counts[label]));
                double mx = std::max(av, bv);
                total += mx > 0.0 ? (bv - av) / mx : 0.0;
            }
            worst = std::max(worst, std::abs(silhouette(emb, sl) - total / static_cast<double>(n)));
        }

        // accuracy vs counting (must be exact)
        std::vector<std::string> preds, truths;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            preds.push_back(std::to_string(rng.below(3)));
            truths.push_back(std::to_string(rng.below(3)));
            if (preds.back() == truths.back()) ++hits;
        }
        if (accuracy(preds, truths) != static_cast<double>(hits) / static_cast<double>(n)) ok = false;
    }

    double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "max deviation " << worst << " (" << elapsed << "s)";
    report(7, "metrics match brute-force oracles within 1e-9", ok && worst < 1e-9 && elapsed < 60.0,
           detail.str());
}

// ------------------------------------------------------------ criterion 8 ---

int run_in(const fs::path& cwd, const std::string& args) {
    std::string cmd = "cd " + cwd.string() + " && " + std::string(ATTRSEQ_CLI_PATH) + " " + args +
                      " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    bool ok = true;
    std::string detail;

    auto chain = [&](const std::string& tag) {
        fs::path base = fs::temp_directory_path() / ("attrseq_accept_" + tag);
        fs::remove_all(base);
        fs::create_directories(base);
        ok = ok && run_in(base, "generate --out gen --seed 42 --n-classes 3 --per-class 10"
                                " --attr-width 4 --vocab-size 8 --len-min 3 --len-max 5"
                                " --noise 0.1 --n-pairs 20") == 0;
        ok = ok && run_in(base, "train --framework nas --data gen/dataset.jsonl --out train"
                                " --seed 7 --dim 5 --epochs 2 --lr 0.02") == 0;
        ok = ok && run_in(base, "embed --checkpoint train/model.ckpt --data gen/dataset.jsonl"
                                " --out embed") == 0;
        ok = ok && run_in(base, "eval --data gen/dataset.jsonl"
                                " --embeddings nas=embed/embeddings.csv --out eval"
                                " --k 3 --min-cluster-size 3 --radius 0.4") == 0;
        return base;
    };

    fs::path a = chain("a");
    fs::path b = chain("b");
    std::size_t compared = 0;
    if (ok) {
        for (const char* stage : {"gen", "train", "embed", "eval"}) {
            for (const auto& entry : fs::directory_iterator(a / stage)) {
                if (!entry.is_regular_file()) continue;
                fs::path other = b / stage / entry.path().filename();
                if (!fs::exists(other) || read_bytes(entry.path()) != read_bytes(other)) {
                    ok = false;
                    detail += "mismatch at " + entry.path().string() + "; ";
                }
                ++compared;
            }
        }
    }

    bool roundtrip = false;
    if (ok) {
        fs::path original = a / "train" / "model.ckpt";
        LoadedCheckpoint ck = load_checkpoint(original.string());
        NasModel m = load_nas(ck);
        fs::path copy = a / "train" / "model_rt.ckpt";
        save_checkpoint(copy.string(), ck.framework, ck.hyper, ck.vocab, ck.attr_schema, m.refs());
        roundtrip = read_bytes(original) == read_bytes(copy);
        if (!roundtrip) detail += "checkpoint round-trip differs; ";
    }

    std::ostringstream d;
    d << compared << " artifacts byte-compared, checkpoint round-trip "
      << (roundtrip ? "bitwise" : "broken") << ". " << detail;
    report(8, "end-to-end determinism and lossless persistence", ok && roundtrip, d.str());
}

// ------------------------------------------------------------ criterion 9 ---

void criterion_pointwise_losses() {
    bool ok = true;
    // pairwise-feedback loss (margin g)
    ok = ok && contrastive_loss(0.3, 0, 1.0) == 0.5 * 0.3 * 0.3;
    ok = ok && contrastive_loss(1.2, 1, 1.0) == 0.0;
    ok = ok && contrastive_loss(0.4, 1, 1.0) == 0.5 * 0.6 * 0.6;
    // one-shot loss (margin xi)
    ok = ok && olas_pair_loss_value(0.0, 0, 1.0) == 0.0;
    ok = ok && olas_pair_loss_value(1.5, 1, 1.0) == 0.0;
    ok = ok && olas_pair_loss_value(0.5, 1, 1.0) == 0.125;

    // continuity at the margin from both sides
    bool continuous = true;
    for (double margin : {0.7, 1.0, 2.5}) {
        for (double delta : {1e-6, 1e-9, 1e-12}) {
            continuous = continuous && contrastive_loss(margin - delta, 1, margin) <= 0.5 * delta * delta + 1e-18;
            continuous = continuous && contrastive_loss(margin + delta, 1, margin) == 0.0;
            continuous = continuous && olas_pair_loss_value(margin - delta, 1, margin) <= 0.5 * delta * delta + 1e-18;
            continuous = continuous && olas_pair_loss_value(margin + delta, 1, margin) == 0.0;
        }
    }
    report(9, "contrastive losses evaluate exactly and are continuous at the margin",
           ok && continuous, ok ? (continuous ? "all pointwise cases exact" : "margin discontinuity")
                                : "pointwise mismatch");
}

}  // namespace

int main() {
    criterion_gradients();
    criterion_loss_descent();
    criterion_nas_dependency();
    criterion_mlas_separation();
    criterion_olas_oneshot();
    criterion_amas();
    criterion_metric_oracles();
    criterion_determinism();
    criterion_pointwise_losses();

    if (failures == 0) {
        std::printf("acceptance: all 9 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
}
