// Command-line pipelines over the attributed-sequence toolkit: synthetic
// data generation, training for all four frameworks, embedding / labeling /
// classification, metric sweeps, and checkpoint inspection.
//
// Exit codes: 0 ok, 2 usage or config error, 3 numerical failure, 4 I/O or
// data-format error.
//
// All randomness flows from --seed. Substreams are derived by fixed tags:
//   1 data generation, 2 model init, 3 training, 4 feedback, 5 splits.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attrseq/amas/amas.hpp"
#include "attrseq/core/rng.hpp"
#include "attrseq/data/feedback.hpp"
#include "attrseq/data/jsonl.hpp"
#include "attrseq/data/split.hpp"
#include "attrseq/data/synthetic.hpp"
#include "attrseq/eval/metrics.hpp"
#include "attrseq/eval/report.hpp"
#include "attrseq/io/checkpoint.hpp"
#include "attrseq/mlas/mlas.hpp"
#include "attrseq/nas/nas.hpp"
#include "attrseq/olas/olas.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace attrseq;

namespace {

constexpr std::uint64_t kStreamData = 1;
constexpr std::uint64_t kStreamModel = 2;
constexpr std::uint64_t kStreamTrain = 3;
constexpr std::uint64_t kStreamFeedback = 4;
constexpr std::uint64_t kStreamSplit = 5;

// ---------------------------------------------------------------- config ---

/// Config file + CLI override resolution. Values from --config fill in any
/// flag the user did not pass on the command line; unknown config keys are
/// rejected. The resolved values are recorded per run.
struct RunConfig {
    CLI::App* cmd = nullptr;
    json file = json::object();
    json resolved = json::object();
    std::vector<std::string> known;

    void load(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open config " + path);
        try {
            file = json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        if (!file.is_object()) throw ConfigError(path + ": config must be a JSON object");
    }

    void check_unknown() const {
        for (auto it = file.begin(); it != file.end(); ++it) {
            if (std::find(known.begin(), known.end(), it.key()) == known.end())
                throw ConfigError("unknown config key: " + it.key());
        }
    }

    template <class T>
    void apply(const std::string& key, T& value, bool record = true) {
        known.push_back(key);
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (cmd->count(flag) == 0 && file.contains(key)) {
            try {
                value = file.at(key).get<T>();
            } catch (const json::exception& e) {
                throw ConfigError("config key " + key + ": " + e.what());
            }
        }
        if (record) resolved[key] = value;
    }

    /// `out` is applied but never recorded, so two runs into different
    /// directories still produce byte-identical artifacts.
    void apply_out(std::string& value) { apply("out", value, false); }

    void write_resolved(const fs::path& out_dir) const {
        std::ofstream out(out_dir / "resolved_config.json", std::ios::binary);
        if (!out) throw IoError("cannot write resolved config");
        out << resolved.dump(2) << "\n";
    }
};

void ensure_out_dir(const std::string& out) {
    if (out.empty()) throw ConfigError("--out is required");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out);
}

// ------------------------------------------------------------------- misc ---

std::size_t worker_count() {
    if (const char* env = std::getenv("ATTRSEQ_THREADS")) {
        long n = std::atol(env);
        if (n >= 1) return static_cast<std::size_t>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Order-stable parallel map: results land by index regardless of scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::string csv_double(double v) { return format_double(v); }

void write_history_csv(const fs::path& path, const std::vector<double>& train,
                       const std::vector<double>& val) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t i = 0; i < train.size(); ++i)
        out << (i + 1) << "," << csv_double(train[i]) << "," << csv_double(val[i]) << "\n";
}

void write_embeddings_csv(const fs::path& path, const std::vector<std::string>& ids,
                          const std::vector<Vector>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::size_t d = rows.empty() ? 0 : rows[0].size();
    out << "id";
    for (std::size_t j = 0; j < d; ++j) out << ",dim" << j;
    out << "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i];
        for (std::size_t j = 0; j < d; ++j) out << "," << csv_double(rows[i][j]);
        out << "\n";
    }
}

EmbeddingSet read_embeddings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty embeddings file");
    EmbeddingSet set;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = line.find(',');
        if (pos == std::string::npos) throw ParseError(path + ":" + std::to_string(lineno));
        set.ids.push_back(line.substr(0, pos));
        while (pos != std::string::npos) {
            std::size_t next = line.find(',', pos + 1);
            std::string cell = line.substr(pos + 1, next == std::string::npos ? next : next - pos - 1);
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad number " + cell);
            }
            pos = next;
        }
        rows.push_back(std::move(row));
    }
    const std::size_t d = rows.empty() ? 0 : rows[0].size();
    set.vectors = Matrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw ParseError(path + ": ragged embedding rows");
        for (std::size_t j = 0; j < d; ++j) set.vectors(i, j) = rows[i][j];
    }
    return set;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t next = csv.find(',', pos);
        std::string cell = csv.substr(pos, next == std::string::npos ? next : next - pos);
        if (!cell.empty()) out.push_back(static_cast<std::size_t>(std::stoull(cell)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (out.empty()) throw ConfigError("expected a comma-separated list of integers");
    return out;
}

// --------------------------------------------------------------- generate ---

int cmd_generate(RunConfig& rc, std::string out, std::uint64_t seed, SyntheticConfig scfg,
                 std::size_t n_pairs) {
    rc.check_unknown();
    Rng root(seed);
    Rng data_rng = root.split(kStreamData);
    Dataset ds = generate_synthetic(data_rng, scfg);

    std::vector<FeedbackTriplet> pairs;
    if (n_pairs > 0) {
        Rng frng = root.split(kStreamFeedback);
        pairs = make_feedback(ds, frng, n_pairs);
    }

    ensure_out_dir(out);
    rc.write_resolved(out);
    write_jsonl(ds, (fs::path(out) / "dataset.jsonl").string());
    if (!pairs.empty()) write_feedback_jsonl(pairs, (fs::path(out) / "feedback.jsonl").string());

    json manifest;
    manifest["seed"] = seed;
    manifest["records"] = ds.records.size();
    manifest["feedback_pairs"] = pairs.size();
    manifest["config"] = rc.resolved;
    std::ofstream mout(fs::path(out) / "manifest.json", std::ios::binary);
    mout << manifest.dump(2) << "\n";

    std::cout << "generated " << ds.records.size() << " records";
    if (!pairs.empty()) std::cout << " and " << pairs.size() << " feedback pairs";
    std::cout << " into " << out << "\n";
    return 0;
}

// ------------------------------------------------------------------ train ---

struct TrainArgs {
    std::string framework, data, feedback, out, variant;
    std::uint64_t seed = 0;
    std::size_t dim = 8, att_hidden = 0, depth = 1, epochs = 10;
    double lr = 0.01, margin = 1.0, omega_a = 0.5, lambda = 1.0, eps = 0.0;
    std::size_t iters_a = 1, iters_s = 1;
    double eps_a = 0.0, eps_s = 0.0;
    std::size_t pretrain_epochs = 0;
    double val_fraction = 0.2;
    bool no_dropout = false;
    bool no_conditioning = false;  // nas sequence-only ablation
    std::size_t patience = 0;      // amas early stopping, 0 = off
};

/// Split records into (train, val); val_fraction 0 disables validation.
std::pair<Dataset, Dataset> maybe_split(const Dataset& ds, double fraction, Rng& rng) {
    if (fraction < 0.0 || fraction >= 1.0) throw ConfigError("val_fraction must lie in [0,1)");
    if (fraction == 0.0) return {ds, Dataset{}};
    return split_train_validation(ds, fraction, rng);
}

int cmd_train(RunConfig& rc, const TrainArgs& a) {
    rc.check_unknown();
    if (a.framework != "nas" && a.framework != "mlas" && a.framework != "olas" &&
        a.framework != "amas")
        throw ConfigError("unknown framework: " + a.framework);
    Dataset ds = load_jsonl(a.data);
    if (ds.records.empty()) throw ConfigError("training data is empty");
    for (const auto& rec : ds.records)
        if (rec.items.empty())
            throw EmptySequenceError("record " + rec.id + " has an empty sequence");

    Rng root(a.seed);
    Rng model_rng = root.split(kStreamModel);
    Rng train_rng = root.split(kStreamTrain);
    Rng split_rng = root.split(kStreamSplit);
    const std::size_t hidden = a.att_hidden ? a.att_hidden : a.dim;

    std::vector<double> train_hist, val_hist;
    const fs::path out_dir(a.out);
    const std::string ckpt = (out_dir / "model.ckpt").string();

    if (a.framework == "nas") {
        NasConfig cfg;
        cfg.attr_width = ds.attr_width;
        cfg.vocab_size = ds.vocab_size();
        cfg.embed_dim = a.dim;
        cfg.depth = a.depth;
        cfg.conditioned = !a.no_conditioning;
        NasModel m = NasModel::init(cfg, model_rng);
        auto [train, val] = maybe_split(ds, a.val_fraction, split_rng);
        ensure_out_dir(a.out);
        rc.write_resolved(out_dir);
        for (std::size_t e = 0; e < a.epochs; ++e) {
            auto h = nas_train(m, train, a.lr, a.iters_a, a.iters_s, a.eps_a, a.eps_s, 1);
            train_hist.push_back(h.mean_attribute_loss[0] + h.mean_sequence_loss[0]);
            double vsum = 0.0;
            for (const auto& rec : val.records) {
                auto [la, ls] = nas_losses(m, rec);
                vsum += la + ls;
            }
            val_hist.push_back(val.records.empty() ? train_hist.back()
                                                   : vsum / static_cast<double>(val.records.size()));
        }
        save_nas(ckpt, m, ds.vocab, ds.schema);
    } else if (a.framework == "mlas") {
        if (a.feedback.empty()) throw ConfigError("mlas training needs --feedback");
        auto pairs = load_feedback_jsonl(a.feedback);
        if (pairs.size() < 2) throw ConfigError("need at least 2 feedback pairs");
        MlasConfig cfg;
        cfg.attr_width = ds.attr_width;
        cfg.vocab_size = ds.vocab_size();
        cfg.att_hidden = hidden;
        cfg.seq_hidden = hidden;
        cfg.out_dim = a.dim;
        cfg.att_depth = a.depth;
        cfg.margin = a.margin;
        cfg.fusion = a.variant.empty() ? FusionKind::Balanced : fusion_from_name(a.variant);
        MlasModel m = MlasModel::init(cfg, model_rng);

        if (a.val_fraction < 0.0 || a.val_fraction >= 1.0)
            throw ConfigError("val_fraction must lie in [0,1)");
        std::vector<FeedbackTriplet> shuffled = pairs;
        split_rng.shuffle(shuffled);
        const std::size_t n_val = static_cast<std::size_t>(
            std::llround(a.val_fraction * static_cast<double>(shuffled.size())));
        std::vector<FeedbackTriplet> val_pairs(shuffled.begin(), shuffled.begin() + n_val);
        std::vector<FeedbackTriplet> train_pairs(shuffled.begin() + n_val, shuffled.end());
        if (train_pairs.empty()) throw ConfigError("validation split consumed all pairs");

        ensure_out_dir(a.out);
        rc.write_resolved(out_dir);
        if (a.pretrain_epochs) {
            Rng prng = root.split(kStreamTrain + 100);
            mlas_pretrain(m, ds, a.omega_a, a.pretrain_epochs, a.lr, prng);
        }
        auto index = ds.index_by_id();
        auto val_loss = [&] {
            if (val_pairs.empty()) return 0.0;
            double sum = 0.0;
            for (const auto& p : val_pairs)
                sum += contrastive_loss(
                    pair_distance(m, ds.records[index.at(p.left_id)], ds.records[index.at(p.right_id)]),
                    p.label, cfg.margin);
            return sum / static_cast<double>(val_pairs.size());
        };
        for (std::size_t e = 0; e < a.epochs; ++e) {
            auto h = mlas_train(m, ds, train_pairs, a.lr, 1, a.eps, train_rng);
            train_hist.push_back(h.mean_loss[0]);
            val_hist.push_back(val_pairs.empty() ? h.mean_loss[0] : val_loss());
        }
        save_mlas(ckpt, m, ds.vocab, ds.schema);
    } else if (a.framework == "olas") {
        if (a.feedback.empty()) throw ConfigError("olas training needs --feedback (triplets)");
        auto triplets = load_feedback_jsonl(a.feedback);
        if (triplets.size() < 2) throw ConfigError("need at least 2 triplets");
        OlasConfig cfg;
        cfg.attr_width = ds.attr_width;
        cfg.vocab_size = ds.vocab_size();
        cfg.fc_depth = a.depth;
        cfg.fc_hidden = hidden;
        cfg.lstm_hidden = hidden;
        cfg.feature_dim = a.dim;
        cfg.margin = a.margin;
        OlasModel m = OlasModel::init(cfg, model_rng);

        if (a.val_fraction < 0.0 || a.val_fraction >= 1.0)
            throw ConfigError("val_fraction must lie in [0,1)");
        std::vector<FeedbackTriplet> shuffled = triplets;
        split_rng.shuffle(shuffled);
        const std::size_t n_val = static_cast<std::size_t>(
            std::llround(a.val_fraction * static_cast<double>(shuffled.size())));
        std::vector<FeedbackTriplet> val_pairs(shuffled.begin(), shuffled.begin() + n_val);
        std::vector<FeedbackTriplet> train_pairs(shuffled.begin() + n_val, shuffled.end());
        if (train_pairs.empty()) throw ConfigError("validation split consumed all triplets");

        ensure_out_dir(a.out);
        rc.write_resolved(out_dir);
        auto index = ds.index_by_id();
        auto val_loss = [&] {
            if (val_pairs.empty()) return 0.0;
            double sum = 0.0;
            for (const auto& p : val_pairs)
                sum += olas_pair_loss(m, ds.records[index.at(p.left_id)],
                                      ds.records[index.at(p.right_id)], p.label);
            return sum / static_cast<double>(val_pairs.size());
        };
        for (std::size_t e = 0; e < a.epochs; ++e) {
            auto h = olas_train(m, ds, train_pairs, a.lr, 1, a.eps);
            train_hist.push_back(h.mean_loss[0]);
            val_hist.push_back(val_pairs.empty() ? h.mean_loss[0] : val_loss());
        }
        save_olas(ckpt, m, ds.vocab, ds.schema);
    } else if (a.framework == "amas") {
        auto classes = ds.class_labels();
        if (classes.size() < 2) throw ConfigError("amas training needs at least 2 classes");
        AmasConfig cfg;
        cfg.attr_width = ds.attr_width;
        cfg.vocab_size = ds.vocab_size();
        cfg.n_classes = classes.size();
        cfg.att_hidden = hidden;
        cfg.lstm_hidden = a.dim;
        cfg.variant = a.variant.empty() ? AmasVariant::ASA : amas_variant_from_name(a.variant);
        AmasModel m = AmasModel::init(cfg, model_rng);
        m.classes = classes;

        ensure_out_dir(a.out);
        rc.write_resolved(out_dir);
        AmasTrainConfig tc;
        tc.rho = a.lr;
        tc.epochs = a.epochs;
        tc.lambda = a.lambda;
        tc.val_fraction = a.val_fraction;
        tc.dropout = !a.no_dropout;
        tc.early_stop_patience = a.patience;
        auto result = amas_train(m, ds, tc, train_rng);
        for (const auto& s : result.history) {
            train_hist.push_back(s.train_loss);
            val_hist.push_back(s.val_loss);
        }
        save_amas(ckpt, m, ds.vocab, ds.schema);
    } else {
        throw ConfigError("unknown framework: " + a.framework);
    }

    write_history_csv(out_dir / "history.csv", train_hist, val_hist);
    std::cout << "trained " << a.framework << " for " << train_hist.size() << " epochs, checkpoint "
              << ckpt << "\n";
    return 0;
}

// ------------------------------------------------------------------ embed ---

int cmd_embed(RunConfig& rc, const std::string& ckpt_path, const std::string& data,
              const std::string& out) {
    rc.check_unknown();
    LoadedCheckpoint ck = load_checkpoint(ckpt_path);
    AttributeSchema schema = AttributeSchema::from_json(ck.attr_schema);
    Vocabulary vocab = Vocabulary::from_items(ck.vocab);
    Dataset ds = load_jsonl_with(data, schema, vocab);
    for (const auto& rec : ds.records)
        if (rec.items.empty()) throw EmptySequenceError("record " + rec.id + " has an empty sequence");

    std::vector<Vector> rows(ds.records.size());
    std::vector<std::string> ids(ds.records.size());
    if (ck.framework == "nas") {
        NasModel m = load_nas(ck);
        parallel_for(ds.records.size(), [&](std::size_t i) {
            rows[i] = nas_embed(m, ds.records[i]);
            ids[i] = ds.records[i].id;
        });
    } else if (ck.framework == "mlas") {
        MlasModel m = load_mlas(ck);
        parallel_for(ds.records.size(), [&](std::size_t i) {
            rows[i] = mlas_embed(m, ds.records[i]);
            ids[i] = ds.records[i].id;
        });
    } else if (ck.framework == "olas") {
        OlasModel m = load_olas(ck);
        parallel_for(ds.records.size(), [&](std::size_t i) {
            rows[i] = olas_feature(m, ds.records[i]);
            ids[i] = ds.records[i].id;
        });
    } else {
        throw ConfigError("checkpoint framework " + ck.framework + " does not produce embeddings");
    }

    ensure_out_dir(out);
    rc.write_resolved(out);
    write_embeddings_csv(fs::path(out) / "embeddings.csv", ids, rows);
    std::cout << "embedded " << ids.size() << " records\n";
    return 0;
}

// ------------------------------------------------------------------ label ---

int cmd_label(RunConfig& rc, const std::string& ckpt_path, const std::string& gallery_path,
              const std::string& queries_path, const std::string& out) {
    rc.check_unknown();
    LoadedCheckpoint ck = load_checkpoint(ckpt_path);
    if (ck.framework != "olas") throw ConfigError("label needs an olas checkpoint");
    OlasModel m = load_olas(ck);
    AttributeSchema schema = AttributeSchema::from_json(ck.attr_schema);
    Vocabulary vocab = Vocabulary::from_items(ck.vocab);
    Dataset gallery_ds = load_jsonl_with(gallery_path, schema, vocab);
    Dataset queries = load_jsonl_with(queries_path, schema, vocab);
    Gallery gallery = Gallery::from_dataset(gallery_ds);
    GalleryIndex index = index_gallery(m, gallery);

    std::vector<std::string> predicted(queries.records.size());
    parallel_for(queries.records.size(), [&](std::size_t i) {
        predicted[i] = oneshot_label(m, index, queries.records[i]);
    });

    ensure_out_dir(out);
    rc.write_resolved(out);
    std::ofstream csv(fs::path(out) / "labels.csv", std::ios::binary);
    csv << "id,predicted,true\n";
    for (std::size_t i = 0; i < queries.records.size(); ++i)
        csv << queries.records[i].id << "," << predicted[i] << "," << queries.records[i].label << "\n";

    bool labeled = !queries.records.empty();
    for (const auto& q : queries.records) labeled = labeled && q.labeled();
    if (labeled) {
        auto report = oneshot_eval(m, gallery, queries.records);
        json j;
        j["accuracy"] = report.accuracy;
        j["n_queries"] = report.n_queries;
        j["per_class"] = report.per_class;
        std::ofstream rout(fs::path(out) / "report.json", std::ios::binary);
        rout << j.dump(2) << "\n";
        std::cout << "one-shot accuracy " << report.accuracy << " over " << report.n_queries
                  << " queries\n";
    } else {
        std::cout << "labeled " << queries.records.size() << " queries\n";
    }
    return 0;
}

// --------------------------------------------------------------- classify ---

int cmd_classify(RunConfig& rc, const std::string& ckpt_path, const std::string& data,
                 const std::string& out, bool export_trace) {
    rc.check_unknown();
    LoadedCheckpoint ck = load_checkpoint(ckpt_path);
    if (ck.framework != "amas") throw ConfigError("classify needs an amas checkpoint");
    AmasModel m = load_amas(ck);
    AttributeSchema schema = AttributeSchema::from_json(ck.attr_schema);
    Vocabulary vocab = Vocabulary::from_items(ck.vocab);
    Dataset ds = load_jsonl_with(data, schema, vocab);
    for (const auto& rec : ds.records)
        if (rec.items.empty()) throw EmptySequenceError("record " + rec.id + " has an empty sequence");

    std::vector<std::size_t> preds(ds.records.size());
    std::vector<Vector> scores(ds.records.size());
    std::vector<AttentionTrace> traces(ds.records.size());
    parallel_for(ds.records.size(), [&](std::size_t i) {
        AmasForward f = amas_forward(m, ds.records[i]);
        preds[i] = argmax_lowest(f.scores);
        scores[i] = f.scores;
        if (export_trace) traces[i] = f.trace;
    });

    ensure_out_dir(out);
    rc.write_resolved(out);
    std::ofstream csv(fs::path(out) / "predictions.csv", std::ios::binary);
    csv << "id,predicted,true";
    for (std::size_t c = 0; c < m.cfg.n_classes; ++c) csv << ",score_" << c;
    csv << "\n";
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        csv << ds.records[i].id << "," << m.classes[preds[i]] << "," << ds.records[i].label;
        for (std::size_t c = 0; c < m.cfg.n_classes; ++c) csv << "," << csv_double(scores[i][c]);
        csv << "\n";
    }

    if (export_trace) {
        std::ofstream tout(fs::path(out) / "attention_trace.jsonl", std::ios::binary);
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            json j;
            j["id"] = ds.records[i].id;
            json steps = json::array();
            for (const auto& mu : traces[i].weights) {
                double mean = 0.0;
                for (double w : mu) mean += w;
                steps.push_back(mu.size() ? mean / static_cast<double>(mu.size()) : 0.0);
            }
            j["step_weight"] = steps;
            tout << j.dump() << "\n";
        }
    }
    std::cout << "classified " << ds.records.size() << " records\n";
    return 0;
}

// ------------------------------------------------------------------- eval ---

int cmd_eval(RunConfig& rc, const std::string& data, const std::vector<std::string>& embed_specs,
             const std::string& out, const std::string& k_list, const std::string& mcs_list,
             double radius) {
    rc.check_unknown();
    if (embed_specs.empty()) throw ConfigError("eval needs at least one --embeddings name=path");
    Dataset ds = load_jsonl(data);
    auto by_id = ds.index_by_id();

    std::vector<std::pair<std::string, EmbeddingSet>> sets;
    for (const auto& spec : embed_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--embeddings expects name=path, got " + spec);
        EmbeddingSet set = read_embeddings_csv(spec.substr(eq + 1));
        for (const auto& id : set.ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw ConfigError("embedding id " + id + " not in the dataset");
            set.labels.push_back(ds.records[it->second].label);
        }
        set.validate();
        sets.push_back({spec.substr(0, eq), std::move(set)});
    }

    auto ks = parse_size_list(k_list);
    auto sizes = parse_size_list(mcs_list);

    ensure_out_dir(out);
    rc.write_resolved(out);
    std::vector<MetricReport> reports;

    std::ofstream auc_csv(fs::path(out) / "auc_vs_k.csv", std::ios::binary);
    auc_csv << "set,k,auc\n";
    std::ofstream nmi_csv(fs::path(out) / "nmi_vs_min_cluster_size.csv", std::ios::binary);
    nmi_csv << "set,min_cluster_size,nmi\n";
    std::ofstream summary_csv(fs::path(out) / "metric_vs_set.csv", std::ios::binary);
    summary_csv << "set,metric,value\n";

    for (auto& [name, set] : sets) {
        // outlier detection runs when the dataset plants "outlier" labels
        std::vector<int> outlier_labels;
        bool has_outliers = false;
        for (const auto& l : set.labels) {
            outlier_labels.push_back(l == "outlier" ? 1 : 0);
            has_outliers = has_outliers || l == "outlier";
        }
        if (has_outliers) {
            for (std::size_t k : ks) {
                double auc = roc_auc(knn_outlier_scores(set, k), outlier_labels);
                auc_csv << name << "," << k << "," << csv_double(auc) << "\n";
                MetricReport r;
                r.metric = "roc_auc";
                r.value = auc;
                r.params = {{"set", name}, {"k", std::to_string(k)}};
                r.n = set.size();
                reports.push_back(r);
                if (k == ks[0]) summary_csv << name << ",auc@k" << k << "," << csv_double(auc) << "\n";
            }
        }

        std::vector<int> truth = labels_to_ints(set.labels);
        for (std::size_t mcs : sizes) {
            auto clusters = density_cluster(set, mcs, radius);
            double score = nmi(clusters, truth);
            nmi_csv << name << "," << mcs << "," << csv_double(score) << "\n";
            MetricReport r;
            r.metric = "nmi";
            r.value = score;
            r.params = {{"set", name},
                        {"min_cluster_size", std::to_string(mcs)},
                        {"radius", csv_double(radius)}};
            r.n = set.size();
            reports.push_back(r);
            if (mcs == sizes[0])
                summary_csv << name << ",nmi@mcs" << mcs << "," << csv_double(score) << "\n";
        }

        std::map<int, std::size_t> distinct;
        for (int t : truth) distinct[t]++;
        if (distinct.size() >= 2) {
            double sil = silhouette(set, truth);
            MetricReport r;
            r.metric = "silhouette";
            r.value = sil;
            r.params = {{"set", name}};
            r.n = set.size();
            reports.push_back(r);
            summary_csv << name << ",silhouette," << csv_double(sil) << "\n";
        }
    }

    write_reports_jsonl(reports, (fs::path(out) / "report.jsonl").string());
    std::cout << "evaluated " << sets.size() << " embedding sets, " << reports.size()
              << " metric rows\n";
    return 0;
}

// ------------------------------------------------------------- inspection ---

int cmd_inspect(const std::string& ckpt_path) {
    LoadedCheckpoint ck = load_checkpoint(ckpt_path);
    json j;
    j["framework"] = ck.framework;
    j["hyper"] = ck.hyper;
    j["vocab_size"] = ck.vocab.size();
    j["attr_schema"] = ck.attr_schema;
    j["tensors"] = ck.tensor_table;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attributed-sequence learning toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic corpus and feedback pairs");
    std::string gen_config, gen_out;
    std::uint64_t gen_seed = 0;
    SyntheticConfig scfg;
    std::size_t gen_pairs = 100;
    gen->add_option("--config", gen_config, "JSON config file");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--n-classes", scfg.n_classes);
    gen->add_option("--per-class", scfg.per_class);
    gen->add_option("--attr-width", scfg.attr_width);
    gen->add_option("--vocab-size", scfg.vocab_size);
    gen->add_option("--len-min", scfg.len_min);
    gen->add_option("--len-max", scfg.len_max);
    gen->add_option("--noise", scfg.noise);
    gen->add_option("--attr-jitter", scfg.attr_jitter);
    gen->add_option("--chain-sharpness", scfg.chain_sharpness);
    gen->add_option("--outlier-fraction", scfg.outlier_fraction);
    gen->add_flag("--shared-chain", scfg.shared_chain);
    gen->add_option("--n-pairs", gen_pairs, "feedback pairs to emit (0 = none)");

    // train
    auto* train = app.add_subcommand("train", "train one of the four frameworks");
    std::string train_config;
    TrainArgs ta;
    train->add_option("--config", train_config);
    train->add_option("--framework", ta.framework, "nas|mlas|olas|amas");
    train->add_option("--data", ta.data, "dataset JSONL");
    train->add_option("--feedback", ta.feedback, "feedback/triplet JSONL (mlas, olas)");
    train->add_option("--out", ta.out);
    train->add_option("--seed", ta.seed);
    train->add_option("--dim", ta.dim, "embedding/feature width");
    train->add_option("--att-hidden", ta.att_hidden, "attribute tower width (default --dim)");
    train->add_option("--depth", ta.depth, "attribute tower depth");
    train->add_option("--epochs", ta.epochs);
    train->add_option("--lr", ta.lr);
    train->add_option("--margin", ta.margin);
    train->add_option("--omega-a", ta.omega_a, "pretraining attribute weight (mlas)");
    train->add_option("--lambda", ta.lambda, "adaptive sampling rate (amas)");
    train->add_option("--variant", ta.variant, "fusion (mlas) or attention (amas) variant");
    train->add_option("--iters-a", ta.iters_a, "per-record attribute iterations (nas)");
    train->add_option("--iters-s", ta.iters_s, "per-record sequence iterations (nas)");
    train->add_option("--eps-a", ta.eps_a);
    train->add_option("--eps-s", ta.eps_s);
    train->add_option("--eps", ta.eps, "per-pair convergence threshold (mlas, olas)");
    train->add_option("--pretrain-epochs", ta.pretrain_epochs);
    train->add_option("--val-fraction", ta.val_fraction);
    train->add_flag("--no-dropout", ta.no_dropout, "disable dropout (amas)");
    train->add_flag("--no-conditioning", ta.no_conditioning,
                    "sequence-only ablation, skip the attribute conditioning (nas)");
    train->add_option("--patience", ta.patience, "early stopping patience in epochs (amas)");

    // embed
    auto* embed = app.add_subcommand("embed", "export embeddings for a dataset");
    std::string embed_config, embed_ckpt, embed_data, embed_out;
    embed->add_option("--config", embed_config);
    embed->add_option("--checkpoint", embed_ckpt);
    embed->add_option("--data", embed_data);
    embed->add_option("--out", embed_out);

    // label
    auto* label = app.add_subcommand("label", "one-shot labeling against a gallery");
    std::string label_config, label_ckpt, label_gallery, label_queries, label_out;
    label->add_option("--config", label_config);
    label->add_option("--checkpoint", label_ckpt);
    label->add_option("--gallery", label_gallery, "dataset JSONL, one record per class");
    label->add_option("--queries", label_queries);
    label->add_option("--out", label_out);

    // classify
    auto* classify = app.add_subcommand("classify", "attention-based classification");
    std::string cls_config, cls_ckpt, cls_data, cls_out;
    bool cls_trace = false;
    classify->add_option("--config", cls_config);
    classify->add_option("--checkpoint", cls_ckpt);
    classify->add_option("--data", cls_data);
    classify->add_option("--out", cls_out);
    classify->add_flag("--trace", cls_trace, "export per-step attention weights");

    // eval
    auto* eval = app.add_subcommand("eval", "metric sweeps over exported embeddings");
    std::string eval_config, eval_data, eval_out;
    std::vector<std::string> eval_sets;
    std::string eval_k = "5", eval_mcs = "5";
    double eval_radius = 0.5;
    eval->add_option("--config", eval_config);
    eval->add_option("--data", eval_data, "dataset JSONL with labels");
    eval->add_option("--embeddings", eval_sets, "name=path, repeatable");
    eval->add_option("--out", eval_out);
    eval->add_option("--k", eval_k, "comma-separated k sweep");
    eval->add_option("--min-cluster-size", eval_mcs, "comma-separated sweep");
    eval->add_option("--radius", eval_radius, "density clustering radius");

    // inspect-checkpoint
    auto* inspect = app.add_subcommand("inspect-checkpoint", "print checkpoint metadata");
    std::string inspect_ckpt;
    inspect->add_option("--checkpoint", inspect_ckpt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            RunConfig rc;
            rc.cmd = gen;
            rc.load(gen_config);
            rc.known.push_back("config");
            rc.apply_out(gen_out);
            rc.apply("seed", gen_seed);
            rc.apply("n_classes", scfg.n_classes);
            rc.apply("per_class", scfg.per_class);
            rc.apply("attr_width", scfg.attr_width);
            rc.apply("vocab_size", scfg.vocab_size);
            rc.apply("len_min", scfg.len_min);
            rc.apply("len_max", scfg.len_max);
            rc.apply("noise", scfg.noise);
            rc.apply("attr_jitter", scfg.attr_jitter);
            rc.apply("chain_sharpness", scfg.chain_sharpness);
            rc.apply("outlier_fraction", scfg.outlier_fraction);
            rc.apply("shared_chain", scfg.shared_chain);
            rc.apply("n_pairs", gen_pairs);
            return cmd_generate(rc, gen_out, gen_seed, scfg, gen_pairs);
        }
        if (train->parsed()) {
            RunConfig rc;
            rc.cmd = train;
            rc.load(train_config);
            rc.known.push_back("config");
            rc.apply_out(ta.out);
            rc.apply("framework", ta.framework);
            rc.apply("data", ta.data);
            rc.apply("feedback", ta.feedback);
            rc.apply("seed", ta.seed);
            rc.apply("dim", ta.dim);
            rc.apply("att_hidden", ta.att_hidden);
            rc.apply("depth", ta.depth);
            rc.apply("epochs", ta.epochs);
            rc.apply("lr", ta.lr);
            rc.apply("margin", ta.margin);
            rc.apply("omega_a", ta.omega_a);
            rc.apply("lambda", ta.lambda);
            rc.apply("variant", ta.variant);
            rc.apply("iters_a", ta.iters_a);
            rc.apply("iters_s", ta.iters_s);
            rc.apply("eps_a", ta.eps_a);
            rc.apply("eps_s", ta.eps_s);
            rc.apply("eps", ta.eps);
            rc.apply("pretrain_epochs", ta.pretrain_epochs);
            rc.apply("val_fraction", ta.val_fraction);
            rc.apply("no_dropout", ta.no_dropout);
            rc.apply("no_conditioning", ta.no_conditioning);
            rc.apply("patience", ta.patience);
            if (ta.framework.empty()) throw ConfigError("--framework is required");
            if (ta.data.empty()) throw ConfigError("--data is required");
            if (ta.out.empty()) throw ConfigError("--out is required");
            return cmd_train(rc, ta);
        }
        if (embed->parsed()) {
            RunConfig rc;
            rc.cmd = embed;
            rc.load(embed_config);
            rc.known.push_back("config");
            rc.apply_out(embed_out);
            rc.apply("checkpoint", embed_ckpt);
            rc.apply("data", embed_data);
            if (embed_ckpt.empty() || embed_data.empty() || embed_out.empty())
                throw ConfigError("embed needs --checkpoint, --data and --out");
            return cmd_embed(rc, embed_ckpt, embed_data, embed_out);
        }
        if (label->parsed()) {
            RunConfig rc;
            rc.cmd = label;
            rc.load(label_config);
            rc.known.push_back("config");
            rc.apply_out(label_out);
            rc.apply("checkpoint", label_ckpt);
            rc.apply("gallery", label_gallery);
            rc.apply("queries", label_queries);
            if (label_ckpt.empty() || label_gallery.empty() || label_queries.empty() ||
                label_out.empty())
                throw ConfigError("label needs --checkpoint, --gallery, --queries and --out");
            return cmd_label(rc, label_ckpt, label_gallery, label_queries, label_out);
        }
        if (classify->parsed()) {
            RunConfig rc;
            rc.cmd = classify;
            rc.load(cls_config);
            rc.known.push_back("config");
            rc.apply_out(cls_out);
            rc.apply("checkpoint", cls_ckpt);
            rc.apply("data", cls_data);
            rc.apply("trace", cls_trace);
            if (cls_ckpt.empty() || cls_data.empty() || cls_out.empty())
                throw ConfigError("classify needs --checkpoint, --data and --out");
            return cmd_classify(rc, cls_ckpt, cls_data, cls_out, cls_trace);
        }
        if (eval->parsed()) {
            RunConfig rc;
            rc.cmd = eval;
            rc.load(eval_config);
            rc.known.push_back("config");
            rc.apply_out(eval_out);
            rc.apply("data", eval_data);
            rc.apply("embeddings", eval_sets);
            rc.apply("k", eval_k);
            rc.apply("min_cluster_size", eval_mcs);
            rc.apply("radius", eval_radius);
            if (eval_data.empty() || eval_out.empty())
                throw ConfigError("eval needs --data and --out");
            return cmd_eval(rc, eval_data, eval_sets, eval_out, eval_k, eval_mcs, eval_radius);
        }
        if (inspect->parsed()) {
            if (inspect_ckpt.empty()) throw ConfigError("inspect-checkpoint needs --checkpoint");
            return cmd_inspect(inspect_ckpt);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
