#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attrseq/amas/model.hpp"
#include "attrseq/core/errors.hpp"
#include "attrseq/core/params.hpp"
#include "attrseq/data/schema.hpp"
#include "attrseq/data/vocabulary.hpp"
#include "attrseq/mlas/model.hpp"
#include "attrseq/nas/model.hpp"
#include "attrseq/olas/olas.hpp"

namespace attrseq {

// Checkpoint layout: 8-byte magic, little-endian u64 header length, JSON
// header, then the tensor blob. Tensors are raw little-endian float64 runs
// addressed by offset, so save/load round-trips bitwise.
inline constexpr char kCheckpointMagic[8] = {'A', 'S', 'Q', 'C', 'K', 'P', 'T', '1'};
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

inline std::uint64_t read_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline void write_doubles_le(std::ostream& out, const double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &data[i], 8);
            write_u64_le(out, bits);
        }
    }
}

inline void read_doubles_le(std::istream& in, double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits = read_u64_le(in);
            std::memcpy(&data[i], &bits, 8);
        }
    }
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const std::string& framework,
                            const nlohmann::json& hyper, const std::vector<std::string>& vocab,
                            const nlohmann::json& attr_schema, ParamRefs tensors) {
    nlohmann::json header;
    header["version"] = kCheckpointVersion;
    header["framework"] = framework;
    header["hyper"] = hyper;
    header["vocab"] = vocab;
    header["attr_schema"] = attr_schema;
    nlohmann::json list = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& t : tensors) {
        nlohmann::json j;
        j["name"] = t.name;
        if (t.mat) {
            j["kind"] = "matrix";
            j["rows"] = t.mat->rows();
            j["cols"] = t.mat->cols();
        } else {
            j["kind"] = "vector";
            j["len"] = t.vec->size();
        }
        j["offset"] = offset;
        offset += t.size() * 8;
        list.push_back(j);
    }
    header["tensors"] = list;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out.write(kCheckpointMagic, 8);
    const std::string header_bytes = header.dump();
    detail::write_u64_le(out, header_bytes.size());
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    for (const auto& t : tensors) detail::write_doubles_le(out, t.data(), t.size());
    if (!out) throw IoError("short write on checkpoint " + path);
}

struct LoadedCheckpoint {
    std::string framework;
    nlohmann::json hyper;
    std::vector<std::string> vocab;
    nlohmann::json attr_schema;
    nlohmann::json tensor_table;
    std::vector<char> blob;

    /// Copy the named tensors into a freshly built model's refs.
    void fill(ParamRefs refs) const {
        for (auto& r : refs) {
            bool found = false;
            for (const auto& t : tensor_table) {
                if (t.at("name").get<std::string>() != r.name) continue;
                std::size_t n;
                if (t.at("kind") == "matrix") {
                    if (!r.mat) throw ParseError("checkpoint tensor " + r.name + " kind mismatch");
                    if (t.at("rows").get<std::size_t>() != r.mat->rows() ||
                        t.at("cols").get<std::size_t>() != r.mat->cols())
                        throw ParseError("checkpoint tensor " + r.name + " shape mismatch");
                    n = r.mat->size();
                } else {
                    if (!r.vec) throw ParseError("checkpoint tensor " + r.name + " kind mismatch");
                    if (t.at("len").get<std::size_t>() != r.vec->size())
                        throw ParseError("checkpoint tensor " + r.name + " length mismatch");
                    n = r.vec->size();
                }
                const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
                if (offset + n * 8 > blob.size()) throw ParseError("checkpoint blob truncated");
                if constexpr (std::endian::native == std::endian::little) {
                    std::memcpy(r.data(), blob.data() + offset, n * 8);
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        std::uint64_t bits = 0;
                        for (int b = 0; b < 8; ++b)
                            bits |= static_cast<std::uint64_t>(
                                        static_cast<unsigned char>(blob[offset + i * 8 + b]))
                                    << (8 * b);
                        std::memcpy(r.data() + i, &bits, 8);
                    }
                }
                found = true;
                break;
            }
            if (!found) throw ParseError("checkpoint is missing tensor " + r.name);
        }
    }
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw ParseError(path + ": not a checkpoint file");
    const std::uint64_t header_len = detail::read_u64_le(in);
    std::string header_bytes(header_len, '\0');
    in.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw ParseError(path + ": truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": bad header: " + e.what());
    }
    if (header.at("version").get<int>() != kCheckpointVersion)
        throw ParseError(path + ": unsupported checkpoint version " +
                         std::to_string(header.at("version").get<int>()));

    LoadedCheckpoint ck;
    ck.framework = header.at("framework").get<std::string>();
    ck.hyper = header.at("hyper");
    ck.vocab = header.at("vocab").get<std::vector<std::string>>();
    ck.attr_schema = header.at("attr_schema");
    ck.tensor_table = header.at("tensors");
    ck.blob.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return ck;
}

/// Vocabulary/attribute-schema sidecar for exact re-encoding of new data.
inline void write_schema_sidecar(const std::string& ckpt_path, const std::vector<std::string>& vocab,
                                 const nlohmann::json& attr_schema) {
    nlohmann::json j;
    j["vocab"] = vocab;
    j["attr_schema"] = attr_schema;
    std::ofstream out(ckpt_path + ".schema.json", std::ios::binary);
    if (!out) throw IoError("cannot write schema sidecar for " + ckpt_path);
    out << j.dump(2) << "\n";
}

// --- per-framework config (de)serialization ---------------------------------

inline nlohmann::json nas_hyper(const NasConfig& c) {
    return {{"attr_width", c.attr_width}, {"vocab_size", c.vocab_size}, {"embed_dim", c.embed_dim},
            {"depth", c.depth},           {"conditioned", c.conditioned}};
}

inline NasConfig nas_config_from(const nlohmann::json& j) {
    NasConfig c;
    c.attr_width = j.at("attr_width").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.depth = j.at("depth").get<std::size_t>();
    c.conditioned = j.at("conditioned").get<bool>();
    return c;
}

inline nlohmann::json mlas_hyper(const MlasConfig& c) {
    return {{"attr_width", c.attr_width},
            {"vocab_size", c.vocab_size},
            {"att_hidden", c.att_hidden},
            {"seq_hidden", c.seq_hidden},
            {"out_dim", c.out_dim},
            {"att_depth", c.att_depth},
            {"fusion", fusion_name(c.fusion)},
            {"att_act", activation_name(c.att_act)},
            {"margin", c.margin},
            {"dist_grad", c.dist_grad == DistanceGradient::Exact ? "exact" : "surrogate"}};
}

inline MlasConfig mlas_config_from(const nlohmann::json& j) {
    MlasConfig c;
    c.attr_width = j.at("attr_width").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.att_hidden = j.at("att_hidden").get<std::size_t>();
    c.seq_hidden = j.at("seq_hidden").get<std::size_t>();
    c.out_dim = j.at("out_dim").get<std::size_t>();
    c.att_depth = j.at("att_depth").get<std::size_t>();
    c.fusion = fusion_from_name(j.at("fusion").get<std::string>());
    c.att_act = activation_from_name(j.at("att_act").get<std::string>());
    c.margin = j.at("margin").get<double>();
    c.dist_grad = j.at("dist_grad").get<std::string>() == "exact" ? DistanceGradient::Exact
                                                                  : DistanceGradient::Surrogate;
    return c;
}

inline nlohmann::json olas_hyper(const OlasConfig& c) {
    return {{"attr_width", c.attr_width},   {"vocab_size", c.vocab_size},
            {"fc_depth", c.fc_depth},       {"fc_hidden", c.fc_hidden},
            {"lstm_hidden", c.lstm_hidden}, {"feature_dim", c.feature_dim},
            {"margin", c.margin},           {"distance", distance_name(c.distance)}};
}

inline OlasConfig olas_config_from(const nlohmann::json& j) {
    OlasConfig c;
    c.attr_width = j.at("attr_width").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.fc_depth = j.at("fc_depth").get<std::size_t>();
    c.fc_hidden = j.at("fc_hidden").get<std::size_t>();
    c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.margin = j.at("margin").get<double>();
    c.distance = distance_from_name(j.at("distance").get<std::string>());
    return c;
}

inline nlohmann::json amas_hyper(const AmasConfig& c, const std::vector<std::string>& classes) {
    return {{"attr_width", c.attr_width},
            {"vocab_size", c.vocab_size},
            {"n_classes", c.n_classes},
            {"att_hidden", c.att_hidden},
            {"lstm_hidden", c.lstm_hidden},
            {"variant", amas_variant_name(c.variant)},
            {"scalar_attention", c.scalar_attention},
            {"sigmoid_head", c.sigmoid_head},
            {"dropout_att", c.dropout_att},
            {"dropout_fc", c.dropout_fc},
            {"l2_recurrent", c.l2_recurrent},
            {"classes", classes}};
}

inline AmasConfig amas_config_from(const nlohmann::json& j) {
    AmasConfig c;
    c.attr_width = j.at("attr_width").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.n_classes = j.at("n_classes").get<std::size_t>();
    c.att_hidden = j.at("att_hidden").get<std::size_t>();
    c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    c.variant = amas_variant_from_name(j.at("variant").get<std::string>());
    c.scalar_attention = j.at("scalar_attention").get<bool>();
    c.sigmoid_head = j.at("sigmoid_head").get<bool>();
    c.dropout_att = j.at("dropout_att").get<double>();
    c.dropout_fc = j.at("dropout_fc").get<double>();
    c.l2_recurrent = j.at("l2_recurrent").get<double>();
    return c;
}

// --- whole-model save/load ---------------------------------------------------

inline void save_nas(const std::string& path, NasModel& m, const Vocabulary& vocab,
                     const AttributeSchema& schema) {
    save_checkpoint(path, "nas", nas_hyper(m.cfg), vocab.items(), schema.to_json(), m.refs());
    write_schema_sidecar(path, vocab.items(), schema.to_json());
}

inline void save_mlas(const std::string& path, MlasModel& m, const Vocabulary& vocab,
                      const AttributeSchema& schema) {
    save_checkpoint(path, "mlas", mlas_hyper(m.cfg), vocab.items(), schema.to_json(), m.refs());
    write_schema_sidecar(path, vocab.items(), schema.to_json());
}

inline void save_olas(const std::string& path, OlasModel& m, const Vocabulary& vocab,
                      const AttributeSchema& schema) {
    save_checkpoint(path, "olas", olas_hyper(m.cfg), vocab.items(), schema.to_json(), m.refs());
    write_schema_sidecar(path, vocab.items(), schema.to_json());
}

inline void save_amas(const std::string& path, AmasModel& m, const Vocabulary& vocab,
                      const AttributeSchema& schema) {
    save_checkpoint(path, "amas", amas_hyper(m.cfg, m.classes), vocab.items(), schema.to_json(),
                    m.refs());
    write_schema_sidecar(path, vocab.items(), schema.to_json());
}

inline NasModel load_nas(const LoadedCheckpoint& ck) {
    NasModel m = NasModel::zeros(nas_config_from(ck.hyper));
    ck.fill(m.refs());
    return m;
}

inline MlasModel load_mlas(const LoadedCheckpoint& ck) {
    MlasModel m = MlasModel::zeros(mlas_config_from(ck.hyper));
    ck.fill(m.refs());
    return m;
}

inline OlasModel load_olas(const LoadedCheckpoint& ck) {
    OlasModel m = OlasModel::zeros(olas_config_from(ck.hyper));
    ck.fill(m.refs());
    return m;
}

inline AmasModel load_amas(const LoadedCheckpoint& ck) {
    AmasModel m = AmasModel::zeros(amas_config_from(ck.hyper));
    m.classes = ck.hyper.at("classes").get<std::vector<std::string>>();
    ck.fill(m.refs());
    return m;
}

}  // namespace attrseq
