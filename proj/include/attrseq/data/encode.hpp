#pragma once

#include <cstdint>
#include <vector>

#include "attrseq/core/tensor.hpp"

namespace attrseq {

/// Zero-padded one-hot encoding of one sequence. Rows past true_len are
/// all-zero and masked; every unmasked row has exactly one 1.
struct EncodedSequence {
    Matrix onehots;                 // t_max x r
    std::vector<std::uint8_t> mask; // 1 = real step, 0 = padding
    std::size_t true_len = 0;
};

inline EncodedSequence encode_one_hot(const std::vector<std::size_t>& seq, std::size_t vocab_size,
                                      std::size_t t_max) {
    if (seq.size() > t_max)
        throw LengthError("sequence length " + std::to_string(seq.size()) + " exceeds t_max " +
                          std::to_string(t_max));
    EncodedSequence enc;
    enc.onehots = Matrix(t_max, vocab_size);
    enc.mask.assign(t_max, 0);
    enc.true_len = seq.size();
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (seq[t] >= vocab_size)
            throw VocabError("item index " + std::to_string(seq[t]) + " >= vocabulary size " +
                             std::to_string(vocab_size));
        enc.onehots(t, seq[t]) = 1.0;
        enc.mask[t] = 1;
    }
    return enc;
}

inline std::vector<std::size_t> decode_one_hot(const EncodedSequence& enc) {
    std::vector<std::size_t> seq;
    seq.reserve(enc.true_len);
    for (std::size_t t = 0; t < enc.true_len; ++t) {
        std::size_t hit = enc.onehots.cols();
        for (std::size_t c = 0; c < enc.onehots.cols(); ++c) {
            if (enc.onehots(t, c) == 1.0) {
                hit = c;
                break;
            }
        }
        if (hit == enc.onehots.cols()) throw VocabError("decode: unmasked row without a 1");
        seq.push_back(hit);
    }
    return seq;
}

/// Row t as a vector (used as the LSTM input at step t).
inline Vector encoded_row(const EncodedSequence& enc, std::size_t t) {
    Vector out(enc.onehots.cols());
    for (std::size_t c = 0; c < enc.onehots.cols(); ++c) out[c] = enc.onehots(t, c);
    return out;
}

}  // namespace attrseq
