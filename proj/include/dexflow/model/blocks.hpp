#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "dexflow/core/params.hpp"
#include "dexflow/core/tape.hpp"

namespace dexflow {

// Binds a ParamStore to one tape, creating at most one leaf per parameter so
// fan-out gradients accumulate on a single node. Tests may pre-seed ids to
// drive parameters from externally controlled leaves.
template <typename T>
struct TapeParams {
    Tape<T>& tape;
    const ParamStore<T>& store;
    std::unordered_map<std::string, typename Tape<T>::Id> ids;

    TapeParams(Tape<T>& t, const ParamStore<T>& s) : tape(t), store(s) {}

    typename Tape<T>::Id operator()(const std::string& name) {
        auto it = ids.find(name);
        if (it != ids.end()) return it->second;
        const auto id = store.leaf(tape, name);
        ids.emplace(name, id);
        return id;
    }
};

// Interleaved sine/cosine encoding, base 10000:
//   pe[2i] = sin(pos / 10000^(2i/d)), pe[2i+1] = cos(pos / 10000^(2i/d)).
template <typename T>
std::vector<T> sinusoid_encoding(double pos, int d) {
    std::vector<T> pe(d);
    for (int i = 0; 2 * i < d; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / d);
        pe[2 * i] = static_cast<T>(std::sin(pos * freq));
        if (2 * i + 1 < d) pe[2 * i + 1] = static_cast<T>(std::cos(pos * freq));
    }
    return pe;
}

// y = x . W + b
template <typename T>
typename Tape<T>::Id linear(TapeParams<T>& p, typename Tape<T>::Id x, const std::string& prefix) {
    auto y = p.tape.matmul(x, p(prefix + ".w"));
    return p.tape.add_row(y, p(prefix + ".b"));
}

// LayerNorm with learned scale/bias composed around the normalization
// primitive.
template <typename T>
typename Tape<T>::Id layer_norm_affine(TapeParams<T>& p, typename Tape<T>::Id x,
                                       const std::string& prefix) {
    auto y = p.tape.layer_norm(x);
    y = p.tape.mul_row(y, p(prefix + ".g"));
    return p.tape.add_row(y, p(prefix + ".b"));
}

// Multi-head attention; queries from x (n,d), keys/values from kv (m,d);
// full non-causal attention. Head split/merge happens along columns.
template <typename T>
typename Tape<T>::Id multihead_attention(TapeParams<T>& p, typename Tape<T>::Id x,
                                         typename Tape<T>::Id kv, int heads,
                                         const std::string& prefix) {
    Tape<T>& tape = p.tape;
    const int d = tape.cols(x);
    const int dh = d / heads;
    auto q = tape.matmul(x, p(prefix + ".wq"));
    auto k = tape.matmul(kv, p(prefix + ".wk"));
    auto v = tape.matmul(kv, p(prefix + ".wv"));
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
    std::vector<typename Tape<T>::Id> head_out;
    head_out.reserve(heads);
    for (int h = 0; h < heads; ++h) {
        auto qh = tape.slice_cols(q, h * dh, (h + 1) * dh);
        auto kh = tape.slice_cols(k, h * dh, (h + 1) * dh);
        auto vh = tape.slice_cols(v, h * dh, (h + 1) * dh);
        auto scores = tape.mul_scalar(tape.matmul(qh, tape.transpose(kh)), scale);
        auto attn = tape.softmax(scores);
        head_out.push_back(tape.matmul(attn, vh));
    }
    auto merged = heads == 1 ? head_out[0] : tape.concat_cols(head_out);
    return tape.matmul(merged, p(prefix + ".wo"));
}

// Two-layer GELU MLP.
template <typename T>
typename Tape<T>::Id mlp2(TapeParams<T>& p, typename Tape<T>::Id x, const std::string& prefix) {
    auto h = p.tape.gelu(p.tape.add_row(p.tape.matmul(x, p(prefix + ".w1")), p(prefix + ".b1")));
    return p.tape.add_row(p.tape.matmul(h, p(prefix + ".w2")), p(prefix + ".b2"));
}

// Parameter registration helpers (creation order = init order).

template <typename T>
void register_linear(ParamStore<T>& s, const std::string& prefix, int in, int out,
                     std::mt19937_64& rng, bool trainable = true) {
    s.normal(prefix + ".w", in, out, static_cast<T>(1.0 / std::sqrt(static_cast<double>(in))), rng,
             trainable);
    s.zeros(prefix + ".b", 1, out, trainable);
}

template <typename T>
void register_attention(ParamStore<T>& s, const std::string& prefix, int d, std::mt19937_64& rng,
                        bool trainable = true, bool zero_output = false) {
    const T sd = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
    s.normal(prefix + ".wq", d, d, sd, rng, trainable);
    s.normal(prefix + ".wk", d, d, sd, rng, trainable);
    s.normal(prefix + ".wv", d, d, sd, rng, trainable);
    if (zero_output)
        s.zeros(prefix + ".wo", d, d, trainable);
    else
        s.normal(prefix + ".wo", d, d, sd, rng, trainable);
}

template <typename T>
void register_layer_norm(ParamStore<T>& s, const std::string& prefix, int d, bool trainable = true) {
    auto& g = s.zeros(prefix + ".g", 1, d, trainable);
    std::fill(g.value.begin(), g.value.end(), T(1));
    s.zeros(prefix + ".b", 1, d, trainable);
}

template <typename T>
void register_mlp2(ParamStore<T>& s, const std::string& prefix, int d_in, int d_hidden, int d_out,
                   std::mt19937_64& rng, bool trainable = true, bool zero_output = false) {
    s.normal(prefix + ".w1", d_in, d_hidden, static_cast<T>(1.0 / std::sqrt(static_cast<double>(d_in))),
             rng, trainable);
    s.zeros(prefix + ".b1", 1, d_hidden, trainable);
    if (zero_output)
        s.zeros(prefix + ".w2", d_hidden, d_out, trainable);
    else
        s.normal(prefix + ".w2", d_hidden, d_out,
                 static_cast<T>(1.0 / std::sqrt(static_cast<double>(d_hidden))), rng, trainable);
    s.zeros(prefix + ".b2", 1, d_out, trainable);
}

}  // namespace dexflow
