#pragma once

#include <string>
#include <vector>

#include "dexflow/model/blocks.hpp"
#include "dexflow/model/config.hpp"

namespace dexflow {

// One observation as the model consumes it (already normalized).
template <typename T>
struct Observation {
    std::vector<T> vision;
    int instruction = 0;
    std::vector<T> proprio;
    std::vector<T> force;
    std::vector<T> tactile;
};

template <typename T>
void register_backbone_params(ParamStore<T>& s, const ModelConfig& cfg, std::mt19937_64& rng) {
    const int d = cfg.d_pali;
    // Prefix stub is frozen after seeded init.
    register_linear(s, "prefix.vision", cfg.d_vision, d, rng, false);
    s.normal("prefix.instr.emb", cfg.n_instructions, d, static_cast<T>(0.5), rng, false);
    register_linear(s, "prefix.proprio", cfg.d_proprio, d, rng, false);
    register_attention(s, "prefix.attn", d, rng, false);
    // Suffix action expert is trainable.
    register_linear(s, "suffix.lift", cfg.action_dim(), d, rng);
    for (int l = 0; l < cfg.suffix_layers; ++l) {
        const std::string p = "suffix.l" + std::to_string(l);
        register_layer_norm(s, p + ".ln1", d);
        register_attention(s, p + ".attn", d, rng);
        register_layer_norm(s, p + ".ln2", d);
        register_mlp2(s, p + ".mlp", d, 4 * d, d, rng);
    }
    // Shared velocity head: arm+other columns and hand columns.
    register_linear(s, "head.arm_other", d, cfg.partition.arm_dim + cfg.partition.other_dim, rng);
    register_linear(s, "head.hand", d, cfg.partition.hand_dim, rng);
}

// Lift vision / instruction / proprioception to one token each and mix them
// with the frozen self-attention layer. S_p = 3.
template <typename T>
typename Tape<T>::Id encode_prefix(TapeParams<T>& p, const ModelConfig& cfg,
                                   const Observation<T>& obs) {
    Tape<T>& tape = p.tape;
    if (static_cast<int>(obs.vision.size()) != cfg.d_vision ||
        static_cast<int>(obs.proprio.size()) != cfg.d_proprio)
        throw ContractViolation("encode_prefix: observation dims disagree with configuration");
    if (obs.instruction < 0 || obs.instruction >= cfg.n_instructions)
        throw ContractViolation("encode_prefix: instruction id out of range");
    auto v_tok = linear(p, tape.constant(1, cfg.d_vision, obs.vision), "prefix.vision");
    auto i_tok = tape.gather_rows(p("prefix.instr.emb"), {obs.instruction});
    auto p_tok = linear(p, tape.constant(1, cfg.d_proprio, obs.proprio), "prefix.proprio");
    auto tokens = tape.concat_rows({v_tok, i_tok, p_tok});
    return tape.add(tokens, multihead_attention(p, tokens, tokens, cfg.heads, "prefix.attn"));
}

// Lift the noisy action rows, add the timestep embedding plus step-positional
// encodings, then run the action-expert layers. Keys/values are drawn from
// [prefix || suffix] in every layer.
template <typename T>
typename Tape<T>::Id encode_suffix(TapeParams<T>& p, const ModelConfig& cfg,
                                   typename Tape<T>::Id x_t, double t,
                                   typename Tape<T>::Id prefix) {
    Tape<T>& tape = p.tape;
    if (t < 0.0 || t > 1.0) throw ContractViolation("encode_suffix: t outside [0,1]");
    if (tape.rows(x_t) != cfg.horizon || tape.cols(x_t) != cfg.action_dim())
        throw ContractViolation("encode_suffix: action chunk shape mismatch");
    const int d = cfg.d_pali;
    auto s = linear(p, x_t, "suffix.lift");
    std::vector<T> enc(static_cast<size_t>(cfg.horizon) * d);
    const std::vector<T> t_emb = sinusoid_encoding<T>(t, d);
    for (int h = 0; h < cfg.horizon; ++h) {
        const std::vector<T> pe = sinusoid_encoding<T>(static_cast<double>(h + 1), d);
        for (int j = 0; j < d; ++j) enc[static_cast<size_t>(h) * d + j] = t_emb[j] + pe[j];
    }
    s = tape.add(s, tape.constant(cfg.horizon, d, std::move(enc)));
    for (int l = 0; l < cfg.suffix_layers; ++l) {
        const std::string lp = "suffix.l" + std::to_string(l);
        auto s_norm = layer_norm_affine(p, s, lp + ".ln1");
        auto kv = tape.concat_rows({prefix, s_norm});
        s = tape.add(s, multihead_attention(p, s_norm, kv, cfg.heads, lp + ".attn"));
        s = tape.add(s, mlp2(p, layer_norm_affine(p, s, lp + ".ln2"), lp + ".mlp"));
    }
    return s;
}

// Linear read-out of suffix tokens to action columns, assembled in
// [arm | hand | other] order from the arm+other and hand projection heads.
template <typename T>
typename Tape<T>::Id project_action_columns(TapeParams<T>& p, const ModelConfig& cfg,
                                            typename Tape<T>::Id arm_other_tokens,
                                            typename Tape<T>::Id hand_tokens) {
    Tape<T>& tape = p.tape;
    auto ao = linear(p, arm_other_tokens, "head.arm_other");
    auto hand = linear(p, hand_tokens, "head.hand");
    const int a = cfg.partition.arm_dim;
    auto arm = tape.slice_cols(ao, 0, a);
    auto other = tape.slice_cols(ao, a, a + cfg.partition.other_dim);
    return tape.concat_cols({arm, hand, other});
}

// Backbone-only prediction path (the baseline model in ablations).
template <typename T>
typename Tape<T>::Id base_velocity(TapeParams<T>& p, const ModelConfig& cfg,
                                   typename Tape<T>::Id suffix) {
    return project_action_columns(p, cfg, suffix, suffix);
}

}  // namespace dexflow
