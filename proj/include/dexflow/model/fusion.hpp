#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dexflow/model/backbone.hpp"

namespace dexflow {

// One routed token: selected expert, its gate probability, and the full
// router distribution.
struct RouterAssignment {
    int expert = 0;
    double gate = 0.0;
    std::vector<double> probs;

    double entropy() const {
        double h = 0.0;
        for (double p : probs)
            if (p > 0.0) h -= p * std::log(p);
        return h;
    }
};

// Routing diagnostics for one velocity evaluation: assignments for the H
// force tokens then the H tactile tokens, plus the load-balance value.
struct FusionDiag {
    std::vector<RouterAssignment> force;
    std::vector<RouterAssignment> tactile;
    double aux_loss = 0.0;

    std::vector<long> utilization(int experts) const {
        std::vector<long> counts(experts, 0);
        for (const auto& a : force) ++counts[a.expert];
        for (const auto& a : tactile) ++counts[a.expert];
        return counts;
    }
};

template <typename T>
void register_fusion_params(ParamStore<T>& s, const ModelConfig& cfg, std::mt19937_64& rng) {
    const int d = cfg.d_pali;
    register_linear(s, "fusion.force", cfg.d_force, d, rng);
    register_linear(s, "fusion.tactile", cfg.d_tactile, d, rng);
    register_attention(s, "fusion.attn", d, rng);
    register_layer_norm(s, "fusion.ln", d);
    register_linear(s, "fusion.router", d, cfg.experts, rng);
    for (int e = 0; e < cfg.experts; ++e)
        register_mlp2(s, "fusion.exp" + std::to_string(e), d, 4 * d, d, rng);
    // Injection adapters start at zero so the fused velocity coincides with
    // the backbone path until training moves them.
    s.zeros("fusion.out.force.w", d, d);
    s.zeros("fusion.out.tactile.w", d, d);
}

template <typename T>
void register_policy_params(ParamStore<T>& s, const ModelConfig& cfg, uint64_t seed) {
    std::mt19937_64 rng(seed);
    register_backbone_params(s, cfg, rng);
    register_fusion_params(s, cfg, rng);
}

// z = W.reading + b with the modality's own weights.
template <typename T>
typename Tape<T>::Id project_modal(TapeParams<T>& p, const ModelConfig& cfg,
                                   const std::vector<T>& reading, const std::string& modality) {
    const int want = modality == "force" ? cfg.d_force : cfg.d_tactile;
    if (static_cast<int>(reading.size()) != want)
        throw ContractViolation("project_modal: " + modality + " reading length " +
                                std::to_string(reading.size()) + " != configured " +
                                std::to_string(want));
    return linear(p, p.tape.constant(1, want, reading), "fusion." + modality);
}

// Replicate the embedding across the horizon and add step encodings:
// row h = z + PE(h), h = 1..H.
template <typename T>
typename Tape<T>::Id tile_with_pe(Tape<T>& tape, typename Tape<T>::Id z, int horizon) {
    if (horizon < 1) throw ContractViolation("tile_with_pe: H must be >= 1");
    const int d = tape.cols(z);
    auto tiled = tape.matmul(tape.constant(horizon, 1, std::vector<T>(horizon, T(1))), z);
    std::vector<T> pe(static_cast<size_t>(horizon) * d);
    for (int h = 0; h < horizon; ++h) {
        const auto row = sinusoid_encoding<T>(static_cast<double>(h + 1), d);
        std::copy(row.begin(), row.end(), pe.begin() + static_cast<size_t>(h) * d);
    }
    return tape.add(tiled, tape.constant(horizon, d, std::move(pe)));
}

struct StreamBoundaries {
    int suffix_begin, force_begin, tactile_begin, end;
};

// [prefix || suffix || force || tactile] along the sequence axis.
template <typename T>
typename Tape<T>::Id concat_streams(Tape<T>& tape, typename Tape<T>::Id prefix,
                                    typename Tape<T>::Id suffix, typename Tape<T>::Id zf,
                                    typename Tape<T>::Id zg, StreamBoundaries* bounds = nullptr) {
    const int sp = tape.rows(prefix);
    const int h = tape.rows(suffix);
    if (tape.rows(zf) != h || tape.rows(zg) != h)
        throw ContractViolation("concat_streams: modal streams must span the action horizon");
    if (bounds) *bounds = {sp, sp + h, sp + 2 * h, sp + 3 * h};
    return tape.concat_rows({prefix, suffix, zf, zg});
}

// Self-attention over the concatenated sequence with residual connection and
// layer norm (affine at identity init).
template <typename T>
typename Tape<T>::Id mode_attention(TapeParams<T>& p, const ModelConfig& cfg,
                                    typename Tape<T>::Id z_in) {
    auto attended = p.tape.add(z_in, multihead_attention(p, z_in, z_in, cfg.heads, "fusion.attn"));
    return layer_norm_affine(p, attended, "fusion.ln");
}

// Top-1 selection from a router probability row; ties break toward the
// lowest expert index.
inline int route_top1(const std::vector<double>& probs) {
    int best = 0;
    for (size_t e = 1; e < probs.size(); ++e)
        if (probs[e] > probs[best]) best = static_cast<int>(e);
    return best;
}

// Token-level MoE over the modal tokens: softmax router, top-1 scatter
// routing, out = token + gate * MLP_e(token). Gradient flows through the
// selected expert and its gate probability only.
template <typename T>
typename Tape<T>::Id moe_stage(TapeParams<T>& p, const ModelConfig& cfg,
                               typename Tape<T>::Id tokens,
                               std::vector<RouterAssignment>* assignments,
                               typename Tape<T>::Id* aux_loss_out) {
    Tape<T>& tape = p.tape;
    const int n = tape.rows(tokens);
    const int d = tape.cols(tokens);
    const int E = cfg.experts;
    auto probs = tape.softmax(linear(p, tokens, "fusion.router"));
    const auto pv = tape.value(probs);

    std::vector<int> selected(n);
    std::vector<T> onehot(static_cast<size_t>(n) * E, T(0));
    std::vector<std::vector<int>> by_expert(E);
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(pv.begin() + static_cast<size_t>(i) * E,
                                pv.begin() + static_cast<size_t>(i + 1) * E);
        const int e = route_top1(row);
        selected[i] = e;
        onehot[static_cast<size_t>(i) * E + e] = T(1);
        by_expert[e].push_back(i);
        if (assignments) {
            RouterAssignment a;
            a.expert = e;
            a.gate = row[e];
            a.probs = std::move(row);
            assignments->push_back(std::move(a));
        }
    }

    // gate_i = probs[i, selected_i], kept differentiable through the mask.
    auto gates = tape.sum_axis1(tape.mul(probs, tape.constant(n, E, onehot)));

    // Scatter: group rows per expert, apply its MLP, then gather back into
    // original token order.
    std::vector<typename Tape<T>::Id> outputs;
    std::vector<int> position(n);
    int cursor = 0;
    for (int e = 0; e < E; ++e) {
        if (by_expert[e].empty()) continue;
        auto grouped = tape.gather_rows(tokens, by_expert[e]);
        outputs.push_back(mlp2(p, grouped, "fusion.exp" + std::to_string(e)));
        for (int i : by_expert[e]) position[i] = cursor++;
    }
    auto stacked = outputs.size() == 1 ? outputs[0] : tape.concat_rows(outputs);
    auto expert_out = tape.gather_rows(stacked, position);

    auto gate_tile = tape.matmul(gates, tape.constant(1, d, std::vector<T>(d, T(1))));
    auto refined = tape.add(tokens, tape.mul(gate_tile, expert_out));

    if (aux_loss_out) {
        // mean over experts of fraction-routed * mean-probability * E.
        std::vector<T> frac(E);
        for (int e = 0; e < E; ++e) frac[e] = static_cast<T>(by_expert[e].size()) / static_cast<T>(n);
        auto mean_prob = tape.mul_scalar(tape.sum_axis0(probs), T(1) / static_cast<T>(n));
        *aux_loss_out = tape.sum(tape.mul(mean_prob, tape.constant(1, E, frac)));
    }
    return refined;
}

// Modality-specific residual injection (arm+other columns ride the force
// path, hand columns the tactile path).
template <typename T>
typename Tape<T>::Id residual_inject(TapeParams<T>& p, const ModelConfig& cfg,
                                     typename Tape<T>::Id zf, typename Tape<T>::Id zg,
                                     typename Tape<T>::Id suffix) {
    Tape<T>& tape = p.tape;
    if (tape.rows(zf) != cfg.horizon || tape.rows(zg) != cfg.horizon ||
        tape.cols(zf) != cfg.d_pali || tape.cols(zg) != cfg.d_pali)
        throw ContractViolation("residual_inject: refined token shape mismatch");
    return project_action_columns(p, cfg, tape.add(zf, suffix), tape.add(zg, suffix));
}

// Full fused velocity: prefix/suffix encoding, modal token construction,
// concatenated self-attention, MoE refinement, residual injection.
template <typename T>
typename Tape<T>::Id mode_velocity(TapeParams<T>& p, const ModelConfig& cfg,
                                   const VariantFlags& flags, const Observation<T>& obs,
                                   typename Tape<T>::Id x_t, double t, FusionDiag* diag = nullptr,
                                   typename Tape<T>::Id* aux_loss_out = nullptr) {
    Tape<T>& tape = p.tape;
    auto prefix = encode_prefix(p, cfg, obs);
    auto suffix = encode_suffix(p, cfg, x_t, t, prefix);
    if (flags.backbone_only) {
        if (aux_loss_out) *aux_loss_out = -1;
        return base_velocity(p, cfg, suffix);
    }

    auto zf = tile_with_pe(tape, project_modal(p, cfg, obs.force, "force"), cfg.horizon);
    auto zg = tile_with_pe(tape, project_modal(p, cfg, obs.tactile, "tactile"), cfg.horizon);

    typename Tape<T>::Id modal_in;
    if (flags.single_stream_diag) {
        modal_in = tape.concat_rows({zf, zg});
    } else {
        StreamBoundaries bounds{};
        auto z_all = concat_streams(tape, prefix, suffix, zf, zg, &bounds);
        auto attended = mode_attention(p, cfg, z_all);
        modal_in = tape.slice_rows(attended, bounds.force_begin, bounds.end);
    }

    std::vector<RouterAssignment> assignments;
    typename Tape<T>::Id aux = -1;
    auto refined = moe_stage(p, cfg, modal_in, diag ? &assignments : nullptr,
                             aux_loss_out ? &aux : nullptr);
    if (aux_loss_out) *aux_loss_out = aux;
    if (diag) {
        diag->force.assign(assignments.begin(), assignments.begin() + cfg.horizon);
        diag->tactile.assign(assignments.begin() + cfg.horizon, assignments.end());
        if (aux_loss_out && aux >= 0) diag->aux_loss = static_cast<double>(tape.value_scalar(aux));
    }

    auto zf_out = tape.matmul(tape.slice_rows(refined, 0, cfg.horizon), p("fusion.out.force.w"));
    auto zg_out =
        tape.matmul(tape.slice_rows(refined, cfg.horizon, 2 * cfg.horizon), p("fusion.out.tactile.w"));
    return residual_inject(p, cfg, zf_out, zg_out, suffix);
}

}  // namespace dexflow
