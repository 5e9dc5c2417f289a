#pragma once

#include <string>

#include "dexflow/core/common.hpp"
#include "dexflow/flow/flow.hpp"

namespace dexflow {

// Model geometry. Defaults are desk-scale; the published-scale values
// (H=50, d_f=14, d_g=60, 768 image tokens) remain valid configurations.
struct ModelConfig {
    int d_pali = 64;
    int horizon = 8;        // H
    int experts = 8;        // E
    int euler_steps = 10;   // N
    int suffix_layers = 2;  // L_sfx
    int heads = 4;

    int d_vision = 8;
    int n_instructions = 4;
    int d_proprio = 6;
    int d_force = 14;
    int d_tactile = 60;

    ActionPartition partition{2, 2, 2};

    double aux_coeff = 0.01;
    bool aux_loss = true;

    int action_dim() const { return partition.total(); }
    int prefix_tokens() const { return 3; }  // vision, instruction, proprio

    void validate() const {
        if (d_pali < 2 || d_pali % (2 * heads) != 0)
            throw ContractViolation("d_pali must be an even multiple of heads");
        if (horizon < 1) throw ContractViolation("horizon must be >= 1");
        if (experts < 1) throw ContractViolation("experts must be >= 1");
        if (partition.total() < 2 || partition.other_dim < 1)
            throw ContractViolation("action partition needs arm/hand/other with a trigger column");
    }
};

// Ablation and dispatch switches. Readings are zeroed at the input so every
// variant keeps an identical parameter set; backbone_only skips the fusion
// pathway entirely (the velocity head is shared, so an untrained fusion
// model and the backbone-only path coincide).
struct VariantFlags {
    bool use_force = true;
    bool use_tactile = true;
    bool use_copilot = true;
    bool backbone_only = false;
    bool single_stream_diag = false;  // bypass the fusion attention stage

    static VariantFlags from_name(const std::string& name) {
        VariantFlags f;
        if (name == "full") return f;
        if (name == "no-force") {
            f.use_force = false;
            return f;
        }
        if (name == "no-tactile") {
            f.use_tactile = false;
            return f;
        }
        if (name == "no-copilot") {
            f.use_copilot = false;
            return f;
        }
        if (name == "baseline") {
            f.backbone_only = true;
            f.use_copilot = false;
            return f;
        }
        throw ContractViolation("unknown variant: " + name);
    }

    std::string name() const {
        if (backbone_only) return "baseline";
        if (!use_force) return "no-force";
        if (!use_tactile) return "no-tactile";
        if (!use_copilot) return "no-copilot";
        return "full";
    }
};

}  // namespace dexflow
