#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dexflow/core/common.hpp"
#include "dexflow/core/params.hpp"

namespace dexflow {

// Decoupled-weight-decay adaptive-moment optimizer with a cosine learning
// rate schedule: lr(s) = base_lr * 0.5 * (1 + cos(pi * s / horizon)).
// horizon <= 0 keeps the rate constant.
template <typename T>
struct AdamWConfig {
    T base_lr = T(1e-3);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    T weight_decay = T(0);
    long horizon = 0;
};

template <typename T>
class AdamW {
  public:
    explicit AdamW(AdamWConfig<T> cfg) : cfg_(cfg) {}

    long step_count() const { return step_; }
    void set_step_count(long s) { step_ = s; }

    T lr_multiplier() const { return lr_multiplier_at(step_); }

    T lr_multiplier_at(long s) const {
        if (cfg_.horizon <= 0) return T(1);
        const double frac = std::min(1.0, static_cast<double>(s) / static_cast<double>(cfg_.horizon));
        return static_cast<T>(0.5 * (1.0 + std::cos(M_PI * frac)));
    }

    // grads[i] pairs with params[i]; both must be shape-congruent.
    void step(std::vector<Param<T>*>& params, const std::vector<std::vector<T>>& grads) {
        if (params.size() != grads.size()) throw ContractViolation("optimizer_step: count mismatch");
        const T lr = cfg_.base_lr * lr_multiplier();
        const long t = step_ + 1;
        const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg_.beta1), t));
        const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg_.beta2), t));
        for (size_t i = 0; i < params.size(); ++i) {
            Param<T>& p = *params[i];
            const std::vector<T>& g = grads[i];
            if (g.size() != p.value.size())
                throw ContractViolation("optimizer_step: grad shape mismatch for " + p.name);
            if (!p.trainable) continue;
            for (size_t j = 0; j < g.size(); ++j) {
                p.m[j] = cfg_.beta1 * p.m[j] + (T(1) - cfg_.beta1) * g[j];
                p.v[j] = cfg_.beta2 * p.v[j] + (T(1) - cfg_.beta2) * g[j] * g[j];
                const T mhat = p.m[j] / bc1;
                const T vhat = p.v[j] / bc2;
                p.value[j] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.value[j]);
            }
        }
        ++step_;
    }

    const AdamWConfig<T>& config() const { return cfg_; }

  private:
    AdamWConfig<T> cfg_;
    long step_ = 0;
};

}  // namespace dexflow
