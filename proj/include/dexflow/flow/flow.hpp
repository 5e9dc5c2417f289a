#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dexflow/core/common.hpp"
#include "dexflow/core/tape.hpp"

namespace dexflow {

// Column layout of one action row: [arm | hand | other]; the trigger scalar
// is the last column of the other group.
struct ActionPartition {
    int arm_dim = 0;
    int hand_dim = 0;
    int other_dim = 0;  // waist dims + trigger

    int total() const { return arm_dim + hand_dim + other_dim; }
    int arm_begin() const { return 0; }
    int arm_end() const { return arm_dim; }
    int hand_begin() const { return arm_dim; }
    int hand_end() const { return arm_dim + hand_dim; }
    int other_begin() const { return arm_dim + hand_dim; }
    int other_end() const { return total(); }
    int trigger_col() const {
        if (other_dim < 1) throw ContractViolation("partition has no trigger column");
        return total() - 1;
    }
};

// t ~ Beta(1.5, 1) via the inverse CDF t = u^(1/1.5); the CDF is t^1.5.
template <typename Rng>
double sample_timestep(Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    return std::pow(u01(rng), 1.0 / 1.5);
}

inline double timestep_from_uniform(double u) {
    if (u < 0.0 || u > 1.0) throw ContractViolation("timestep_from_uniform: u outside [0,1]");
    return std::pow(u, 1.0 / 1.5);
}

// x_t = t*eps + (1-t)*x0, elementwise.
template <typename T>
std::vector<T> interpolate(const std::vector<T>& x0, const std::vector<T>& eps, double t) {
    if (x0.size() != eps.size()) throw ContractViolation("interpolate: shape mismatch");
    std::vector<T> out(x0.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<T>(t) * eps[i] + (T(1) - static_cast<T>(t)) * x0[i];
    return out;
}

// Mean squared error against the flow-matching target (eps - x0).
template <typename T>
T fm_loss_value(const std::vector<T>& v_pred, const std::vector<T>& x0, const std::vector<T>& eps) {
    if (v_pred.size() != x0.size() || x0.size() != eps.size())
        throw ContractViolation("fm_loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < v_pred.size(); ++i) {
        const double d = static_cast<double>(v_pred[i]) - (static_cast<double>(eps[i]) - static_cast<double>(x0[i]));
        if (!std::isfinite(d)) throw NumericFailure("fm_loss: non-finite input", static_cast<long>(i));
        acc += d * d;
    }
    return static_cast<T>(acc / static_cast<double>(v_pred.size()));
}

// Tape version: target enters as a constant, loss is mean((v - target)^2).
template <typename T>
typename Tape<T>::Id fm_loss(Tape<T>& tape, typename Tape<T>::Id v_pred, const std::vector<T>& x0,
                             const std::vector<T>& eps) {
    const int r = tape.rows(v_pred), c = tape.cols(v_pred);
    if (x0.size() != static_cast<size_t>(r) * c || eps.size() != x0.size())
        throw ContractViolation("fm_loss: shape mismatch");
    std::vector<T> target(x0.size());
    for (size_t i = 0; i < target.size(); ++i) {
        target[i] = eps[i] - x0[i];
        if (!std::isfinite(static_cast<double>(target[i])))
            throw NumericFailure("fm_loss: non-finite target", static_cast<long>(i));
    }
    const auto tgt = tape.constant(r, c, std::move(target));
    const auto diff = tape.sub(v_pred, tgt);
    return tape.mean(tape.mul(diff, diff));
}

// Euler integration of the learned field from t=1 (noise) to t=0 (action),
// dt = -1/N. velocity_fn(x, t) returns a buffer congruent with x.
template <typename T, typename VelocityFn>
std::vector<T> euler_sample(VelocityFn&& velocity_fn, std::vector<T> x, int n_steps) {
    if (n_steps < 1) throw ContractViolation("euler_sample: N must be >= 1");
    const double dt = -1.0 / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        const double t = 1.0 - static_cast<double>(s) / n_steps;
        const std::vector<T> v = velocity_fn(x, t);
        if (v.size() != x.size()) throw ContractViolation("euler_sample: velocity shape mismatch");
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] += static_cast<T>(dt) * v[i];
            if (!std::isfinite(static_cast<double>(x[i])))
                throw NumericFailure("euler_sample: non-finite state at step " + std::to_string(s), s);
        }
    }
    return x;
}

}  // namespace dexflow
