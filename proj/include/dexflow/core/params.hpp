#pragma once

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dexflow/core/common.hpp"
#include "dexflow/core/tape.hpp"

namespace dexflow {

// Named parameter with AdamW moment buffers. Creation order is the
// deterministic init order; frozen params are fed to tapes without grad and
// skipped by the optimizer.
template <typename T>
struct Param {
    std::string name;
    int r = 0, c = 0;
    std::vector<T> value;
    std::vector<T> m, v;
    bool trainable = true;
};

template <typename T>
class ParamStore {
  public:
    Param<T>& create(const std::string& name, int r, int c, bool trainable = true) {
        if (index_.count(name)) throw ContractViolation("param exists: " + name);
        Param<T> p;
        p.name = name;
        p.r = r;
        p.c = c;
        p.value.assign(static_cast<size_t>(r) * c, T(0));
        p.m.assign(p.value.size(), T(0));
        p.v.assign(p.value.size(), T(0));
        p.trainable = trainable;
        index_[name] = params_.size();
        params_.push_back(std::move(p));
        return params_.back();
    }

    Param<T>& normal(const std::string& name, int r, int c, T stddev, std::mt19937_64& rng,
                     bool trainable = true) {
        Param<T>& p = create(name, r, c, trainable);
        std::normal_distribution<double> d(0.0, static_cast<double>(stddev));
        for (auto& v : p.value) v = static_cast<T>(d(rng));
        return p;
    }

    Param<T>& zeros(const std::string& name, int r, int c, bool trainable = true) {
        return create(name, r, c, trainable);
    }

    Param<T>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ContractViolation("unknown param: " + name);
        return params_[it->second];
    }
    const Param<T>& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ContractViolation("unknown param: " + name);
        return params_[it->second];
    }
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::vector<Param<T>>& all() { return params_; }
    const std::vector<Param<T>>& all() const { return params_; }
    size_t count() const { return params_.size(); }

    // Leaf node for one forward/backward pass.
    typename Tape<T>::Id leaf(Tape<T>& tape, const std::string& name) const {
        const Param<T>& p = at(name);
        return tape.input(p.r, p.c, p.value, p.trainable);
    }

  private:
    std::vector<Param<T>> params_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace dexflow
