#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dexflow/core/common.hpp"
#include "dexflow/core/tape.hpp"

namespace dexflow {

// Shape of one leaf fed to a graph builder.
template <typename T>
struct LeafSpec {
    int r, c;
    std::vector<T> values;
};

// Gradient oracle: rebuilds the graph at perturbed inputs and compares the
// tape's analytic gradients against central differences. `build` receives a
// fresh tape plus leaf ids in LeafSpec order and returns the scalar loss id.
//
// Returns max over all entries of |analytic - central| / max(1e-8, |central|).
template <typename T>
double finite_diff_check(
    const std::function<typename Tape<T>::Id(Tape<T>&, const std::vector<typename Tape<T>::Id>&)>& build,
    std::vector<LeafSpec<T>> leaves, double eps) {
    if (eps <= 0) throw ContractViolation("finite_diff_check: eps must be positive");

    auto eval = [&](const std::vector<LeafSpec<T>>& pts, bool with_grad) {
        Tape<T> tape;
        std::vector<typename Tape<T>::Id> ids;
        ids.reserve(pts.size());
        for (const auto& l : pts) ids.push_back(tape.input(l.r, l.c, l.values, with_grad));
        const auto loss = build(tape, ids);
        const T val = tape.value_scalar(loss);
        if (!std::isfinite(static_cast<double>(val)))
            throw NumericFailure("finite_diff_check: non-finite objective", loss);
        std::vector<std::vector<T>> grads;
        if (with_grad) grads = tape.grad(loss, ids);
        return std::pair<T, std::vector<std::vector<T>>>(val, std::move(grads));
    };

    const auto [base_val, analytic] = eval(leaves, true);
    (void)base_val;

    double max_rel = 0.0;
    for (size_t li = 0; li < leaves.size(); ++li) {
        for (size_t j = 0; j < leaves[li].values.size(); ++j) {
            const T saved = leaves[li].values[j];
            leaves[li].values[j] = saved + static_cast<T>(eps);
            const double fp = static_cast<double>(eval(leaves, false).first);
            leaves[li].values[j] = saved - static_cast<T>(eps);
            const double fm = static_cast<double>(eval(leaves, false).first);
            leaves[li].values[j] = saved;
            const double central = (fp - fm) / (2.0 * eps);
            const double rel = std::abs(static_cast<double>(analytic[li][j]) - central) /
                               std::max(1e-8, std::abs(central));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace dexflow
