#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dexflow/core/common.hpp"
#include "dexflow/core/kernels.hpp"

namespace dexflow {

// Reverse-mode tape over dense rank<=2 tensors. Nodes are appended in
// construction order, which is a topological order by definition; backward
// walks it in exact reverse and accumulates gradients additively over
// fan-out. One tape per training step; parameters enter as leaf inputs.
template <typename T>
class Tape {
  public:
    using Id = int32_t;

    enum class Op : uint8_t {
        Input,
        Add,
        AddRow,
        AddScalar,
        Mul,
        MulRow,
        MulScalar,
        MatMul,
        Transpose,
        Reshape,
        ConcatRows,
        ConcatCols,
        SliceRows,
        SliceCols,
        Softmax,
        LayerNorm,
        Gelu,
        Tanh,
        Sin,
        Exp,
        Min,
        Clamp,
        GatherRows,
        SumAll,
        MeanAll,
        SumAxis0,
        SumAxis1,
    };

    struct Node {
        Op op;
        int r, c;
        std::vector<Id> args;
        std::vector<int> idx;  // gather indices / slice bounds
        T s0{}, s1{};          // scalar operands (clamp bounds, scale, ln eps)
        std::vector<T> val;
        std::vector<T> grad;
        bool needs_grad = false;
    };

    Id input(int r, int c, std::vector<T> vals, bool requires_grad) {
        if (r <= 0 || c <= 0) throw ContractViolation("input: non-positive shape");
        if (vals.size() != static_cast<size_t>(r) * c)
            throw ContractViolation("input: shape/value size mismatch");
        Node n;
        n.op = Op::Input;
        n.r = r;
        n.c = c;
        n.val = std::move(vals);
        n.needs_grad = requires_grad;
        return push(std::move(n));
    }

    Id constant(int r, int c, std::vector<T> vals) { return input(r, c, std::move(vals), false); }

    Id scalar(T v, bool requires_grad = false) { return input(1, 1, {v}, requires_grad); }

    Id add(Id a, Id b) {
        same_shape(a, b, "add");
        return unary_like(Op::Add, a, {a, b});
    }

    // A (r,c) + row (1,c)
    Id add_row(Id a, Id row) {
        if (node(row).r != 1 || node(row).c != node(a).c)
            throw ContractViolation("add_row: row must be (1, cols)");
        return unary_like(Op::AddRow, a, {a, row});
    }

    Id add_scalar(Id a, T s) {
        Id out = unary_like(Op::AddScalar, a, {a});
        nodes_[out].s0 = s;
        return out;
    }

    Id mul(Id a, Id b) {
        same_shape(a, b, "mul");
        return unary_like(Op::Mul, a, {a, b});
    }

    Id mul_row(Id a, Id row) {
        if (node(row).r != 1 || node(row).c != node(a).c)
            throw ContractViolation("mul_row: row must be (1, cols)");
        return unary_like(Op::MulRow, a, {a, row});
    }

    Id mul_scalar(Id a, T s) {
        Id out = unary_like(Op::MulScalar, a, {a});
        nodes_[out].s0 = s;
        return out;
    }

    Id sub(Id a, Id b) { return add(a, mul_scalar(b, T(-1))); }

    Id matmul(Id a, Id b) {
        const Node& na = node(a);
        const Node& nb = node(b);
        if (na.c != nb.r) throw ContractViolation("matmul: inner dimensions differ");
        Node n;
        n.op = Op::MatMul;
        n.r = na.r;
        n.c = nb.c;
        n.args = {a, b};
        return push(std::move(n));
    }

    Id transpose(Id a) {
        Node n;
        n.op = Op::Transpose;
        n.r = node(a).c;
        n.c = node(a).r;
        n.args = {a};
        return push(std::move(n));
    }

    Id reshape(Id a, int r, int c) {
        if (r * c != node(a).r * node(a).c) throw ContractViolation("reshape: element count differs");
        Node n;
        n.op = Op::Reshape;
        n.r = r;
        n.c = c;
        n.args = {a};
        return push(std::move(n));
    }

    Id concat_rows(const std::vector<Id>& parts) {
        if (parts.empty()) throw ContractViolation("concat_rows: empty");
        int c = node(parts[0]).c, r = 0;
        for (Id p : parts) {
            if (node(p).c != c) throw ContractViolation("concat_rows: column widths differ");
            r += node(p).r;
        }
        Node n;
        n.op = Op::ConcatRows;
        n.r = r;
        n.c = c;
        n.args = parts;
        return push(std::move(n));
    }

    Id concat_cols(const std::vector<Id>& parts) {
        if (parts.empty()) throw ContractViolation("concat_cols: empty");
        int r = node(parts[0]).r, c = 0;
        for (Id p : parts) {
            if (node(p).r != r) throw ContractViolation("concat_cols: row counts differ");
            c += node(p).c;
        }
        Node n;
        n.op = Op::ConcatCols;
        n.r = r;
        n.c = c;
        n.args = parts;
        return push(std::move(n));
    }

    // rows [r0, r1)
    Id slice_rows(Id a, int r0, int r1) {
        if (r0 < 0 || r1 > node(a).r || r0 >= r1) throw ContractViolation("slice_rows: bad range");
        Node n;
        n.op = Op::SliceRows;
        n.r = r1 - r0;
        n.c = node(a).c;
        n.args = {a};
        n.idx = {r0, r1};
        return push(std::move(n));
    }

    Id slice_cols(Id a, int c0, int c1) {
        if (c0 < 0 || c1 > node(a).c || c0 >= c1) throw ContractViolation("slice_cols: bad range");
        Node n;
        n.op = Op::SliceCols;
        n.r = node(a).r;
        n.c = c1 - c0;
        n.args = {a};
        n.idx = {c0, c1};
        return push(std::move(n));
    }

    Id softmax(Id a) { return unary_like(Op::Softmax, a, {a}); }

    Id layer_norm(Id a, T eps = T(1e-5)) {
        Id out = unary_like(Op::LayerNorm, a, {a});
        nodes_[out].s0 = eps;
        return out;
    }

    Id gelu(Id a) { return unary_like(Op::Gelu, a, {a}); }
    Id tanh(Id a) { return unary_like(Op::Tanh, a, {a}); }
    Id sin(Id a) { return unary_like(Op::Sin, a, {a}); }
    Id exp(Id a) { return unary_like(Op::Exp, a, {a}); }

    Id minimum(Id a, Id b) {
        same_shape(a, b, "minimum");
        return unary_like(Op::Min, a, {a, b});
    }

    Id clamp(Id a, T lo, T hi) {
        Id out = unary_like(Op::Clamp, a, {a});
        nodes_[out].s0 = lo;
        nodes_[out].s1 = hi;
        return out;
    }

    Id gather_rows(Id a, std::vector<int> indices) {
        for (int i : indices)
            if (i < 0 || i >= node(a).r) throw ContractViolation("gather_rows: index out of range");
        Node n;
        n.op = Op::GatherRows;
        n.r = static_cast<int>(indices.size());
        n.c = node(a).c;
        n.args = {a};
        n.idx = std::move(indices);
        return push(std::move(n));
    }

    Id sum(Id a) {
        Node n;
        n.op = Op::SumAll;
        n.r = 1;
        n.c = 1;
        n.args = {a};
        return push(std::move(n));
    }

    Id mean(Id a) {
        Node n;
        n.op = Op::MeanAll;
        n.r = 1;
        n.c = 1;
        n.args = {a};
        return push(std::move(n));
    }

    // (r,c) -> (1,c)
    Id sum_axis0(Id a) {
        Node n;
        n.op = Op::SumAxis0;
        n.r = 1;
        n.c = node(a).c;
        n.args = {a};
        return push(std::move(n));
    }

    // (r,c) -> (r,1)
    Id sum_axis1(Id a) {
        Node n;
        n.op = Op::SumAxis1;
        n.r = node(a).r;
        n.c = 1;
        n.args = {a};
        return push(std::move(n));
    }

    int rows(Id a) const { return node(a).r; }
    int cols(Id a) const { return node(a).c; }
    size_t size() const { return nodes_.size(); }

    std::span<const T> value(Id a) const { return node(a).val; }
    std::span<const T> grad_of(Id a) const { return node(a).grad; }

    T value_scalar(Id a) const {
        if (node(a).r != 1 || node(a).c != 1) throw ContractViolation("value_scalar: not a scalar");
        return node(a).val[0];
    }

    // Backward from a scalar loss. Unreachable inputs keep zero gradients.
    void backward(Id loss) {
        Node& ln = nodes_[loss];
        if (ln.r != 1 || ln.c != 1) throw ContractViolation("backward: loss must be scalar");
        if (!std::isfinite(static_cast<double>(ln.val[0])))
            throw NumericFailure("backward: non-finite loss at node " + std::to_string(loss), loss);
        for (auto& n : nodes_) {
            n.grad.assign(n.val.size(), T(0));
        }
        ln.grad[0] = T(1);
        for (Id i = static_cast<Id>(nodes_.size()) - 1; i >= 0; --i) {
            if (i > loss) continue;  // nodes past the loss cannot contribute
            if (!nodes_[i].needs_grad) continue;
            backward_node(i);
        }
    }

    // dLoss/dParam for each param; params untouched by the graph get zeros.
    std::vector<std::vector<T>> grad(Id loss, const std::vector<Id>& params) {
        backward(loss);
        std::vector<std::vector<T>> out;
        out.reserve(params.size());
        for (Id p : params) out.push_back(node(p).grad);
        return out;
    }

  private:
    std::vector<Node> nodes_;

    const Node& node(Id i) const { return nodes_.at(static_cast<size_t>(i)); }

    void same_shape(Id a, Id b, const char* who) const {
        if (node(a).r != node(b).r || node(a).c != node(b).c)
            throw ContractViolation(std::string(who) + ": shape mismatch");
    }

    Id unary_like(Op op, Id shaped, std::vector<Id> args) {
        Node n;
        n.op = op;
        n.r = node(shaped).r;
        n.c = node(shaped).c;
        n.args = std::move(args);
        return push(std::move(n));
    }

    Id push(Node&& n) {
        if (n.op != Op::Input) {
            for (Id a : n.args) n.needs_grad = n.needs_grad || nodes_[a].needs_grad;
            n.val.resize(static_cast<size_t>(n.r) * n.c);
            forward_node(n);
        }
        nodes_.push_back(std::move(n));
        return static_cast<Id>(nodes_.size()) - 1;
    }

    void forward_node(Node& n) {
        const auto arg = [&](int i) -> const Node& { return nodes_[n.args[i]]; };
        const size_t count = n.val.size();
        switch (n.op) {
            case Op::Input:
                break;
            case Op::Add:
                kernels::zip(arg(0).val.data(), arg(1).val.data(), n.val.data(), count,
                             [](T x, T y) { return x + y; });
                break;
            case Op::AddRow: {
                const Node& a = arg(0);
                const Node& row = arg(1);
                for (int i = 0; i < a.r; ++i)
                    for (int j = 0; j < a.c; ++j)
                        n.val[size_t(i) * a.c + j] = a.val[size_t(i) * a.c + j] + row.val[j];
                break;
            }
            case Op::AddScalar: {
                const T s = n.s0;
                kernels::map(arg(0).val.data(), n.val.data(), count, [s](T x) { return x + s; });
                break;
            }
            case Op::Mul:
                kernels::zip(arg(0).val.data(), arg(1).val.data(), n.val.data(), count,
                             [](T x, T y) { return x * y; });
                break;
            case Op::MulRow: {
                const Node& a = arg(0);
                const Node& row = arg(1);
                for (int i = 0; i < a.r; ++i)
                    for (int j = 0; j < a.c; ++j)
                        n.val[size_t(i) * a.c + j] = a.val[size_t(i) * a.c + j] * row.val[j];
                break;
            }
            case Op::MulScalar: {
                const T s = n.s0;
                kernels::map(arg(0).val.data(), n.val.data(), count, [s](T x) { return x * s; });
                break;
            }
            case Op::MatMul:
                kernels::matmul(arg(0).val.data(), arg(1).val.data(), n.val.data(), arg(0).r, arg(0).c,
                                arg(1).c);
                break;
            case Op::Transpose: {
                const Node& a = arg(0);
                for (int i = 0; i < a.r; ++i)
                    for (int j = 0; j < a.c; ++j) n.val[size_t(j) * a.r + i] = a.val[size_t(i) * a.c + j];
                break;
            }
            case Op::Reshape:
                n.val = arg(0).val;
                break;
            case Op::ConcatRows: {
                size_t off = 0;
                for (Id p : n.args) {
                    const Node& a = nodes_[p];
                    std::copy(a.val.begin(), a.val.end(), n.val.begin() + off);
                    off += a.val.size();
                }
                break;
            }
            case Op::ConcatCols: {
                int coff = 0;
                for (Id p : n.args) {
                    const Node& a = nodes_[p];
                    for (int i = 0; i < a.r; ++i)
                        for (int j = 0; j < a.c; ++j)
                            n.val[size_t(i) * n.c + coff + j] = a.val[size_t(i) * a.c + j];
                    coff += a.c;
                }
                break;
            }
            case Op::SliceRows: {
                const Node& a = arg(0);
                const int r0 = n.idx[0];
                std::copy(a.val.begin() + size_t(r0) * a.c, a.val.begin() + size_t(n.idx[1]) * a.c,
                          n.val.begin());
                break;
            }
            case Op::SliceCols: {
                const Node& a = arg(0);
                const int c0 = n.idx[0];
                for (int i = 0; i < a.r; ++i)
                    for (int j = 0; j < n.c; ++j) n.val[size_t(i) * n.c + j] = a.val[size_t(i) * a.c + c0 + j];
                break;
            }
            case Op::Softmax:
                kernels::softmax_rows(arg(0).val.data(), n.val.data(), n.r, n.c);
                break;
            case Op::LayerNorm:
                kernels::layer_norm_rows(arg(0).val.data(), n.val.data(), n.r, n.c, n.s0);
                break;
            case Op::Gelu:
                kernels::map(arg(0).val.data(), n.val.data(), count, [](T x) {
                    return T(0.5) * x * (T(1) + std::erf(x * T(0.7071067811865476)));
                });
                break;
            case Op::Tanh:
                kernels::map(arg(0).val.data(), n.val.data(), count, [](T x) { return std::tanh(x); });
                break;
            case Op::Sin:
                kernels::map(arg(0).val.data(), n.val.data(), count, [](T x) { return std::sin(x); });
                break;
            case Op::Exp:
                kernels::map(arg(0).val.data(), n.val.data(), count, [](T x) { return std::exp(x); });
                break;
            case Op::Min:
                kernels::zip(arg(0).val.data(), arg(1).val.data(), n.val.data(), count,
                             [](T x, T y) { return x <= y ? x : y; });
                break;
            case Op::Clamp: {
                const T lo = n.s0, hi = n.s1;
                kernels::map(arg(0).val.data(), n.val.data(), count,
                             [lo, hi](T x) { return x < lo ? lo : (x > hi ? hi : x); });
                break;
            }
            case Op::GatherRows: {
                const Node& a = arg(0);
                for (int i = 0; i < n.r; ++i)
                    std::copy(a.val.begin() + size_t(n.idx[i]) * a.c,
                              a.val.begin() + size_t(n.idx[i] + 1) * a.c, n.val.begin() + size_t(i) * a.c);
                break;
            }
            case Op::SumAll: {
                T s = T(0);
                for (T v : arg(0).val) s += v;
                n.val[0] = s;
                break;
            }
            case Op::MeanAll: {
                T s = T(0);
                for (T v : arg(0).val) s += v;
                n.val[0] = s / T(arg(0).val.size());
                break;
            }
            case Op::SumAxis0: {
                const Node& a = arg(0);
                std::fill(n.val.begin(), n.val.end(), T(0));
                for (int i = 0; i < a.r; ++i)
                    for (int j = 0; j < a.c; ++j) n.val[j] += a.val[size_t(i) * a.c + j];
                break;
            }
            case Op::SumAxis1: {
                const Node& a = arg(0);
                for (int i = 0; i < a.r; ++i) {
                    T s = T(0);
                    for (int j = 0; j < a.c; ++j) s += a.val[size_t(i) * a.c + j];
                    n.val[i] = s;
                }
                break;
            }
        }
    }

    void backward_node(Id id) {
        Node& n = nodes_[id];
        auto garg = [&](int i) -> Node& { return nodes_[n.args[i]]; };
        auto wants = [&](int i) { return nodes_[n.args[i]].needs_grad; };
        const size_t count = n.val.size();
        switch (n.op) {
            case Op::Input:
                break;
            case Op::Add:
                for (int s = 0; s < 2; ++s)
                    if (wants(s)) {
                        Node& a = garg(s);
                        for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i];
                    }
                break;
            case Op::AddRow: {
                if (wants(0)) {
                    Node& a = garg(0);
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i];
                }
                if (wants(1)) {
                    Node& row = garg(1);
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < n.c; ++j) row.grad[j] += n.grad[size_t(i) * n.c + j];
                }
                break;
            }
            case Op::AddScalar:
                if (wants(0)) {
                    Node& a = garg(0);
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i];
                }
                break;
            case Op::Mul: {
                Node& a = garg(0);
                Node& b = garg(1);
                if (wants(0))
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i] * b.val[i];
                if (wants(1))
                    for (size_t i = 0; i < count; ++i) b.grad[i] += n.grad[i] * a.val[i];
                break;
            }
            case Op::MulRow: {
                Node& a = garg(0);
                Node& row = garg(1);
                if (wants(0))
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < n.c; ++j)
                            a.grad[size_t(i) * n.c + j] += n.grad[size_t(i) * n.c + j] * row.val[j];
                if (wants(1))
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < n.c; ++j)
                            row.grad[j] += n.grad[size_t(i) * n.c + j] * a.val[size_t(i) * n.c + j];
                break;
            }
            case Op::MulScalar:
                if (wants(0)) {
                    Node& a = garg(0);
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i] * n.s0;
                }
                break;
            case Op::MatMul: {
                Node& a = garg(0);
                Node& b = garg(1);
                // dA = g . B^T, dB = A^T . g; accumulated serially to keep
                // additive fan-out exact.
                if (wants(0)) {
                    for (int i = 0; i < a.r; ++i)
                        for (int p = 0; p < a.c; ++p) {
                            T s = T(0);
                            for (int j = 0; j < n.c; ++j)
                                s += n.grad[size_t(i) * n.c + j] * b.val[size_t(p) * n.c + j];
                            a.grad[size_t(i) * a.c + p] += s;
                        }
                }
                if (wants(1)) {
                    for (int p = 0; p < b.r; ++p)
                        for (int j = 0; j < b.c; ++j) {
                            T s = T(0);
                            for (int i = 0; i < a.r; ++i)
                                s += a.val[size_t(i) * a.c + p] * n.grad[size_t(i) * n.c + j];
                            b.grad[size_t(p) * b.c + j] += s;
                        }
                }
                break;
            }
            case Op::Transpose: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < n.c; ++j) a.grad[size_t(j) * n.r + i] += n.grad[size_t(i) * n.c + j];
                break;
            }
            case Op::Reshape:
                if (wants(0)) {
                    Node& a = garg(0);
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i];
                }
                break;
            case Op::ConcatRows: {
                size_t off = 0;
                for (Id p : n.args) {
                    Node& a = nodes_[p];
                    if (a.needs_grad)
                        for (size_t i = 0; i < a.val.size(); ++i) a.grad[i] += n.grad[off + i];
                    off += a.val.size();
                }
                break;
            }
            case Op::ConcatCols: {
                int coff = 0;
                for (Id p : n.args) {
                    Node& a = nodes_[p];
                    if (a.needs_grad)
                        for (int i = 0; i < a.r; ++i)
                            for (int j = 0; j < a.c; ++j)
                                a.grad[size_t(i) * a.c + j] += n.grad[size_t(i) * n.c + coff + j];
                    coff += a.c;
                }
                break;
            }
            case Op::SliceRows: {
                Node& a = garg(0);
                if (wants(0)) {
                    const size_t off = size_t(n.idx[0]) * a.c;
                    for (size_t i = 0; i < count; ++i) a.grad[off + i] += n.grad[i];
                }
                break;
            }
            case Op::SliceCols: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < n.c; ++j)
                            a.grad[size_t(i) * a.c + n.idx[0] + j] += n.grad[size_t(i) * n.c + j];
                break;
            }
            case Op::Softmax: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < n.r; ++i) {
                        const T* y = n.val.data() + size_t(i) * n.c;
                        const T* g = n.grad.data() + size_t(i) * n.c;
                        T dot = T(0);
                        for (int j = 0; j < n.c; ++j) dot += g[j] * y[j];
                        for (int j = 0; j < n.c; ++j) a.grad[size_t(i) * n.c + j] += y[j] * (g[j] - dot);
                    }
                break;
            }
            case Op::LayerNorm: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < n.r; ++i) {
                        const T* x = a.val.data() + size_t(i) * n.c;
                        const T* y = n.val.data() + size_t(i) * n.c;
                        const T* g = n.grad.data() + size_t(i) * n.c;
                        T mean = T(0), var = T(0);
                        for (int j = 0; j < n.c; ++j) mean += x[j];
                        mean /= T(n.c);
                        for (int j = 0; j < n.c; ++j) {
                            const T d = x[j] - mean;
                            var += d * d;
                        }
                        var /= T(n.c);
                        const T inv = T(1) / std::sqrt(var + n.s0);
                        T gmean = T(0), gydot = T(0);
                        for (int j = 0; j < n.c; ++j) {
                            gmean += g[j];
                            gydot += g[j] * y[j];
                        }
                        gmean /= T(n.c);
                        gydot /= T(n.c);
                        for (int j = 0; j < n.c; ++j)
                            a.grad[size_t(i) * n.c + j] += inv * (g[j] - gmean - y[j] * gydot);
                    }
                break;
            }
            case Op::Gelu: {
                Node& a = garg(0);
                if (wants(0))
                    for (size_t i = 0; i < count; ++i) {
                        const T x = a.val[i];
                        const T cdf = T(0.5) * (T(1) + std::erf(x * T(0.7071067811865476)));
                        const T pdf = std::exp(T(-0.5) * x * x) * T(0.3989422804014327);
                        a.grad[i] += n.grad[i] * (cdf + x * pdf);
                    }
                break;
            }
            case Op::Tanh: {
                Node& a = garg(0);
                if (wants(0))
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i] * (T(1) - n.val[i] * n.val[i]);
                break;
            }
            case Op::Sin: {
                Node& a = garg(0);
                if (wants(0))
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i] * std::cos(a.val[i]);
                break;
            }
            case Op::Exp: {
                Node& a = garg(0);
                if (wants(0))
                    for (size_t i = 0; i < count; ++i) a.grad[i] += n.grad[i] * n.val[i];
                break;
            }
            case Op::Min: {
                Node& a = garg(0);
                Node& b = garg(1);
                for (size_t i = 0; i < count; ++i) {
                    if (a.val[i] <= b.val[i]) {
                        if (a.needs_grad) a.grad[i] += n.grad[i];
                    } else if (b.needs_grad) {
                        b.grad[i] += n.grad[i];
                    }
                }
                break;
            }
            case Op::Clamp: {
                Node& a = garg(0);
                if (wants(0))
                    for (size_t i = 0; i < count; ++i)
                        if (a.val[i] >= n.s0 && a.val[i] <= n.s1) a.grad[i] += n.grad[i];
                break;
            }
            case Op::GatherRows: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < n.c; ++j)
                            a.grad[size_t(n.idx[i]) * n.c + j] += n.grad[size_t(i) * n.c + j];
                break;
            }
            case Op::SumAll: {
                Node& a = garg(0);
                if (wants(0))
                    for (size_t i = 0; i < a.val.size(); ++i) a.grad[i] += n.grad[0];
                break;
            }
            case Op::MeanAll: {
                Node& a = garg(0);
                if (wants(0)) {
                    const T s = n.grad[0] / T(a.val.size());
                    for (size_t i = 0; i < a.val.size(); ++i) a.grad[i] += s;
                }
                break;
            }
            case Op::SumAxis0: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < a.r; ++i)
                        for (int j = 0; j < a.c; ++j) a.grad[size_t(i) * a.c + j] += n.grad[j];
                break;
            }
            case Op::SumAxis1: {
                Node& a = garg(0);
                if (wants(0))
                    for (int i = 0; i < a.r; ++i)
                        for (int j = 0; j < a.c; ++j) a.grad[size_t(i) * a.c + j] += n.grad[i];
                break;
            }
        }
    }
};

}  // namespace dexflow
