#include "ssfgnet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssfgnet/error.hpp"

namespace ssfgnet::ad {

const char* op_name(OpKind kind) {
    switch (kind) {
    case OpKind::Constant: return "constant";
    case OpKind::Param: return "param";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::Relu: return "relu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Elu: return "elu";
    case OpKind::LeakyRelu: return "leaky_relu";
    case OpKind::Scale: return "scale";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::SegmentSum: return "segment_sum";
    case OpKind::SegmentMean: return "segment_mean";
    case OpKind::SegmentSoftmax: return "segment_softmax";
    case OpKind::BatchNorm: return "batch_norm";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::CrossEntropy: return "cross_entropy";
    case OpKind::L1Loss: return "l1_loss";
    case OpKind::Custom: return "custom";
    }
    return "?";
}

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

const Tensor& Var::value() const {
    if (!tape) throw ContractError("value() on an unbound Var");
    return tape->value(id);
}

// Tape ------------------------------------------------------------------

Var Tape::constant(Tensor value) {
    Node n;
    n.kind = OpKind::Constant;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
    Node n;
    n.kind = OpKind::Param;
    n.value = p.value;
    n.requires_grad = true;
    Parameter* target = &p;
    n.backward = [target](Tape&, const Tensor& g) {
        if (target->grad.shape() != target->value.shape()) target->grad = Tensor(target->value.shape());
        target->grad.add_inplace(g);
    };
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::record(OpKind kind, std::vector<std::size_t> parents, Tensor value, BackwardFn fn) {
    Node n;
    n.kind = kind;
    for (auto p : parents) {
        if (p >= nodes_.size()) throw ContractError("record: parent id out of range");
        n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
    }
    n.parents = std::move(parents);
    n.value = std::move(value);
    if (n.requires_grad) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Tensor& Tape::grad_slot(std::size_t id) {
    auto& n = nodes_.at(id);
    if (!n.has_grad) {
        if (n.grad.shape() != n.value.shape()) {
            n.grad = Tensor(n.value.shape());
        } else {
            n.grad.fill(0.0);
        }
        n.has_grad = true;
    }
    return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
    if (!nodes_.at(id).requires_grad) return;
    grad_slot(id).add_inplace(g);
}

const Tensor* Tape::grad(Var v) const {
    const auto& n = nodes_.at(v.id);
    return n.has_grad ? &n.grad : nullptr;
}

void Tape::backward(Var root) {
    if (root.tape != this) throw ContractError("backward: root belongs to another tape");
    if (value(root.id).numel() != 1) {
        throw ContractError("backward: root must be scalar, got shape " + shape_str(value(root.id).shape()));
    }
    for (auto& n : nodes_) n.has_grad = false;
    grad_slot(root.id).fill(1.0);
    for (std::size_t id = root.id + 1; id-- > 0;) {
        auto& n = nodes_[id];
        if (!n.has_grad || !n.backward) continue;
        n.backward(*this, n.grad);
    }
}

namespace {

Tape& same_tape(Var a, Var b) {
    if (!a.tape || a.tape != b.tape) throw ContractError("operands live on different tapes");
    return *a.tape;
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(t.shape()));
}

enum class Bcast { Same, Row, Col };

Bcast resolve_broadcast(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Bcast::Same;
    if (a.rank() == 2) {
        const auto n = a.shape()[0];
        const auto d = a.shape()[1];
        if ((b.rank() == 1 && b.shape()[0] == d) || (b.rank() == 2 && b.shape()[0] == 1 && b.shape()[1] == d)) {
            return Bcast::Row;
        }
        if (b.rank() == 2 && b.shape()[0] == n && b.shape()[1] == 1) return Bcast::Col;
    }
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
}

inline std::size_t b_index(Bcast mode, std::size_t i, std::size_t d) {
    switch (mode) {
    case Bcast::Same: return i;
    case Bcast::Row: return i % d;
    case Bcast::Col: return i / d;
    }
    return i;
}

template <class Fwd, class DA, class DB>
Var binary(OpKind kind, const char* name, Var a, Var b, Fwd fwd, DA da, DB db) {
    Tape& t = same_tape(a, b);
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    const Bcast mode = resolve_broadcast(av, bv, name);
    const std::size_t d = av.rank() == 2 ? av.shape()[1] : av.numel();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.numel(); ++i) out[i] = fwd(av[i], bv[b_index(mode, i, d)]);
    return t.record(kind, {a.id, b.id}, std::move(out), [a = a.id, b = b.id, mode, d, da, db](Tape& tp, const Tensor& g) {
        const Tensor& x = tp.value(a);
        const Tensor& y = tp.value(b);
        if (tp.requires_grad(a)) {
            Tensor& ga = tp.grad_slot(a);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += da(g[i], x[i], y[b_index(mode, i, d)]);
        }
        if (tp.requires_grad(b)) {
            Tensor& gb = tp.grad_slot(b);
            for (std::size_t i = 0; i < g.numel(); ++i) gb[b_index(mode, i, d)] += db(g[i], x[i], y[b_index(mode, i, d)]);
        }
    });
}

template <class Fwd, class Deriv>
Var unary(OpKind kind, Var a, Fwd fwd, Deriv deriv) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.numel(); ++i) out[i] = fwd(av[i]);
    const std::size_t self = t.size();
    return t.record(kind, {a.id}, std::move(out), [a = a.id, self, deriv](Tape& tp, const Tensor& g) {
        const Tensor& x = tp.value(a);
        const Tensor& y = tp.value(self);
        Tensor& ga = tp.grad_slot(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
    });
}

void check_segments(const std::vector<std::size_t>& segment, std::size_t rows, std::size_t n, const char* op) {
    if (segment.size() != rows) {
        throw DimensionError(std::string(op) + ": " + std::to_string(segment.size()) + " segment ids for " +
                             std::to_string(rows) + " rows");
    }
    for (std::size_t e = 0; e < segment.size(); ++e) {
        if (segment[e] >= n) {
            throw IndexError(std::string(op) + ": edge " + std::to_string(e) + " targets node " +
                             std::to_string(segment[e]) + " but n = " + std::to_string(n));
        }
    }
}

} // namespace

// Dense ops -------------------------------------------------------------

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_rank2(av, "matmul");
    require_rank2(bv, "matmul");
    const auto m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
    if (bv.shape()[0] != k) {
        throw DimensionError("matmul: inner extents differ, " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double* o = &out[i * n];
        for (std::size_t p = 0; p < k; ++p) {
            const double s = av[i * k + p];
            if (s == 0.0) continue;
            const double* br = &bv[p * n];
            for (std::size_t j = 0; j < n; ++j) o[j] += s * br[j];
        }
    }
    return t.record(OpKind::MatMul, {a.id, b.id}, std::move(out), [a = a.id, b = b.id, m, k, n](Tape& tp, const Tensor& g) {
        const Tensor& x = tp.value(a);
        const Tensor& y = tp.value(b);
        if (tp.requires_grad(a)) {
            // dA = G * B^T
            Tensor& ga = tp.grad_slot(a);
            for (std::size_t i = 0; i < m; ++i) {
                const double* gr = &g[i * n];
                for (std::size_t p = 0; p < k; ++p) {
                    const double* yr = &y[p * n];
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += gr[j] * yr[j];
                    ga[i * k + p] += acc;
                }
            }
        }
        if (tp.requires_grad(b)) {
            // dB = A^T * G
            Tensor& gb = tp.grad_slot(b);
            for (std::size_t i = 0; i < m; ++i) {
                const double* gr = &g[i * n];
                for (std::size_t p = 0; p < k; ++p) {
                    const double s = x[i * k + p];
                    if (s == 0.0) continue;
                    double* br = &gb[p * n];
                    for (std::size_t j = 0; j < n; ++j) br[j] += s * gr[j];
                }
            }
        }
    });
}

Var add(Var a, Var b) {
    return binary(
        OpKind::Add, "add", a, b, [](double x, double y) { return x + y; },
        [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

Var sub(Var a, Var b) {
    return binary(
        OpKind::Sub, "sub", a, b, [](double x, double y) { return x - y; },
        [](double g, double, double) { return g; }, [](double g, double, double) { return -g; });
}

Var mul(Var a, Var b) {
    return binary(
        OpKind::Mul, "mul", a, b, [](double x, double y) { return x * y; },
        [](double g, double, double y) { return g * y; }, [](double g, double x, double) { return g * x; });
}

Var div(Var a, Var b) {
    return binary(
        OpKind::Div, "div", a, b, [](double x, double y) { return x / y; },
        [](double g, double, double y) { return g / y; }, [](double g, double x, double y) { return -g * x / (y * y); });
}

Var relu(Var a) {
    return unary(
        OpKind::Relu, a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
    return unary(
        OpKind::Sigmoid, a,
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
    return unary(
        OpKind::Tanh, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var elu(Var a, double alpha) {
    return unary(
        OpKind::Elu, a, [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); },
        [alpha](double x, double y) { return x > 0.0 ? 1.0 : y + alpha; });
}

Var leaky_relu(Var a, double slope) {
    return unary(
        OpKind::LeakyRelu, a, [slope](double x) { return x > 0.0 ? x : slope * x; },
        [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var scale(Var a, double s) {
    return unary(
        OpKind::Scale, a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
    return unary(
        OpKind::Add, a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var elementwise(Elementwise kind, Var a, Var b) {
    switch (kind) {
    case Elementwise::Add: return add(a, b);
    case Elementwise::Sub: return sub(a, b);
    case Elementwise::Mul: return mul(a, b);
    case Elementwise::Relu: return relu(a);
    case Elementwise::Sigmoid: return sigmoid(a);
    case Elementwise::Tanh: return tanh(a);
    }
    throw ContractError("elementwise: unknown kind");
}

Var concat_cols(Var a, Var b) {
    const Var parts[] = {a, b};
    return concat_cols(parts);
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_cols: no operands");
    Tape& t = *parts.front().tape;
    const std::size_t n = t.value(parts.front().id).rows();
    std::vector<std::size_t> ids, widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p.tape != &t) throw ContractError("concat_cols: operands live on different tapes");
        const Tensor& v = t.value(p.id);
        require_rank2(v, "concat_cols");
        if (v.shape()[0] != n) {
            throw DimensionError("concat_cols: row counts differ (" + std::to_string(n) + " vs " +
                                 std::to_string(v.shape()[0]) + ")");
        }
        ids.push_back(p.id);
        widths.push_back(v.shape()[1]);
        total += v.shape()[1];
    }
    Tensor out({n, total});
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Tensor& v = t.value(ids[k]);
        for (std::size_t r = 0; r < n; ++r) {
            std::copy_n(&v.storage()[r * widths[k]], widths[k], &out.storage()[r * total + off]);
        }
        off += widths[k];
    }
    auto parents = ids;
    return t.record(OpKind::ConcatCols, std::move(parents), std::move(out),
                    [ids, widths, n, total](Tape& tp, const Tensor& g) {
                        std::size_t off = 0;
                        for (std::size_t k = 0; k < ids.size(); ++k) {
                            if (tp.requires_grad(ids[k]) && widths[k] > 0) {
                                Tensor& gk = tp.grad_slot(ids[k]);
                                for (std::size_t r = 0; r < n; ++r) {
                                    for (std::size_t c = 0; c < widths[k]; ++c) {
                                        gk[r * widths[k] + c] += g[r * total + off + c];
                                    }
                                }
                            }
                            off += widths[k];
                        }
                    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
    Tape& t = *a.tape;
    const Tensor& v = t.value(a.id);
    require_rank2(v, "slice_cols");
    const auto n = v.shape()[0], d = v.shape()[1];
    if (begin + count > d) {
        throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                             ") exceed width " + std::to_string(d));
    }
    Tensor out({n, count});
    for (std::size_t r = 0; r < n; ++r) {
        std::copy_n(&v.storage()[r * d + begin], count, &out.storage()[r * count]);
    }
    return t.record(OpKind::SliceCols, {a.id}, std::move(out), [a = a.id, n, d, begin, count](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad_slot(a);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < count; ++c) ga[r * d + begin + c] += g[r * count + c];
        }
    });
}

Var gather_rows(Var a, std::vector<std::size_t> index) {
    Tape& t = *a.tape;
    const Tensor& v = t.value(a.id);
    require_rank2(v, "gather_rows");
    const auto n = v.shape()[0], d = v.shape()[1];
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= n) {
            throw IndexError("gather_rows: entry " + std::to_string(k) + " selects row " + std::to_string(index[k]) +
                             " of " + std::to_string(n));
        }
    }
    Tensor out({index.size(), d});
    for (std::size_t k = 0; k < index.size(); ++k) {
        std::copy_n(&v.storage()[index[k] * d], d, &out.storage()[k * d]);
    }
    return t.record(OpKind::GatherRows, {a.id}, std::move(out), [a = a.id, d, index = std::move(index)](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad_slot(a);
        for (std::size_t k = 0; k < index.size(); ++k) {
            double* dst = &ga[index[k] * d];
            const double* src = &g[k * d];
            for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
        }
    });
}

// Segment ops -----------------------------------------------------------

Var segment_reduce(Reduce kind, Var values, std::vector<std::size_t> segment, std::size_t n) {
    Tape& t = *values.tape;
    const Tensor& v = t.value(values.id);
    require_rank2(v, "segment_reduce");
    const auto e = v.shape()[0], d = v.shape()[1];
    check_segments(segment, e, n, "segment_reduce");
    Tensor out({n, d});
    std::vector<double> inv_count(n, 1.0);
    if (kind == Reduce::Mean) {
        std::vector<std::size_t> count(n, 0);
        for (auto s : segment) ++count[s];
        for (std::size_t i = 0; i < n; ++i) inv_count[i] = count[i] ? 1.0 / static_cast<double>(count[i]) : 0.0;
    }
    for (std::size_t k = 0; k < e; ++k) {
        double* dst = &out[segment[k] * d];
        const double* src = &v[k * d];
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    if (kind == Reduce::Mean) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < d; ++c) out[i * d + c] *= inv_count[i];
        }
    }
    const OpKind op = kind == Reduce::Sum ? OpKind::SegmentSum : OpKind::SegmentMean;
    return t.record(op, {values.id}, std::move(out),
                    [a = values.id, d, segment = std::move(segment), inv_count = std::move(inv_count)](Tape& tp, const Tensor& g) {
                        Tensor& ga = tp.grad_slot(a);
                        for (std::size_t k = 0; k < segment.size(); ++k) {
                            const double w = inv_count[segment[k]];
                            const double* src = &g[segment[k] * d];
                            double* dst = &ga[k * d];
                            for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
                        }
                    });
}

Var segment_softmax(Var scores, std::vector<std::size_t> segment, std::size_t n) {
    Tape& t = *scores.tape;
    const Tensor& v = t.value(scores.id);
    require_rank2(v, "segment_softmax");
    const auto e = v.shape()[0], h = v.shape()[1];
    check_segments(segment, e, n, "segment_softmax");
    std::vector<double> mx(n * h, -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < e; ++k) {
        for (std::size_t c = 0; c < h; ++c) mx[segment[k] * h + c] = std::max(mx[segment[k] * h + c], v[k * h + c]);
    }
    Tensor out({e, h});
    std::vector<double> denom(n * h, 0.0);
    for (std::size_t k = 0; k < e; ++k) {
        for (std::size_t c = 0; c < h; ++c) {
            const double ex = std::exp(v[k * h + c] - mx[segment[k] * h + c]);
            out[k * h + c] = ex;
            denom[segment[k] * h + c] += ex;
        }
    }
    for (std::size_t k = 0; k < e; ++k) {
        for (std::size_t c = 0; c < h; ++c) out[k * h + c] /= denom[segment[k] * h + c];
    }
    const std::size_t self = t.size();
    return t.record(OpKind::SegmentSoftmax, {scores.id}, std::move(out),
                    [a = scores.id, self, n, h, segment = std::move(segment)](Tape& tp, const Tensor& g) {
                        // ds_k = y_k (g_k - sum_{k' in seg} g_k' y_k')
                        const Tensor& y = tp.value(self);
                        std::vector<double> dot(n * h, 0.0);
                        for (std::size_t k = 0; k < segment.size(); ++k) {
                            for (std::size_t c = 0; c < h; ++c) dot[segment[k] * h + c] += g[k * h + c] * y[k * h + c];
                        }
                        Tensor& ga = tp.grad_slot(a);
                        for (std::size_t k = 0; k < segment.size(); ++k) {
                            for (std::size_t c = 0; c < h; ++c) {
                                ga[k * h + c] += y[k * h + c] * (g[k * h + c] - dot[segment[k] * h + c]);
                            }
                        }
                    });
}

// Batch norm ------------------------------------------------------------

BatchNormState::BatchNormState(const std::string& name, std::size_t dim)
    : gamma(name + ".gamma", Tensor({1, dim}, 1.0)),
      beta(name + ".beta", Tensor({1, dim}, 0.0)),
      running_mean({1, dim}, 0.0),
      running_var({1, dim}, 1.0) {}

Var batch_norm(Var x, BatchNormState& state, Phase phase) {
    Tape& t = *x.tape;
    const Tensor& v = t.value(x.id);
    require_rank2(v, "batch_norm");
    const auto n = v.shape()[0], d = v.shape()[1];
    if (state.gamma.value.numel() != d) {
        throw DimensionError("batch_norm: state width " + std::to_string(state.gamma.value.numel()) +
                             " vs input " + shape_str(v.shape()));
    }
    Var gamma = t.param(state.gamma);
    Var beta = t.param(state.beta);

    std::vector<double> mu(d), inv_std(d);
    if (phase == Phase::Train) {
        if (n < 2) throw DegenerateError("batch_norm: train phase needs at least 2 rows, got " + std::to_string(n));
        std::vector<double> var(d, 0.0);
        for (std::size_t c = 0; c < d; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += v[r * d + c];
            mu[c] = s / static_cast<double>(n);
            double q = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double z = v[r * d + c] - mu[c];
                q += z * z;
            }
            var[c] = q / static_cast<double>(n);
            inv_std[c] = 1.0 / std::sqrt(var[c] + state.eps);
            const double unbiased = q / static_cast<double>(n - 1);
            state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mu[c];
            state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
        }
    } else {
        for (std::size_t c = 0; c < d; ++c) {
            mu[c] = state.running_mean[c];
            inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
        }
    }

    Tensor xhat({n, d});
    Tensor out({n, d});
    const Tensor& gv = t.value(gamma.id);
    const Tensor& bv = t.value(beta.id);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double z = (v[r * d + c] - mu[c]) * inv_std[c];
            xhat[r * d + c] = z;
            out[r * d + c] = gv[c] * z + bv[c];
        }
    }
    const bool train = phase == Phase::Train;
    return t.record(OpKind::BatchNorm, {x.id, gamma.id, beta.id}, std::move(out),
                    [xi = x.id, gi = gamma.id, bi = beta.id, n, d, train, inv_std = std::move(inv_std),
                     xhat = std::move(xhat)](Tape& tp, const Tensor& g) {
                        const Tensor& gam = tp.value(gi);
                        std::vector<double> sum_g(d, 0.0), sum_gx(d, 0.0);
                        for (std::size_t r = 0; r < n; ++r) {
                            for (std::size_t c = 0; c < d; ++c) {
                                sum_g[c] += g[r * d + c];
                                sum_gx[c] += g[r * d + c] * xhat[r * d + c];
                            }
                        }
                        if (tp.requires_grad(gi)) {
                            Tensor& gg = tp.grad_slot(gi);
                            for (std::size_t c = 0; c < d; ++c) gg[c] += sum_gx[c];
                        }
                        if (tp.requires_grad(bi)) {
                            Tensor& gb = tp.grad_slot(bi);
                            for (std::size_t c = 0; c < d; ++c) gb[c] += sum_g[c];
                        }
                        if (!tp.requires_grad(xi)) return;
                        Tensor& gx = tp.grad_slot(xi);
                        const double inv_n = 1.0 / static_cast<double>(n);
                        for (std::size_t r = 0; r < n; ++r) {
                            for (std::size_t c = 0; c < d; ++c) {
                                const double gh = g[r * d + c] * gam[c];
                                if (train) {
                                    gx[r * d + c] += gam[c] * inv_std[c] *
                                                     (g[r * d + c] - inv_n * sum_g[c] - xhat[r * d + c] * inv_n * sum_gx[c]);
                                } else {
                                    gx[r * d + c] += gh * inv_std[c];
                                }
                            }
                        }
                    });
}

// Reductions and losses -------------------------------------------------

Var sum(Var a) {
    Tape& t = *a.tape;
    const Tensor& v = t.value(a.id);
    double s = 0.0;
    for (double x : v.data()) s += x;
    return t.record(OpKind::Sum, {a.id}, Tensor::scalar(s), [a = a.id](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad_slot(a);
        const double gv = g.item();
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gv;
    });
}

Var mean(Var a) {
    Tape& t = *a.tape;
    const Tensor& v = t.value(a.id);
    if (v.numel() == 0) throw DegenerateError("mean of an empty tensor");
    double s = 0.0;
    for (double x : v.data()) s += x;
    const double inv = 1.0 / static_cast<double>(v.numel());
    return t.record(OpKind::Mean, {a.id}, Tensor::scalar(s * inv), [a = a.id, inv](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad_slot(a);
        const double gv = g.item() * inv;
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gv;
    });
}

Var cross_entropy(Var logits, std::span<const std::size_t> targets, std::span<const double> class_weights) {
    Tape& t = *logits.tape;
    const Tensor& z = t.value(logits.id);
    require_rank2(z, "cross_entropy");
    const auto n = z.shape()[0], k = z.shape()[1];
    if (targets.size() != n) {
        throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " + std::to_string(n) +
                             " rows");
    }
    if (!class_weights.empty() && class_weights.size() != k) {
        throw DimensionError("cross_entropy: " + std::to_string(class_weights.size()) + " class weights for " +
                             std::to_string(k) + " classes");
    }
    if (n == 0) throw DegenerateError("cross_entropy: empty batch");
    Tensor prob({n, k});
    std::vector<double> w(n);
    double loss = 0.0, wsum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (targets[r] >= k) {
            throw ContractError("cross_entropy: target " + std::to_string(targets[r]) + " at row " + std::to_string(r) +
                                " outside [0, " + std::to_string(k) + ")");
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, z[r * k + c]);
        double se = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            prob[r * k + c] = std::exp(z[r * k + c] - mx);
            se += prob[r * k + c];
        }
        for (std::size_t c = 0; c < k; ++c) prob[r * k + c] /= se;
        const double lse = mx + std::log(se);
        w[r] = class_weights.empty() ? 1.0 : class_weights[targets[r]];
        loss += w[r] * (lse - z[r * k + targets[r]]);
        wsum += w[r];
    }
    if (!(wsum > 0.0)) throw DegenerateError("cross_entropy: total target weight is zero");
    std::vector<std::size_t> tgt(targets.begin(), targets.end());
    return t.record(OpKind::CrossEntropy, {logits.id}, Tensor::scalar(loss / wsum),
                    [a = logits.id, n, k, wsum, prob = std::move(prob), w = std::move(w), tgt = std::move(tgt)](Tape& tp, const Tensor& g) {
                        Tensor& ga = tp.grad_slot(a);
                        const double s = g.item() / wsum;
                        for (std::size_t r = 0; r < n; ++r) {
                            for (std::size_t c = 0; c < k; ++c) {
                                const double onehot = c == tgt[r] ? 1.0 : 0.0;
                                ga[r * k + c] += s * w[r] * (prob[r * k + c] - onehot);
                            }
                        }
                    });
}

Var l1_loss(Var pred, const Tensor& target) {
    Tape& t = *pred.tape;
    const Tensor& p = t.value(pred.id);
    if (p.numel() != target.numel()) {
        throw DimensionError("l1_loss: " + shape_str(p.shape()) + " vs " + shape_str(target.shape()));
    }
    if (p.numel() == 0) throw DegenerateError("l1_loss: empty batch");
    const double inv = 1.0 / static_cast<double>(p.numel());
    double s = 0.0;
    std::vector<double> sign(p.numel());
    for (std::size_t i = 0; i < p.numel(); ++i) {
        const double r = p[i] - target[i];
        s += std::abs(r);
        sign[i] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    }
    return t.record(OpKind::L1Loss, {pred.id}, Tensor::scalar(s * inv), [a = pred.id, inv, sign = std::move(sign)](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad_slot(a);
        const double gv = g.item() * inv;
        for (std::size_t i = 0; i < sign.size(); ++i) ga[i] += gv * sign[i];
    });
}

} // namespace ssfgnet::ad
