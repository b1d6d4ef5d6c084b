#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssfgnet/tensor.hpp"

namespace ssfgnet::ad {

enum class Phase { Train, Eval };

enum class OpKind {
    Constant,
    Param,
    MatMul,
    Add,
    Sub,
    Mul,
    Div,
    Relu,
    Sigmoid,
    Tanh,
    Elu,
    LeakyRelu,
    Scale,
    ConcatCols,
    SliceCols,
    GatherRows,
    SegmentSum,
    SegmentMean,
    SegmentSoftmax,
    BatchNorm,
    Sum,
    Mean,
    CrossEntropy,
    L1Loss,
    Custom,
};

const char* op_name(OpKind kind);

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
    Parameter() = default;
    Parameter(std::string name, Tensor value);

    std::string name;
    Tensor value;
    Tensor grad;

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
};

/// Called during the reverse sweep with the node's accumulated output gradient.
/// Implementations push contributions into parents via Tape::accumulate.
using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

/// Reverse-mode tape. Nodes are appended in evaluation order, so parent ids
/// always precede their children and the reverse sweep is a simple countdown.
class Tape {
public:
    Var constant(Tensor value);
    /// Leaf bound to a parameter; backward adds into `p.grad`.
    Var param(Parameter& p);

    /// Append a node. `fn` is dropped when no parent requires a gradient.
    Var record(OpKind kind, std::vector<std::size_t> parents, Tensor value, BackwardFn fn);

    const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
    OpKind kind(std::size_t id) const { return nodes_.at(id).kind; }
    const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_.at(id).parents; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Gradient slot of node `id`, allocated as zeros on first use.
    Tensor& grad_slot(std::size_t id);
    /// grad(id) += g, skipped when the node does not require a gradient.
    void accumulate(std::size_t id, const Tensor& g);
    /// Gradient reached by the last backward sweep, or nullptr.
    const Tensor* grad(Var v) const;

    /// Seed d(root)/d(root) = 1 and run every reachable backward function
    /// once in reverse order. Intermediate gradients are reset on entry;
    /// parameter gradients accumulate across calls.
    void backward(Var root);

private:
    struct Node {
        OpKind kind = OpKind::Constant;
        std::vector<std::size_t> parents;
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        BackwardFn backward;
    };
    std::deque<Node> nodes_;
};

// Dense ops -------------------------------------------------------------

Var matmul(Var a, Var b);

/// Binary elementwise ops. `b` may equal `a`'s shape, be a row vector
/// ([d] or [1 x d]) broadcast over rows, or a column [n x 1] broadcast over
/// columns.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var elu(Var a, double alpha = 1.0);
Var leaky_relu(Var a, double slope);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);

enum class Elementwise { Add, Sub, Mul, Relu, Sigmoid, Tanh };
/// Dispatch by kind; unary kinds ignore `b`.
Var elementwise(Elementwise kind, Var a, Var b = {});

Var concat_cols(Var a, Var b);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);

/// out[k] = a[index[k]] for each k.
Var gather_rows(Var a, std::vector<std::size_t> index);

// Segment ops over destination indices -----------------------------------

enum class Reduce { Sum, Mean };

/// Row i of the result reduces the rows of `values` whose segment id is i.
/// Empty segments give zero rows.
Var segment_reduce(Reduce kind, Var values, std::vector<std::size_t> segment, std::size_t n);

/// Softmax over each segment, independently per column.
Var segment_softmax(Var scores, std::vector<std::size_t> segment, std::size_t n);

// Normalization ---------------------------------------------------------

struct BatchNormState {
    BatchNormState() = default;
    BatchNormState(const std::string& name, std::size_t dim);

    Parameter gamma;
    Parameter beta;
    Tensor running_mean;
    Tensor running_var;
    double eps = 1e-5;
    double momentum = 0.1;
};

/// Train: normalize with batch statistics and update running statistics
/// (unbiased variance). Eval: normalize with running statistics.
Var batch_norm(Var x, BatchNormState& state, Phase phase);

// Reductions and losses -------------------------------------------------

Var sum(Var a);
Var mean(Var a);

/// Weighted mean cross-entropy of row-wise logits. `class_weights` may be
/// empty (all ones).
Var cross_entropy(Var logits, std::span<const std::size_t> targets, std::span<const double> class_weights = {});

/// Mean absolute error against a constant target of the same shape.
Var l1_loss(Var pred, const Tensor& target);

} // namespace ssfgnet::ad
