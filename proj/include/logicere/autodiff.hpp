#pragma once

// Reverse-mode differentiation over dense tensors.
//
// A Tape records every primitive in creation order, which is already a topological
// order, so backward() is a single reverse sweep. Parameters live outside the tape in a
// ParamStore; the tape binds to them and gradients stay on the tape until
// accumulate_param_grads() copies them out. That keeps concurrent tapes (one per
// document) free of shared writes, and the caller decides the reduction order.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "logicere/kernels.hpp"
#include "logicere/tensor.hpp"

namespace logicere {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
   public:
    Var() = default;
    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    const Tensor& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    bool valid() const { return tape_ != nullptr; }

   private:
    friend class Tape;
    Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
   public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Records a leaf bound to `t`. Gradients flow to it only if t.requires_grad.
    Var param(Tensor& t);

    /// Records the result of a primitive. `fn` propagates the node's gradient to `inputs`.
    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

    const Tensor& value(const Var& v) const { return nodes_[v.id()].value; }
    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

    /// Gradient buffer of node `id`, allocated (zero) on first use.
    std::vector<double>& grad(std::size_t id);
    /// Gradient after backward(); empty if nothing flowed into the node.
    const std::vector<double>& grad(const Var& v) const { return nodes_[v.id()].grad; }

    /// Reverse sweep from a scalar loss. Throws std::invalid_argument when the loss is not
    /// a scalar or belongs to another tape, std::logic_error when it depends on no
    /// differentiable leaf.
    void backward(const Var& loss);

    /// Adds the gradient of every bound parameter into its Tensor::grad, in recording order.
    void accumulate_param_grads() const;
    /// Visits (parameter, gradient) for every bound parameter that received a gradient,
    /// in recording order. Leaves the parameters untouched.
    void visit_param_grads(const std::function<void(const Tensor&, const std::vector<double>&)>& f) const;

    std::size_t size() const { return nodes_.size(); }

   private:
    struct Node {
        Tensor value;
        std::vector<double> grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        Tensor* bound = nullptr;
        bool needs_grad = false;
    };
    std::vector<Node> nodes_;
};

namespace ad {

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
/// log(max(x, floor)); zero gradient below the floor.
Var log_clamped(const Var& a, double floor);
Var abs(const Var& a);
/// max(x, 0) with subgradient 0 at the kink.
Var relu(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var reshape(const Var& a, std::vector<std::size_t> shape);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
/// Row i of the result is row idx[i] of `a`.
Var gather_rows(const Var& a, std::span<const std::size_t> idx);
/// Flat gather: element i of the result is a.data[idx[i]], shaped as `shape`.
Var gather(const Var& a, std::span<const std::size_t> idx, std::vector<std::size_t> shape);

/// Row softmax over live entries (mask byte != 0). Masked entries come out exactly 0.
Var softmax_rows(const Var& x, std::span<const unsigned char> mask = {},
                 kernels::EmptyRow empty = kernels::EmptyRow::Throw);
Var log_softmax_rows(const Var& x);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps);

/// Inverted dropout. Identity when !training or rate == 0; the keep mask is a pure
/// function of rng_key and element index.
Var dropout(const Var& x, double rate, std::uint64_t rng_key, bool training);

}  // namespace ad

/// Keep-mask used by ad::dropout, exposed for testing: 0 or 1/(1-rate) per element.
std::vector<double> dropout_scale(std::size_t n, double rate, std::uint64_t rng_key);

/// Named learnable tensors, iterated in name order.
class ParamStore {
   public:
    Tensor& add(const std::string& name, Tensor t);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;
    void zero_grad();

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    bool operator==(const ParamStore& o) const;

   private:
    std::map<std::string, Tensor> params_;
};

struct GradcheckReport {
    struct Item {
        std::string name;
        double max_rel_error = 0.0;
    };
    std::vector<Item> tensors;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Objective for gradient checking. With want_grad set it must leave dL/dθ in the
/// parameters' grad buffers (which gradcheck zeroes beforehand).
using Objective = std::function<double(ParamStore&, bool want_grad)>;

/// Central differences (f(θ+h) - f(θ-h)) / 2h against the taped gradient. The relative
/// error of a tensor is max|analytic - numeric| / max(max|analytic|, max|numeric|).
GradcheckReport gradcheck(const Objective& f, ParamStore& params, double h, double tol);

struct Checkpoint {
    ParamStore params;
    std::string config_hash;
    std::string config_json;
};

inline constexpr std::string_view kCheckpointFormat = "logicere-checkpoint-v1";

/// JSON checkpoint; doubles are written in shortest round-trip form.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(std::string_view text);

}  // namespace logicere
