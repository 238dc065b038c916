#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arnlstm/numerics/tensor.hpp"

namespace arnlstm {

/// Tensor plus its accumulated gradient. Buffers (trainable = false) are
/// checkpointed with the model but skipped by the optimizer and grad checks.
struct Parameter {
    Tensor value;
    Tensor grad;
    bool trainable = true;

    Parameter() = default;
    explicit Parameter(Tensor v) : value(std::move(v)), grad(value.shape()) {}

    void zero_grad() {
        if (grad.shape() != value.shape()) grad = Tensor(value.shape());
        grad.fill(0.0);
    }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape& tape() const { return *tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

    const Tensor& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }

private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

enum class Mode { train, eval };

/// Reverse-mode gradient tape. Nodes are appended in evaluation order, so
/// every node's parents precede it and a single reverse sweep visits each
/// node exactly once.
class Tape {
public:
    using Backward = std::function<void(Tape&, std::size_t)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value) { return push(std::move(value), {}, nullptr, false, nullptr); }

    /// Traced input that is not a parameter; its gradient is readable after backward().
    Var input(Tensor value) { return push(std::move(value), {}, nullptr, true, nullptr); }

    /// Leaf bound to a parameter; backward() accumulates into param.grad.
    Var param(Parameter& p) {
        if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
        return push(p.value, {}, nullptr, true, &p);
    }

    /// Append an operation result. `backward` reads grad(self) and adds into
    /// the parents' gradients; it is skipped when no parent is traced.
    Var record(Tensor value, std::vector<std::size_t> parents, Backward backward) {
        bool traced = false;
        for (auto p : parents) traced = traced || nodes_[p].requires_grad;
        return push(std::move(value), std::move(parents), traced ? std::move(backward) : nullptr,
                    traced, nullptr);
    }

    const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
    const Tensor& value(Var v) const { return value(v.id()); }

    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    /// Gradient buffer of a node, allocated as zeros on first use.
    Tensor& grad(std::size_t id) {
        auto& n = nodes_[id];
        if (!n.grad) n.grad.emplace(n.value.shape());
        return *n.grad;
    }
    const Tensor& grad(Var v) { return grad(v.id()); }
    bool has_grad(std::size_t id) const { return nodes_[id].grad.has_value(); }

    std::size_t size() const { return nodes_.size(); }

    /// Seed d(root)/d(root) = 1 and sweep backwards once.
    void backward(Var root) {
        if (root.value().size() != 1) {
            throw ShapeError("backward() needs a scalar root, got " + shape_string(root.value().shape()));
        }
        grad(root.id()).fill(1.0);
        for (std::size_t i = root.id() + 1; i-- > 0;) {
            auto& n = nodes_[i];
            if (!n.grad) continue;
            if (n.backward) n.backward(*this, i);
            if (n.param) {
                Tensor& g = *nodes_[i].grad;
                if (grad_offset_ != 0.0)
                    for (double& v : g.data()) v += grad_offset_;
                n.param->grad += g;
            }
        }
    }

    /// Fault-injection hook: adds a constant to every parameter gradient on
    /// accumulation. Only used to prove the gradient checker can fail.
    void set_param_grad_offset(double offset) { grad_offset_ = offset; }

private:
    struct Node {
        Tensor value;
        std::optional<Tensor> grad;
        std::vector<std::size_t> parents;
        Backward backward;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    Var push(Tensor value, std::vector<std::size_t> parents, Backward backward, bool requires_grad,
             Parameter* param) {
        nodes_.push_back(Node{std::move(value), std::nullopt, std::move(parents), std::move(backward), param,
                              requires_grad});
        return Var(this, nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
    double grad_offset_ = 0.0;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

} // namespace arnlstm
