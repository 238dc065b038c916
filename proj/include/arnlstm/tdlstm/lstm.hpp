#pragma once

#include <string>
#include <utility>
#include <vector>

#include "arnlstm/numerics/params.hpp"

namespace arnlstm {

struct LstmConfig {
    std::size_t hidden = 500;
    std::size_t depth = 2;
    double dropout = 0.1;
    /// Initialize the forget-gate bias to 1 instead of 0.
    bool forget_bias_one = true;
    InitConfig init;
};

struct LstmState {
    Var h;
    Var c;
};

/// LSTM cell. Gate blocks along the 4H axis are ordered [i, f, g, o]:
///   W: I×4H, U: H×4H, b: 1×4H, gates = x·W + h·U + b.
class LstmCell {
public:
    LstmCell() = default;

    LstmCell(ParamStore& store, const std::string& prefix, std::size_t input, std::size_t hidden,
             const InitConfig& init, bool forget_bias_one, Rng& rng)
        : input_(input), hidden_(hidden) {
        w_ = &store.add(prefix + "/W", uniform_init(input, 4 * hidden, init, rng));
        Tensor u = Tensor::matrix(hidden, 4 * hidden);
        // U blocks are initialized per gate so each block sees fan-in H, fan-out H.
        Tensor block = uniform_init(hidden, hidden, init, rng);
        for (std::size_t g = 0; g < 4; ++g) {
            if (g > 0) block = uniform_init(hidden, hidden, init, rng);
            for (std::size_t r = 0; r < hidden; ++r)
                for (std::size_t c = 0; c < hidden; ++c) u.at(r, g * hidden + c) = block.at(r, c);
        }
        u_ = &store.add(prefix + "/U", std::move(u));
        Tensor b = Tensor::matrix(1, 4 * hidden);
        if (forget_bias_one)
            for (std::size_t c = hidden; c < 2 * hidden; ++c) b[c] = 1.0;
        b_ = &store.add(prefix + "/b", std::move(b));
    }

    std::size_t input_width() const { return input_; }
    std::size_t hidden_width() const { return hidden_; }
    Parameter& W() const { return *w_; }
    Parameter& U() const { return *u_; }
    Parameter& b() const { return *b_; }

    LstmState zero_state(Tape& tape, std::size_t batch) const {
        return {tape.constant(Tensor::matrix(batch, hidden_)), tape.constant(Tensor::matrix(batch, hidden_))};
    }

    /// One step given the precomputed input projection x·W (B×4H).
    LstmState step_projected(Var x_proj, const LstmState& s) const {
        Tape& t = x_proj.tape();
        if (s.h.cols() != hidden_ || s.c.cols() != hidden_ || x_proj.cols() != 4 * hidden_) {
            throw ShapeError("lstm step: state/projection widths do not match hidden width " + std::to_string(hidden_));
        }
        Var gates = op::add_bias(op::add(x_proj, op::matmul(s.h, t.param(*u_))), t.param(*b_));
        Var i = op::sigmoid(op::slice_cols(gates, 0, hidden_));
        Var f = op::sigmoid(op::slice_cols(gates, hidden_, hidden_));
        Var g = op::tanh(op::slice_cols(gates, 2 * hidden_, hidden_));
        Var o = op::sigmoid(op::slice_cols(gates, 3 * hidden_, hidden_));
        Var c = op::add(op::mul(f, s.c), op::mul(i, g));
        Var h = op::mul(o, op::tanh(c));
        return {h, c};
    }

    LstmState step(Var x, const LstmState& s) const {
        if (x.cols() != input_) {
            throw ShapeError("lstm step: input width " + std::to_string(x.cols()) + ", expected " + std::to_string(input_));
        }
        return step_projected(op::matmul(x, x.tape().param(*w_)), s);
    }

private:
    std::size_t input_ = 0, hidden_ = 0;
    Parameter* w_ = nullptr;
    Parameter* u_ = nullptr;
    Parameter* b_ = nullptr;
};

/// c' = f⊙c + i⊙g, h' = o⊙tanh(c').
inline LstmState lstm_step(const LstmCell& cell, Var x, const LstmState& state) { return cell.step(x, state); }

/// Run a cell from zero states over a step-major stacked input ((T·B)×I,
/// rows ordered (t, b)) and return the T hidden states (B×H each). In train
/// mode inputs are dropped out per step and element.
inline std::vector<Var> lstm_forward_stacked(const LstmCell& cell, Var stacked, std::size_t steps, double dropout,
                                             Mode mode, Rng& rng) {
    if (steps == 0 || stacked.rows() % steps != 0) throw ShapeError("lstm_forward: rows not divisible by step count");
    if (stacked.cols() != cell.input_width()) {
        throw ShapeError("lstm_forward: input width " + std::to_string(stacked.cols()) + ", expected " +
                         std::to_string(cell.input_width()));
    }
    Tape& t = stacked.tape();
    const std::size_t batch = stacked.rows() / steps;
    Var proj = op::matmul(op::dropout(stacked, dropout, mode, rng), t.param(cell.W()));
    LstmState state = cell.zero_state(t, batch);
    std::vector<Var> out;
    out.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        state = cell.step_projected(op::slice_rows(proj, s * batch, batch), state);
        out.push_back(state.h);
    }
    return out;
}

/// Run a cell over T steps of B×I inputs from zero states, returning all T hidden states.
inline std::vector<Var> lstm_forward(const LstmCell& cell, std::span<const Var> xs, double dropout, Mode mode,
                                     Rng& rng) {
    if (xs.empty()) throw ShapeError("lstm_forward: empty sequence");
    const std::size_t batch = xs.front().rows();
    for (std::size_t s = 0; s < xs.size(); ++s) {
        if (xs[s].rows() != batch || xs[s].cols() != cell.input_width()) {
            throw ShapeError("lstm_forward: step " + std::to_string(s) + " input is " +
                             shape_string(xs[s].value().shape()) + ", expected [" + std::to_string(batch) + "x" +
                             std::to_string(cell.input_width()) + "]");
        }
    }
    return lstm_forward_stacked(cell, op::concat_rows(xs), xs.size(), dropout, mode, rng);
}

} // namespace arnlstm
