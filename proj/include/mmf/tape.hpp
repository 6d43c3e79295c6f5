#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmf/matrix.hpp"

namespace mmf {

// Trainable weight plus its gradient and Adam moment buffers.
// All four matrices always share one shape.
struct ParamTensor {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;

    ParamTensor() = default;
    ParamTensor(std::string n, Matrix v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(value.rows(), value.cols()),
          adam_m(value.rows(), value.cols()),
          adam_v(value.rows(), value.cols()) {}

    std::size_t rows() const { return value.rows(); }
    std::size_t cols() const { return value.cols(); }
    void zero_grad() { grad.fill(0.0); }
};

// Minimal reverse-mode tape over Matrix values. One tape per forward pass;
// backward() accumulates into the referenced ParamTensor grads.
class Tape {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    Var constant(Matrix m);
    Var param(ParamTensor& p);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    // a * x + b, element-wise
    Var affine(Var x, double a, double b);
    Var transpose(Var x);
    Var sigmoid(Var x);
    Var tanh(Var x);
    Var softmax_rows(Var x);
    Var concat_rows(Var a, Var b);
    Var concat_cols(const std::vector<Var>& xs);
    // Row gather from a parameter/constant table; backward scatter-adds.
    Var gather_rows(Var table, std::vector<int> ids);
    // 1x1 sum of all entries
    Var sum(Var x);
    // 1x1 sum of squared differences against a fixed target
    Var sq_err(Var pred, Matrix target);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

    // Seeds d(seed)=1 (seed must be 1x1) and runs the reverse sweep.
    void backward(Var seed);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void()> back;  // empty for constants
    };

    Var push(Matrix value, std::function<void()> back = {});
    Node& node(Var v) { return nodes_[v.id]; }

    std::vector<Node> nodes_;
};

}  // namespace mmf
