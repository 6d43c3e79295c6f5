#pragma once

#include <functional>
#include <vector>

#include "mmf/tape.hpp"

namespace mmf {

struct AdamState {
    std::size_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over all tensors; zeroes grads afterwards.
void adam_step(const std::vector<ParamTensor*>& params, AdamState& state);

// Central-difference gradient of f with respect to p. f is evaluated with
// p.value perturbed in place; the entry is restored after each probe.
// Throws std::runtime_error if f returns a non-finite value.
Matrix finite_diff_grad(const std::function<double()>& f, ParamTensor& p,
                        double eps = 1e-5);

// Max element-wise relative error between an analytic gradient and the
// finite-difference oracle, with an absolute floor on the denominator.
double max_rel_error(const Matrix& analytic, const Matrix& numeric,
                     double abs_floor = 1e-8);

}  // namespace mmf
