#pragma once

#include <random>
#include <vector>

#include "mmf/tape.hpp"

namespace mmf {

// Gated mixture of the cross-modal and prediction embeddings, followed by
// the affine property head. The gate is a vector gate applied element-wise:
//   g = sigmoid(f_s(h_f) + f_g(h_ICL))
//   h_u = sigmoid(g .* h_f + (1 - g) .* h_ICL)
struct GateParams {
    ParamTensor fs_w, fs_b;    // d x d, 1 x d
    ParamTensor fg_w, fg_b;
    ParamTensor out_w, out_b;  // c x d, 1 x c

    GateParams() = default;
    GateParams(std::size_t d, std::size_t targets, std::mt19937_64& rng);

    std::vector<ParamTensor*> params() {
        return {&fs_w, &fs_b, &fg_w, &fg_b, &out_w, &out_b};
    }
};

Tape::Var gate_fuse(Tape& tape, Tape::Var h_fused, Tape::Var h_icl, GateParams& params);

// y_hat = W_out h_u + b, in standardized target units.
Tape::Var predict(Tape& tape, Tape::Var h_unified, GateParams& params);

// The "w/o MOE-DP" head: a direct affine map of (h_f ⊕ h_ICL) onto targets.
struct ConcatHeadParams {
    ParamTensor w;  // c x 2d
    ParamTensor b;  // 1 x c

    ConcatHeadParams() = default;
    ConcatHeadParams(std::size_t d, std::size_t targets, std::mt19937_64& rng);

    std::vector<ParamTensor*> params() { return {&w, &b}; }
};

Tape::Var predict_concat(Tape& tape, Tape::Var h_fused, Tape::Var h_icl,
                         ConcatHeadParams& params);

}  // namespace mmf
