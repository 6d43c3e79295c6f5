#pragma once

#include <random>
#include <vector>

#include "mmf/tape.hpp"

namespace mmf {

// Cross-modal multi-head attention over the two pooled embeddings. Per head,
// graph and text rows are projected to queries/keys/values, the two key and
// value rows are stacked into 2 slots, and the summed query attends over
// them; head outputs are concatenated and mapped back to width d.
struct CrossModalParams {
    struct Head {
        ParamTensor q_graph, k_graph, v_graph;  // each d x d_h
        ParamTensor q_text, k_text, v_text;
    };

    std::vector<Head> heads;
    ParamTensor w_out;  // (H * d_h) x d

    CrossModalParams() = default;
    CrossModalParams(std::size_t num_heads, std::size_t head_dim, std::size_t d,
                     std::mt19937_64& rng);

    std::size_t head_dim() const { return heads.empty() ? 0 : heads[0].q_graph.cols(); }

    std::vector<ParamTensor*> params();
};

// h_g (1 x d), h_text (1 x d) -> h_f (1 x d).
Tape::Var cross_modal_attend(Tape& tape, Tape::Var h_graph, Tape::Var h_text,
                             CrossModalParams& params);

}  // namespace mmf
