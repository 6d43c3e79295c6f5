#pragma once

#include <random>
#include <vector>

#include "mmf/molgraph.hpp"
#include "mmf/tape.hpp"

namespace mmf {

// T_0 = I, T_1 = L, T_k = 2 L T_{k-1} - T_{k-2}.
std::vector<Matrix> cheb_basis(const SpectralOperator& op, std::size_t order);

// Chebyshev graph convolution: sigmoid(sum_k T_k(L) (Xv W0^T + Xe W1^T) Theta_k).
// The edge term consumes the per-node incident-edge aggregation.
struct ChebConvLayer {
    std::size_t order = 3;  // K
    ParamTensor w_node;     // d x d_v
    ParamTensor w_edge;     // d x d_e
    std::vector<ParamTensor> theta;  // K matrices, d x d

    ChebConvLayer() = default;
    ChebConvLayer(std::size_t k, std::size_t d, std::mt19937_64& rng);

    Tape::Var forward(Tape& tape, const Matrix& node_feats, const Matrix& edge_agg,
                      const SpectralOperator& op);

    std::vector<ParamTensor*> params();
};

// Set2Set-style pooling: T rounds of gated-controller update + softmax
// attention over nodes; the final (query, read) pair is projected 2d -> d.
struct Set2SetReadout {
    std::size_t steps = 3;  // T
    ParamTensor wz, uz, bz;  // update gate: d x 2d, d x d, 1 x d
    ParamTensor wh, uh, bh;  // candidate state
    ParamTensor proj;        // d x 2d output projection

    Set2SetReadout() = default;
    Set2SetReadout(std::size_t t, std::size_t d, std::mt19937_64& rng);

    // nodes: |V| x d node embeddings -> 1 x d graph embedding
    Tape::Var forward(Tape& tape, Tape::Var nodes);

    std::vector<ParamTensor*> params();
};

// f_gamma: featurized molecule -> h_g (1 x d row vector on the tape).
struct GraphEncoder {
    ChebConvLayer conv;
    Set2SetReadout readout;

    GraphEncoder() = default;
    GraphEncoder(std::size_t cheb_k, std::size_t set2set_steps, std::size_t d,
                 std::mt19937_64& rng);

    Tape::Var encode(Tape& tape, const MoleculeGraph& graph);

    std::vector<ParamTensor*> params();
};

}  // namespace mmf
