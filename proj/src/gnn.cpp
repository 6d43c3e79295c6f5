#include "mmf/gnn.hpp"

#include <stdexcept>

namespace mmf {

std::vector<Matrix> cheb_basis(const SpectralOperator& op, std::size_t order) {
    if (order < 1) throw std::invalid_argument("cheb_basis: order must be >= 1");
    std::size_t n = op.matrix.rows();
    std::vector<Matrix> basis;
    basis.reserve(order);
    basis.push_back(Matrix::identity(n));
    if (order > 1) basis.push_back(op.matrix);
    for (std::size_t k = 2; k < order; ++k) {
        Matrix t = 2.0 * matmul(op.matrix, basis[k - 1]) - basis[k - 2];
        basis.push_back(std::move(t));
    }
    return basis;
}

ChebConvLayer::ChebConvLayer(std::size_t k, std::size_t d, std::mt19937_64& rng)
    : order(k),
      w_node("gnn.conv.w_node", glorot_uniform(d, kNodeFeatureDim, rng)),
      w_edge("gnn.conv.w_edge", glorot_uniform(d, kEdgeFeatureDim, rng)) {
    for (std::size_t i = 0; i < k; ++i)
        theta.emplace_back("gnn.conv.theta" + std::to_string(i), glorot_uniform(d, d, rng));
}

Tape::Var ChebConvLayer::forward(Tape& tape, const Matrix& node_feats,
                                 const Matrix& edge_agg, const SpectralOperator& op) {
    if (node_feats.cols() != w_node.cols() || edge_agg.cols() != w_edge.cols())
        throw std::invalid_argument("ChebConvLayer: feature shape mismatch");
    std::vector<Matrix> basis = cheb_basis(op, order);
    auto xv = tape.constant(node_feats);
    auto xe = tape.constant(edge_agg);
    auto h = tape.add(tape.matmul(xv, tape.transpose(tape.param(w_node))),
                      tape.matmul(xe, tape.transpose(tape.param(w_edge))));
    Tape::Var acc;
    for (std::size_t k = 0; k < order; ++k) {
        auto term = tape.matmul(tape.matmul(tape.constant(basis[k]), h),
                                tape.param(theta[k]));
        acc = k == 0 ? term : tape.add(acc, term);
    }
    return tape.sigmoid(acc);
}

std::vector<ParamTensor*> ChebConvLayer::params() {
    std::vector<ParamTensor*> out{&w_node, &w_edge};
    for (auto& t : theta) out.push_back(&t);
    return out;
}

Set2SetReadout::Set2SetReadout(std::size_t t, std::size_t d, std::mt19937_64& rng)
    : steps(t),
      wz("gnn.s2s.wz", glorot_uniform(d, 2 * d, rng)),
      uz("gnn.s2s.uz", glorot_uniform(d, d, rng)),
      bz("gnn.s2s.bz", Matrix(1, d)),
      wh("gnn.s2s.wh", glorot_uniform(d, 2 * d, rng)),
      uh("gnn.s2s.uh", glorot_uniform(d, d, rng)),
      bh("gnn.s2s.bh", Matrix(1, d)),
      proj("gnn.s2s.proj", glorot_uniform(d, 2 * d, rng)) {}

Tape::Var Set2SetReadout::forward(Tape& tape, Tape::Var nodes) {
    std::size_t nv = tape.value(nodes).rows();
    std::size_t d = tape.value(nodes).cols();
    if (nv == 0) throw std::invalid_argument("Set2SetReadout: empty graph");

    auto vwz = tape.transpose(tape.param(wz));
    auto vuz = tape.transpose(tape.param(uz));
    auto vbz = tape.param(bz);
    auto vwh = tape.transpose(tape.param(wh));
    auto vuh = tape.transpose(tape.param(uh));
    auto vbh = tape.param(bh);

    auto state = tape.constant(Matrix(1, d));
    auto read = tape.constant(Matrix(1, d));
    auto query = state;
    for (std::size_t t = 0; t < steps; ++t) {
        auto x = tape.concat_cols({query, read});  // 1 x 2d
        auto z = tape.sigmoid(tape.add(tape.add(tape.matmul(x, vwz),
                                                tape.matmul(state, vuz)),
                                       vbz));
        auto cand = tape.tanh(tape.add(tape.add(tape.matmul(x, vwh),
                                                tape.matmul(state, vuh)),
                                       vbh));
        auto one_minus_z = tape.affine(z, -1.0, 1.0);
        state = tape.add(tape.hadamard(one_minus_z, state), tape.hadamard(z, cand));
        query = state;
        auto logits = tape.transpose(tape.matmul(nodes, tape.transpose(query)));  // 1 x |V|
        auto weights = tape.softmax_rows(logits);
        read = tape.matmul(weights, nodes);  // 1 x d
    }
    auto qr = tape.concat_cols({query, read});  // 1 x 2d
    return tape.matmul(qr, tape.transpose(tape.param(proj)));  // 1 x d
}

std::vector<ParamTensor*> Set2SetReadout::params() {
    return {&wz, &uz, &bz, &wh, &uh, &bh, &proj};
}

GraphEncoder::GraphEncoder(std::size_t cheb_k, std::size_t set2set_steps, std::size_t d,
                           std::mt19937_64& rng)
    : conv(cheb_k, d, rng), readout(set2set_steps, d, rng) {}

Tape::Var GraphEncoder::encode(Tape& tape, const MoleculeGraph& graph) {
    if (graph.node_features.rows() != graph.num_atoms())
        throw std::invalid_argument("GraphEncoder: graph not featurized");
    SpectralOperator op = spectral_operator(graph);
    Matrix edge_agg = edge_to_node(graph);
    auto nodes = conv.forward(tape, graph.node_features, edge_agg, op);
    return readout.forward(tape, nodes);
}

std::vector<ParamTensor*> GraphEncoder::params() {
    std::vector<ParamTensor*> out = conv.params();
    for (auto* p : readout.params()) out.push_back(p);
    return out;
}

}  // namespace mmf
