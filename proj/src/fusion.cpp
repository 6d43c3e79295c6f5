#include "mmf/fusion.hpp"

#include <cmath>
#include <stdexcept>

namespace mmf {

CrossModalParams::CrossModalParams(std::size_t num_heads, std::size_t head_dim,
                                   std::size_t d, std::mt19937_64& rng) {
    heads.reserve(num_heads);
    for (std::size_t h = 0; h < num_heads; ++h) {
        std::string tag = "fusion.h" + std::to_string(h) + ".";
        heads.push_back(Head{
            ParamTensor(tag + "q_graph", glorot_uniform(d, head_dim, rng)),
            ParamTensor(tag + "k_graph", glorot_uniform(d, head_dim, rng)),
            ParamTensor(tag + "v_graph", glorot_uniform(d, head_dim, rng)),
            ParamTensor(tag + "q_text", glorot_uniform(d, head_dim, rng)),
            ParamTensor(tag + "k_text", glorot_uniform(d, head_dim, rng)),
            ParamTensor(tag + "v_text", glorot_uniform(d, head_dim, rng)),
        });
    }
    w_out = ParamTensor("fusion.w_out", glorot_uniform(num_heads * head_dim, d, rng));
}

std::vector<ParamTensor*> CrossModalParams::params() {
    std::vector<ParamTensor*> out;
    for (Head& h : heads) {
        out.push_back(&h.q_graph);
        out.push_back(&h.k_graph);
        out.push_back(&h.v_graph);
        out.push_back(&h.q_text);
        out.push_back(&h.k_text);
        out.push_back(&h.v_text);
    }
    out.push_back(&w_out);
    return out;
}

Tape::Var cross_modal_attend(Tape& tape, Tape::Var h_graph, Tape::Var h_text,
                             CrossModalParams& params) {
    const Matrix& hg = tape.value(h_graph);
    const Matrix& ht = tape.value(h_text);
    if (hg.rows() != 1 || ht.rows() != 1 || hg.cols() != ht.cols())
        throw std::invalid_argument("cross_modal_attend: expected matching 1 x d inputs");
    if (params.heads.empty()) throw std::invalid_argument("cross_modal_attend: no heads");

    double scale = 1.0 / std::sqrt(static_cast<double>(params.head_dim()));
    std::vector<Tape::Var> head_outputs;
    head_outputs.reserve(params.heads.size());
    for (auto& head : params.heads) {
        auto qg = tape.matmul(h_graph, tape.param(head.q_graph));  // 1 x d_h
        auto kg = tape.matmul(h_graph, tape.param(head.k_graph));
        auto vg = tape.matmul(h_graph, tape.param(head.v_graph));
        auto qt = tape.matmul(h_text, tape.param(head.q_text));
        auto kt = tape.matmul(h_text, tape.param(head.k_text));
        auto vt = tape.matmul(h_text, tape.param(head.v_text));

        auto k_concat = tape.concat_rows(kg, kt);  // 2 x d_h
        auto v_concat = tape.concat_rows(vg, vt);
        auto q_sum = tape.add(qg, qt);
        auto logits = tape.affine(tape.matmul(q_sum, tape.transpose(k_concat)), scale, 0.0);
        auto attn = tape.softmax_rows(logits);      // 1 x 2
        head_outputs.push_back(tape.matmul(attn, v_concat));  // 1 x d_h
    }
    auto concat = head_outputs.size() == 1 ? head_outputs[0] : tape.concat_cols(head_outputs);
    return tape.matmul(concat, tape.param(params.w_out));  // 1 x d
}

}  // namespace mmf
