#include "mmf/model.hpp"

#include <algorithm>

namespace mmf {

MmfModel::MmfModel(const ModelConfig& config, Vocabulary vocabulary, std::uint64_t seed)
    : cfg(config),
      vocab(std::move(vocabulary)),
      standardizer(Standardizer::identity(config.targets)) {
    std::mt19937_64 rng(seed);
    gnn = GraphEncoder(cfg.cheb_k, cfg.set2set_steps, cfg.d, rng);
    if (!cfg.seg_off) {
        textenc = TextEncoderParams(vocab.size(), cfg.max_text_tokens, cfg.d, rng);
        fusion = CrossModalParams(cfg.heads, cfg.head_dim, cfg.d, rng);
    }
    if (!cfg.peg_off) icl = PredictionEmbeddingParams(cfg.d, cfg.targets, rng);
    if (cfg.moe_off) {
        concat_head = ConcatHeadParams(cfg.d, cfg.targets, rng);
    } else {
        gate = GateParams(cfg.d, cfg.targets, rng);
    }
}

std::vector<ParamTensor*> MmfModel::trainable_params() {
    std::vector<ParamTensor*> out = gnn.params();
    auto append = [&out](const std::vector<ParamTensor*>& more) {
        out.insert(out.end(), more.begin(), more.end());
    };
    if (!cfg.seg_off) {
        append(textenc.params());
        append(fusion.params());
    }
    if (!cfg.peg_off) append(icl.params());
    if (cfg.moe_off) {
        append(concat_head.params());
    } else {
        append(gate.params());
        if (cfg.peg_off) {
            // the ICL expert is gone, and with it the gate's second input map
            out.erase(std::remove_if(out.begin(), out.end(),
                                     [](ParamTensor* p) {
                                         return p == nullptr || p->name == "moe.fg_w" ||
                                                p->name == "moe.fg_b";
                                     }),
                      out.end());
        }
    }
    return out;
}

Tape::Var MmfModel::forward(Tape& tape, const MoleculeInput& input) {
    Tape::Var h_fused = gnn.encode(tape, input.graph);
    if (!cfg.seg_off) {
        Tape::Var tokens = encode_tokens(tape, input.token_ids, textenc);
        Tape::Var h_text = attention_pool(tape, tokens, textenc.pool_u);
        h_fused = cross_modal_attend(tape, h_fused, h_text, fusion);
    }

    Tape::Var h_icl;
    if (cfg.peg_off) {
        h_icl = tape.constant(Matrix(1, cfg.d));  // zeros
    } else {
        h_icl = encode_prediction(tape, input.icl_pred, icl);
    }

    if (cfg.moe_off) return predict_concat(tape, h_fused, h_icl, concat_head);

    Tape::Var h_unified;
    if (cfg.peg_off) {
        auto fs = tape.add(tape.matmul(h_fused, tape.transpose(tape.param(gate.fs_w))),
                           tape.param(gate.fs_b));
        auto g = tape.sigmoid(fs);
        h_unified = tape.sigmoid(tape.hadamard(g, h_fused));
    } else {
        h_unified = gate_fuse(tape, h_fused, h_icl, gate);
    }
    return predict(tape, h_unified, gate);
}

MoleculeInput MmfModel::prepare(const DataRecord& record) const {
    MoleculeInput input;
    input.graph = parse_smiles(record.smiles);
    featurize(input.graph);
    if (!cfg.seg_off) {
        input.token_ids = tokenize(record.description, vocab);
        if (input.token_ids.empty()) input.token_ids.push_back(0);
    }
    if (!cfg.peg_off) {
        if (record.icl_pred.size() == cfg.targets) {
            // keep the few-shot guess in the same units the head is trained in
            input.icl_pred = standardizer.standardize(record.icl_pred);
        } else {
            input.icl_pred.assign(cfg.targets, 0.0);
        }
    }
    return input;
}

}  // namespace mmf
