#pragma once

#include <random>
#include <string>
#include <vector>

#include "mmf/dataset.hpp"
#include "mmf/fusion.hpp"
#include "mmf/gnn.hpp"
#include "mmf/llm.hpp"
#include "mmf/moe.hpp"
#include "mmf/textenc.hpp"

namespace mmf {

struct ModelConfig {
    std::size_t d = 128;
    std::size_t cheb_k = 3;
    std::size_t heads = 4;
    std::size_t head_dim = 32;
    std::size_t set2set_steps = 3;
    std::size_t max_text_tokens = 512;
    std::size_t targets = 1;
    TaskKind task = TaskKind::Regression;
    // ablations
    bool seg_off = false;   // drop text encoder + fusion, h_f := h_g
    bool peg_off = false;   // h_ICL := 0, drop f_g and W_icl
    bool moe_off = false;   // replace the gate with a linear head on (h_f ⊕ h_ICL)
};

// One forward-pass worth of cached per-molecule inputs.
struct MoleculeInput {
    MoleculeGraph graph;          // featurized
    std::vector<int> token_ids;   // tokenized description
    std::vector<double> icl_pred; // parsed few-shot prediction (length c)
};

// The full trainable stack: gamma (graph encoder), theta (text encoder) and
// omega (fusion + prediction embedding + gated head).
struct MmfModel {
    ModelConfig cfg;
    Vocabulary vocab;
    GraphEncoder gnn;
    TextEncoderParams textenc;
    CrossModalParams fusion;
    PredictionEmbeddingParams icl;
    GateParams gate;
    ConcatHeadParams concat_head;
    Standardizer standardizer;  // fitted by train(); identity until then

    MmfModel(const ModelConfig& config, Vocabulary vocabulary, std::uint64_t seed);

    // Parameter set honoring the ablation flags; the excluded families are
    // absent, not merely frozen.
    std::vector<ParamTensor*> trainable_params();

    // y_hat (1 x c) in standardized target units.
    Tape::Var forward(Tape& tape, const MoleculeInput& input);

    MoleculeInput prepare(const DataRecord& record) const;
};

}  // namespace mmf
