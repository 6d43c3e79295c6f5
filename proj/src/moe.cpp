#include "mmf/moe.hpp"

#include <stdexcept>

namespace mmf {

GateParams::GateParams(std::size_t d, std::size_t targets, std::mt19937_64& rng)
    : fs_w("moe.fs_w", glorot_uniform(d, d, rng)),
      fs_b("moe.fs_b", Matrix(1, d)),
      fg_w("moe.fg_w", glorot_uniform(d, d, rng)),
      fg_b("moe.fg_b", Matrix(1, d)),
      out_w("moe.out_w", glorot_uniform(targets, d, rng)),
      out_b("moe.out_b", Matrix(1, targets)) {}

Tape::Var gate_fuse(Tape& tape, Tape::Var h_fused, Tape::Var h_icl, GateParams& params) {
    const Matrix& hf = tape.value(h_fused);
    const Matrix& hi = tape.value(h_icl);
    if (!hf.same_shape(hi) || hf.rows() != 1)
        throw std::invalid_argument("gate_fuse: expected matching 1 x d inputs");

    auto fs = tape.add(tape.matmul(h_fused, tape.transpose(tape.param(params.fs_w))),
                       tape.param(params.fs_b));
    auto fg = tape.add(tape.matmul(h_icl, tape.transpose(tape.param(params.fg_w))),
                       tape.param(params.fg_b));
    auto gate = tape.sigmoid(tape.add(fs, fg));
    auto complement = tape.affine(gate, -1.0, 1.0);
    auto mix = tape.add(tape.hadamard(gate, h_fused), tape.hadamard(complement, h_icl));
    return tape.sigmoid(mix);
}

Tape::Var predict(Tape& tape, Tape::Var h_unified, GateParams& params) {
    const Matrix& hu = tape.value(h_unified);
    if (hu.rows() != 1 || hu.cols() != params.out_w.cols())
        throw std::invalid_argument("predict: width mismatch");
    return tape.add(tape.matmul(h_unified, tape.transpose(tape.param(params.out_w))),
                    tape.param(params.out_b));
}

ConcatHeadParams::ConcatHeadParams(std::size_t d, std::size_t targets,
                                   std::mt19937_64& rng)
    : w("moe.concat_w", glorot_uniform(targets, 2 * d, rng)),
      b("moe.concat_b", Matrix(1, targets)) {}

Tape::Var predict_concat(Tape& tape, Tape::Var h_fused, Tape::Var h_icl,
                         ConcatHeadParams& params) {
    auto cat = tape.concat_cols({h_fused, h_icl});  // 1 x 2d
    return tape.add(tape.matmul(cat, tape.transpose(tape.param(params.w))),
                    tape.param(params.b));
}

}  // namespace mmf
