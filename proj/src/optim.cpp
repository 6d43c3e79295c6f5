#include "mmf/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mmf {

void adam_step(const std::vector<ParamTensor*>& params, AdamState& state) {
    state.step += 1;
    double t = static_cast<double>(state.step);
    double bc1 = 1.0 - std::pow(state.beta1, t);
    double bc2 = 1.0 - std::pow(state.beta2, t);
    for (ParamTensor* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            double g = p->grad.at_flat(i);
            double m = state.beta1 * p->adam_m.at_flat(i) + (1.0 - state.beta1) * g;
            double v = state.beta2 * p->adam_v.at_flat(i) + (1.0 - state.beta2) * g * g;
            p->adam_m.at_flat(i) = m;
            p->adam_v.at_flat(i) = v;
            double mhat = m / bc1;
            double vhat = v / bc2;
            p->value.at_flat(i) -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        p->zero_grad();
    }
}

Matrix finite_diff_grad(const std::function<double()>& f, ParamTensor& p, double eps) {
    Matrix out(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
        double orig = p.value.at_flat(i);
        p.value.at_flat(i) = orig + eps;
        double fp = f();
        p.value.at_flat(i) = orig - eps;
        double fm = f();
        p.value.at_flat(i) = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite objective");
        out.at_flat(i) = (fp - fm) / (2.0 * eps);
    }
    return out;
}

double max_rel_error(const Matrix& analytic, const Matrix& numeric, double abs_floor) {
    if (!analytic.same_shape(numeric))
        throw std::invalid_argument("max_rel_error: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double a = analytic.at_flat(i);
        double n = numeric.at_flat(i);
        double denom = std::max({std::fabs(a), std::fabs(n), abs_floor});
        worst = std::max(worst, std::fabs(a - n) / denom);
    }
    return worst;
}

}  // namespace mmf
