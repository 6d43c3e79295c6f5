#include "mmf/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace mmf {

Tape::Var Tape::push(Matrix value, std::function<void()> back) {
    nodes_.push_back(Node{std::move(value), {}, std::move(back)});
    Node& n = nodes_.back();
    n.grad = Matrix(n.value.rows(), n.value.cols());
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::constant(Matrix m) { return push(std::move(m)); }

Tape::Var Tape::param(ParamTensor& p) {
    Var v = push(p.value);
    int id = v.id;
    ParamTensor* pp = &p;
    nodes_[id].back = [this, id, pp] {
        kernels::axpy(1.0, nodes_[id].grad.data(), pp->grad.data(), pp->grad.size());
    };
    return v;
}

Tape::Var Tape::matmul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols() != B.rows()) throw std::invalid_argument("Tape::matmul: shape mismatch");
    Var out = push(mmf::matmul(A, B));
    int oid = out.id;
    nodes_[oid].back = [this, a, b, oid] {
        const Matrix& dC = nodes_[oid].grad;
        Matrix dA = mmf::matmul(dC, value(b).transposed());
        kernels::axpy(1.0, dA.data(), nodes_[a.id].grad.data(), dA.size());
        Matrix dB = mmf::matmul(value(a).transposed(), dC);
        kernels::axpy(1.0, dB.data(), nodes_[b.id].grad.data(), dB.size());
    };
    return out;
}

Tape::Var Tape::add(Var a, Var b) {
    Var out = push(value(a) + value(b));
    int oid = out.id;
    nodes_[oid].back = [this, a, b, oid] {
        const Matrix& d = nodes_[oid].grad;
        kernels::axpy(1.0, d.data(), nodes_[a.id].grad.data(), d.size());
        kernels::axpy(1.0, d.data(), nodes_[b.id].grad.data(), d.size());
    };
    return out;
}

Tape::Var Tape::sub(Var a, Var b) {
    Var out = push(value(a) - value(b));
    int oid = out.id;
    nodes_[oid].back = [this, a, b, oid] {
        const Matrix& d = nodes_[oid].grad;
        kernels::axpy(1.0, d.data(), nodes_[a.id].grad.data(), d.size());
        kernels::axpy(-1.0, d.data(), nodes_[b.id].grad.data(), d.size());
    };
    return out;
}

Tape::Var Tape::hadamard(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (!A.same_shape(B)) throw std::invalid_argument("Tape::hadamard: shape mismatch");
    Matrix C(A.rows(), A.cols());
    kernels::hadamard(A.data(), B.data(), C.data(), C.size());
    Var out = push(std::move(C));
    int oid = out.id;
    nodes_[oid].back = [this, a, b, oid] {
        const Matrix& d = nodes_[oid].grad;
        Matrix tmp(d.rows(), d.cols());
        kernels::hadamard(d.data(), value(b).data(), tmp.data(), tmp.size());
        kernels::axpy(1.0, tmp.data(), nodes_[a.id].grad.data(), tmp.size());
        kernels::hadamard(d.data(), value(a).data(), tmp.data(), tmp.size());
        kernels::axpy(1.0, tmp.data(), nodes_[b.id].grad.data(), tmp.size());
    };
    return out;
}

Tape::Var Tape::affine(Var x, double a, double b) {
    const Matrix& X = value(x);
    Matrix Y(X.rows(), X.cols(), b);
    kernels::axpy(a, X.data(), Y.data(), Y.size());
    Var out = push(std::move(Y));
    int oid = out.id;
    nodes_[oid].back = [this, x, a, oid] {
        const Matrix& d = nodes_[oid].grad;
        kernels::axpy(a, d.data(), nodes_[x.id].grad.data(), d.size());
    };
    return out;
}

Tape::Var Tape::transpose(Var x) {
    Var out = push(value(x).transposed());
    int oid = out.id;
    nodes_[oid].back = [this, x, oid] {
        Matrix d = nodes_[oid].grad.transposed();
        kernels::axpy(1.0, d.data(), nodes_[x.id].grad.data(), d.size());
    };
    return out;
}

Tape::Var Tape::sigmoid(Var x) {
    const Matrix& X = value(x);
    Matrix Y(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.size(); ++i) Y.at_flat(i) = 1.0 / (1.0 + std::exp(-X.at_flat(i)));
    Var out = push(std::move(Y));
    int oid = out.id;
    nodes_[oid].back = [this, x, oid] {
        const Matrix& Y = nodes_[oid].value;
        const Matrix& d = nodes_[oid].grad;
        Matrix& dx = nodes_[x.id].grad;
        for (std::size_t i = 0; i < d.size(); ++i) {
            double y = Y.at_flat(i);
            dx.at_flat(i) += d.at_flat(i) * y * (1.0 - y);
        }
    };
    return out;
}

Tape::Var Tape::tanh(Var x) {
    const Matrix& X = value(x);
    Matrix Y(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.size(); ++i) Y.at_flat(i) = std::tanh(X.at_flat(i));
    Var out = push(std::move(Y));
    int oid = out.id;
    nodes_[oid].back = [this, x, oid] {
        const Matrix& Y = nodes_[oid].value;
        const Matrix& d = nodes_[oid].grad;
        Matrix& dx = nodes_[x.id].grad;
        for (std::size_t i = 0; i < d.size(); ++i) {
            double y = Y.at_flat(i);
            dx.at_flat(i) += d.at_flat(i) * (1.0 - y * y);
        }
    };
    return out;
}

Tape::Var Tape::softmax_rows(Var x) {
    Var out = push(mmf::softmax_rows(value(x)));
    int oid = out.id;
    nodes_[oid].back = [this, x, oid] {
        const Matrix& Y = nodes_[oid].value;
        const Matrix& d = nodes_[oid].grad;
        Matrix& dx = nodes_[x.id].grad;
        for (std::size_t i = 0; i < Y.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < Y.cols(); ++j) dot += d(i, j) * Y(i, j);
            for (std::size_t j = 0; j < Y.cols(); ++j)
                dx(i, j) += Y(i, j) * (d(i, j) - dot);
        }
    };
    return out;
}

Tape::Var Tape::concat_rows(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols() != B.cols()) throw std::invalid_argument("Tape::concat_rows: width mismatch");
    Matrix C(A.rows() + B.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) = A(i, j);
    for (std::size_t i = 0; i < B.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) C(A.rows() + i, j) = B(i, j);
    Var out = push(std::move(C));
    int oid = out.id;
    std::size_t arows = A.rows();
    nodes_[oid].back = [this, a, b, oid, arows] {
        const Matrix& d = nodes_[oid].grad;
        Matrix& da = nodes_[a.id].grad;
        Matrix& db = nodes_[b.id].grad;
        for (std::size_t i = 0; i < da.rows(); ++i)
            for (std::size_t j = 0; j < da.cols(); ++j) da(i, j) += d(i, j);
        for (std::size_t i = 0; i < db.rows(); ++i)
            for (std::size_t j = 0; j < db.cols(); ++j) db(i, j) += d(arows + i, j);
    };
    return out;
}

Tape::Var Tape::concat_cols(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("Tape::concat_cols: empty");
    std::size_t rows = value(xs[0]).rows();
    std::size_t total = 0;
    for (Var v : xs) {
        if (value(v).rows() != rows)
            throw std::invalid_argument("Tape::concat_cols: row mismatch");
        total += value(v).cols();
    }
    Matrix C(rows, total);
    std::size_t off = 0;
    for (Var v : xs) {
        const Matrix& X = value(v);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < X.cols(); ++j) C(i, off + j) = X(i, j);
        off += X.cols();
    }
    Var out = push(std::move(C));
    int oid = out.id;
    std::vector<Var> parts = xs;
    nodes_[oid].back = [this, parts, oid] {
        const Matrix& d = nodes_[oid].grad;
        std::size_t off = 0;
        for (Var v : parts) {
            Matrix& dv = nodes_[v.id].grad;
            for (std::size_t i = 0; i < dv.rows(); ++i)
                for (std::size_t j = 0; j < dv.cols(); ++j) dv(i, j) += d(i, off + j);
            off += dv.cols();
        }
    };
    return out;
}

Tape::Var Tape::gather_rows(Var table, std::vector<int> ids) {
    const Matrix& T = value(table);
    for (int id : ids)
        if (id < 0 || static_cast<std::size_t>(id) >= T.rows())
            throw std::out_of_range("gather_rows: row index out of range");
    Matrix Y(ids.size(), T.cols());
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < T.cols(); ++j) Y(i, j) = T(ids[i], j);
    Var out = push(std::move(Y));
    int oid = out.id;
    nodes_[oid].back = [this, table, ids = std::move(ids), oid] {
        const Matrix& d = nodes_[oid].grad;
        Matrix& dt = nodes_[table.id].grad;
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = 0; j < d.cols(); ++j) dt(ids[i], j) += d(i, j);
    };
    return out;
}

Tape::Var Tape::sum(Var x) {
    const Matrix& X = value(x);
    double s = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) s += X.at_flat(i);
    Var out = push(Matrix(1, 1, s));
    int oid = out.id;
    nodes_[oid].back = [this, x, oid] {
        double d = nodes_[oid].grad(0, 0);
        Matrix& dx = nodes_[x.id].grad;
        for (std::size_t i = 0; i < dx.size(); ++i) dx.at_flat(i) += d;
    };
    return out;
}

Tape::Var Tape::sq_err(Var pred, Matrix target) {
    const Matrix& P = value(pred);
    if (!P.same_shape(target)) throw std::invalid_argument("Tape::sq_err: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        double e = P.at_flat(i) - target.at_flat(i);
        s += e * e;
    }
    Var out = push(Matrix(1, 1, s));
    int oid = out.id;
    nodes_[oid].back = [this, pred, t = std::move(target), oid] {
        double d = nodes_[oid].grad(0, 0);
        const Matrix& P = value(pred);
        Matrix& dp = nodes_[pred.id].grad;
        for (std::size_t i = 0; i < P.size(); ++i)
            dp.at_flat(i) += 2.0 * (P.at_flat(i) - t.at_flat(i)) * d;
    };
    return out;
}

void Tape::backward(Var seed) {
    if (value(seed).rows() != 1 || value(seed).cols() != 1)
        throw std::invalid_argument("Tape::backward: seed must be 1x1");
    nodes_[seed.id].grad(0, 0) = 1.0;
    for (int i = seed.id; i >= 0; --i) {
        if (nodes_[i].back) nodes_[i].back();
    }
}

}  // namespace mmf
