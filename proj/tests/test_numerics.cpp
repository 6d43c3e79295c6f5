#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mmf/matrix.hpp"
#include "mmf/optim.hpp"
#include "mmf/tape.hpp"

using namespace mmf;

TEST_CASE("softmax_rows basics") {
    Matrix m(1, 2, {0.0, 0.0});
    Matrix s = softmax_rows(m);
    CHECK(s(0, 0) == doctest::Approx(0.5));
    CHECK(s(0, 1) == doctest::Approx(0.5));

    Matrix l(1, 3, {std::log(1.0), std::log(2.0), std::log(3.0)});
    Matrix sl = softmax_rows(l);
    CHECK(sl(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(sl(0, 1) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    CHECK(sl(0, 2) == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("softmax_rows is shift invariant and rows sum to one") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    Matrix m(4, 6);
    for (std::size_t i = 0; i < m.size(); ++i) m.at_flat(i) = d(rng);
    Matrix shifted = m;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted.at_flat(i) += 123.0;
    Matrix a = softmax_rows(m), b = softmax_rows(shifted);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            CHECK(a(i, j) == doctest::Approx(b(i, j)).epsilon(1e-12));
            CHECK(a(i, j) > 0.0);
            CHECK(a(i, j) <= 1.0);
            sum += a(i, j);
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("adam: zero gradient leaves values and moments untouched") {
    ParamTensor p("p", Matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
    AdamState st;
    adam_step({&p}, st);
    CHECK(st.step == 1);
    CHECK(p.value(0, 0) == 1.0);
    CHECK(p.value(1, 1) == 4.0);
    CHECK(p.adam_m.max_abs() == 0.0);
    CHECK(p.adam_v.max_abs() == 0.0);
}

TEST_CASE("adam: first step magnitude is about lr") {
    ParamTensor p("p", Matrix(1, 1, {5.0}));
    p.grad(0, 0) = 0.3;
    AdamState st;
    st.lr = 1e-3;
    adam_step({&p}, st);
    // bias correction makes the very first update lr * g / (|g| + eps)
    CHECK(std::fabs(5.0 - p.value(0, 0)) == doctest::Approx(st.lr).epsilon(1e-4));
    CHECK(p.grad(0, 0) == 0.0);  // grads zeroed
}

TEST_CASE("adam descends a quadratic") {
    ParamTensor p("x", Matrix(1, 1, {2.0}));
    AdamState st;
    st.lr = 0.1;
    double prev = 4.0;
    for (int i = 0; i < 2; ++i) {
        p.grad(0, 0) = 2.0 * p.value(0, 0);
        adam_step({&p}, st);
        double f = p.value(0, 0) * p.value(0, 0);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("adam with lr=0 is the identity on values") {
    ParamTensor p("p", Matrix(1, 3, {1.0, -2.0, 0.5}));
    p.grad = Matrix(1, 3, {3.0, 1.0, -1.0});
    AdamState st;
    st.lr = 0.0;
    adam_step({&p}, st);
    CHECK(p.value(0, 0) == 1.0);
    CHECK(p.value(0, 1) == -2.0);
    CHECK(p.value(0, 2) == 0.5);
}

TEST_CASE("finite_diff_grad on analytic functions") {
    ParamTensor p("x", Matrix(1, 1, {3.0}));
    auto sq = [&] { return p.value(0, 0) * p.value(0, 0); };
    Matrix g = finite_diff_grad(sq, p);
    CHECK(g(0, 0) == doctest::Approx(6.0).epsilon(1e-6));

    ParamTensor z("z", Matrix(2, 2));
    auto sig_sum = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < z.value.size(); ++i)
            s += 1.0 / (1.0 + std::exp(-z.value.at_flat(i)));
        return s;
    };
    Matrix gs = finite_diff_grad(sig_sum, z);
    for (std::size_t i = 0; i < gs.size(); ++i)
        CHECK(gs.at_flat(i) == doctest::Approx(0.25).epsilon(1e-8));

    auto constant = [&] { return 42.0; };
    Matrix gc = finite_diff_grad(constant, p);
    CHECK(gc(0, 0) == 0.0);
}

TEST_CASE("tape gradients match finite differences on a composite graph") {
    std::mt19937_64 rng(17);
    ParamTensor w("w", glorot_uniform(3, 4, rng));
    ParamTensor b("b", glorot_uniform(1, 3, rng));
    Matrix x = glorot_uniform(4, 2, rng);

    auto loss = [&] {
        Tape t;
        auto vw = t.param(w);
        auto vb = t.param(b);
        auto vx = t.constant(x);
        auto h = t.matmul(vw, vx);                      // 3x2
        auto s = t.sigmoid(t.matmul(vb, h));            // 1x2
        auto sm = t.softmax_rows(s);
        auto out = t.sum(t.hadamard(sm, s));
        return t.value(out)(0, 0);
    };

    double base = loss();
    CHECK(std::isfinite(base));

    // analytic grads
    Tape t;
    auto vw = t.param(w);
    auto vb = t.param(b);
    auto vx = t.constant(x);
    auto h = t.matmul(vw, vx);
    auto s = t.sigmoid(t.matmul(vb, h));
    auto sm = t.softmax_rows(s);
    auto out = t.sum(t.hadamard(sm, s));
    w.zero_grad();
    b.zero_grad();
    t.backward(out);

    Matrix gw = w.grad, gb = b.grad;
    CHECK(max_rel_error(gw, finite_diff_grad(loss, w)) < 1e-6);
    CHECK(max_rel_error(gb, finite_diff_grad(loss, b)) < 1e-6);
}

TEST_CASE("tape concat/gather/transpose gradients") {
    std::mt19937_64 rng(23);
    ParamTensor table("tbl", glorot_uniform(5, 3, rng));
    ParamTensor m("m", glorot_uniform(2, 3, rng));
    std::vector<int> ids = {4, 0, 0, 2};

    auto loss = [&] {
        Tape t;
        auto vt = t.param(table);
        auto vm = t.param(m);
        auto rows = t.gather_rows(vt, ids);              // 4x3
        auto cat = t.concat_rows(rows, vm);              // 6x3
        auto tr = t.transpose(cat);                      // 3x6
        auto sq = t.matmul(cat, tr);                     // 6x6
        auto act = t.tanh(t.affine(sq, 0.5, -0.1));
        auto out = t.sum(act);
        return t.value(out)(0, 0);
    };

    Tape t;
    auto vt = t.param(table);
    auto vm = t.param(m);
    auto rows = t.gather_rows(vt, ids);
    auto cat = t.concat_rows(rows, vm);
    auto tr = t.transpose(cat);
    auto sq = t.matmul(cat, tr);
    auto act = t.tanh(t.affine(sq, 0.5, -0.1));
    auto out = t.sum(act);
    table.zero_grad();
    m.zero_grad();
    t.backward(out);

    CHECK(max_rel_error(table.grad, finite_diff_grad(loss, table)) < 1e-6);
    CHECK(max_rel_error(m.grad, finite_diff_grad(loss, m)) < 1e-6);
}

TEST_CASE("tape sq_err gradient") {
    std::mt19937_64 rng(29);
    ParamTensor p("p", glorot_uniform(1, 4, rng));
    Matrix target(1, 4, {0.1, -0.2, 0.3, 0.4});
    auto loss = [&] {
        Tape t;
        auto out = t.sq_err(t.param(p), target);
        return t.value(out)(0, 0);
    };
    Tape t;
    auto out = t.sq_err(t.param(p), target);
    p.zero_grad();
    t.backward(out);
    CHECK(max_rel_error(p.grad, finite_diff_grad(loss, p)) < 1e-7);
}
