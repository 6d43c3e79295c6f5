#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mmf/optim.hpp"
#include "mmf/textenc.hpp"

using namespace mmf;

TEST_CASE("split_tokens lowers case and isolates punctuation") {
    auto toks = split_tokens("Boiling Point: 56.5");
    std::vector<std::string> want = {"boiling", "point", ":", "56", ".", "5"};
    CHECK(toks == want);
    CHECK(split_tokens("").empty());
    CHECK(split_tokens("   \t\n").empty());
}

TEST_CASE("vocabulary build is frequency-then-lexicographic") {
    Vocabulary v = Vocabulary::build({"b b b a a c", "a"}, 8);
    // a appears 3x, b 3x (tie -> lexicographic), c once
    REQUIRE(v.tokens().size() == 3);
    CHECK(v.tokens()[0] == "a");
    CHECK(v.tokens()[1] == "b");
    CHECK(v.tokens()[2] == "c");
    CHECK(v.id_of("a") == 1);
    CHECK(v.id_of("zebra") == 0);  // unknown
    CHECK(v.size() == 4);          // +1 for <unk>
}

TEST_CASE("tokenize truncates at the document cap") {
    Vocabulary v = Vocabulary::build({"a b c d e f"}, 3);
    auto ids = tokenize("a b c d e f", v);
    CHECK(ids.size() == 3);
}

TEST_CASE("encode_tokens adds embedding and positional rows") {
    std::mt19937_64 rng(4);
    TextEncoderParams params(5, 6, 3, rng);
    Tape tape;
    auto out = tape.value(encode_tokens(tape, {2}, params));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(out(0, j) == doctest::Approx(params.embedding.value(2, j) +
                                           params.positional.value(0, j))
                               .epsilon(1e-15));

    // zero positional table -> rows equal embedding rows
    params.positional.value.fill(0.0);
    Tape t2;
    auto out2 = t2.value(encode_tokens(t2, {1, 4}, params));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(out2(0, j) == params.embedding.value(1, j));
        CHECK(out2(1, j) == params.embedding.value(4, j));
    }
}

TEST_CASE("attention_pool arithmetic") {
    // d=1 rows (ln2, 0) with u=1 -> weights (2/3, 1/3)
    ParamTensor u("u", Matrix(1, 1));
    u.value(0, 0) = 1.0;
    Matrix rows(2, 1);
    rows(0, 0) = std::log(2.0);
    rows(1, 0) = 0.0;
    Tape tape;
    auto pooled = attention_pool(tape, tape.constant(rows), u);
    double want = (2.0 / 3.0) * std::log(2.0);
    CHECK(tape.value(pooled)(0, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("zero attention vector pools the row mean") {
    std::mt19937_64 rng(5);
    ParamTensor u("u", Matrix(1, 4));  // zero-init
    Matrix rows(3, 4);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) rows(i, j) = dist(rng);
    Tape tape;
    auto pooled = tape.value(attention_pool(tape, tape.constant(rows), u));
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = (rows(0, j) + rows(1, j) + rows(2, j)) / 3.0;
        CHECK(pooled(0, j) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("single row pools to itself") {
    std::mt19937_64 rng(6);
    ParamTensor u("u", glorot_uniform(1, 3, rng));
    Matrix rows(1, 3);
    rows(0, 0) = 1.5;
    rows(0, 1) = -0.5;
    rows(0, 2) = 0.25;
    Tape tape;
    auto pooled = tape.value(attention_pool(tape, tape.constant(rows), u));
    for (std::size_t j = 0; j < 3; ++j) CHECK(pooled(0, j) == rows(0, j));
}

TEST_CASE("pooled vector stays in the coordinate-wise hull of the rows") {
    std::mt19937_64 rng(7);
    TextEncoderParams params(12, 10, 5, rng);
    params.pool_u.value = glorot_uniform(1, 5, rng);
    Vocabulary v = Vocabulary::build({"alpha beta gamma delta epsilon zeta"}, 10);
    Tape tape;
    auto tokens = encode_tokens(tape, tokenize("alpha beta zeta unseen", v), params);
    auto pooled = tape.value(attention_pool(tape, tokens, params.pool_u));
    const Matrix& rows = tape.value(tokens);
    for (std::size_t j = 0; j < 5; ++j) {
        double lo = rows(0, j), hi = rows(0, j);
        for (std::size_t i = 1; i < rows.rows(); ++i) {
            lo = std::min(lo, rows(i, j));
            hi = std::max(hi, rows(i, j));
        }
        CHECK(pooled(0, j) >= lo - 1e-12);
        CHECK(pooled(0, j) <= hi + 1e-12);
    }
}

TEST_CASE("empty document degrades to a single unknown token") {
    std::mt19937_64 rng(8);
    TextEncoderParams params(4, 6, 3, rng);
    Vocabulary v = Vocabulary::build({"hello world"}, 6);
    Tape tape;
    auto out = tape.value(encode_document(tape, "", v, params));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(out(0, j) == doctest::Approx(params.embedding.value(0, j) +
                                           params.positional.value(0, j))
                               .epsilon(1e-15));
}

TEST_CASE("text encoder parameters pass the finite-difference check") {
    std::mt19937_64 rng(9);
    Vocabulary v = Vocabulary::build({"the molecule has two rings and one ester"}, 8);
    TextEncoderParams params(v.size(), 8, 4, rng);
    params.pool_u.value = glorot_uniform(1, 4, rng);
    std::string doc = "the molecule has one ester";
    Matrix target(1, 4);
    target(0, 0) = 0.2;
    target(0, 2) = -0.4;

    auto loss_value = [&]() {
        Tape tape;
        return tape.value(tape.sq_err(encode_document(tape, doc, v, params), target))(0, 0);
    };
    for (ParamTensor* p : params.params()) {
        for (ParamTensor* q : params.params()) q->zero_grad();
        Tape tape;
        auto loss = tape.sq_err(encode_document(tape, doc, v, params), target);
        tape.backward(loss);
        Matrix analytic = p->grad;
        CHECK(max_rel_error(analytic, finite_diff_grad(loss_value, *p)) < 1e-4);
    }
}
