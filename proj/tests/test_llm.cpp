#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "mmf/llm.hpp"
#include "mmf/optim.hpp"

using namespace mmf;

namespace {

std::filesystem::path temp_cache(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("mmf_llm_test_" + tag);
    std::filesystem::remove_all(p);
    return p;
}

std::vector<Demo> two_demos() {
    Demo a, b;
    a.smiles = "CCO";
    a.target = {1.0, 2.0};
    a.similarity = 0.9;
    b.smiles = "CCN";
    b.target = {3.0, 4.0};
    b.similarity = 0.5;
    return {a, b};
}

}  // namespace

TEST_CASE("the 14 chain-of-thought prompts") {
    auto prompts = build_cot_prompts("CC(=O)C");
    REQUIRE(prompts.size() == 14);
    CHECK(prompts[0].rfind("What is the molecular structure", 0) == 0);
    CHECK(prompts[0].find("CC(=O)C") != std::string::npos);
    CHECK(prompts[12].find("safety measures") != std::string::npos);
    // only the first prompt names the molecule; the rest are fixed follow-ups
    for (std::size_t i = 1; i < 14; ++i)
        CHECK(prompts[i].find("CC(=O)C") == std::string::npos);
    CHECK(build_cot_prompts("CC(=O)C") == prompts);
}

TEST_CASE("few-shot prompt layout") {
    auto bundle = build_icl_prompt("CCC", two_demos());
    CHECK(bundle.kind == PromptKind::Icl);
    CHECK(bundle.demo_count == 2);
    CHECK(bundle.dropped_demos == 0);
    CHECK(bundle.text.rfind(kIclInstruction, 0) == 0);
    CHECK(bundle.text.find("CCO -> 1,2\n") != std::string::npos);
    CHECK(bundle.text.find("CCN -> 3,4\n") != std::string::npos);
    CHECK(bundle.text.find("QUERY: CCC ->") == bundle.text.size() - 13);

    auto empty = build_icl_prompt("CCC", {});
    CHECK(empty.demo_count == 0);
    CHECK(empty.text == std::string(kIclInstruction) + "\nQUERY: CCC ->");

    // byte determinism
    CHECK(build_icl_prompt("CCC", two_demos()).text == bundle.text);
}

TEST_CASE("length guard drops the least similar demos from the back") {
    std::size_t budget = std::string(kIclInstruction).size() + 32;
    auto bundle = build_icl_prompt("CCC", two_demos(), kIclInstruction, budget);
    CHECK(bundle.demo_count < 2);
    CHECK(bundle.dropped_demos == 2 - bundle.demo_count);
    // the most similar demo survives longest
    if (bundle.demo_count == 1) CHECK(bundle.text.find("CCO ->") != std::string::npos);
    CHECK(bundle.text.find("CCN ->") == std::string::npos);
}

TEST_CASE("mock icl completion is the component-wise demo mean") {
    auto cache = temp_cache("icl");
    ProviderConfig cfg;  // mock
    auto bundle = build_icl_prompt("CCC", two_demos());
    auto res = complete(bundle, cfg, cache);
    CHECK(res.text == "2, 3");
    CHECK(!res.cache_hit);

    auto again = build_icl_prompt("CCC", two_demos());
    auto res2 = complete(again, cfg, cache);
    CHECK(res2.cache_hit);
    CHECK(res2.text == res.text);
    std::filesystem::remove_all(cache);
}

TEST_CASE("mock cot completion reports parse-derived facts") {
    auto cache = temp_cache("cot");
    ProviderConfig cfg;
    auto prompts = build_cot_prompts("c1ccccc1O");
    auto bundle = make_cot_bundle("c1ccccc1O", prompts[0]);
    auto res = complete(bundle, cfg, cache);
    CHECK(res.text.find("7 heavy atoms") != std::string::npos);
    CHECK(res.text.find("aromatic") != std::string::npos);
    CHECK(res.text.find("C=6") != std::string::npos);
    CHECK(res.text.find("O=1") != std::string::npos);
    std::filesystem::remove_all(cache);
}

TEST_CASE("cache files round-trip byte-identically") {
    auto cache = temp_cache("bytes");
    ProviderConfig cfg;
    auto bundle = build_icl_prompt("CCO", two_demos());
    std::string first = complete(bundle, cfg, cache).text;
    for (int i = 0; i < 3; ++i) {
        auto b = build_icl_prompt("CCO", two_demos());
        auto r = complete(b, cfg, cache);
        CHECK(r.cache_hit);
        CHECK(r.text == first);
    }
    std::filesystem::remove_all(cache);
}

TEST_CASE("http provider demands credentials before any network use") {
    ProviderConfig cfg;
    cfg.provider = Provider::Http;
    cfg.endpoint = "http://127.0.0.1:1";  // never reached
    cfg.api_key_env = "MMF_TEST_MISSING_KEY";
    ::unsetenv("MMF_TEST_MISSING_KEY");
    auto cache = temp_cache("auth");
    auto bundle = build_icl_prompt("CCO", two_demos());
    CHECK_THROWS_AS(complete(bundle, cfg, cache), LlmError);
    try {
        auto b = build_icl_prompt("CCO", two_demos());
        complete(b, cfg, cache);
    } catch (const LlmError& e) {
        CHECK(e.kind() == LlmError::Kind::AuthMissing);
    }
    std::filesystem::remove_all(cache);
}

TEST_CASE("prediction parsing: array first, regex fallback, hard failure") {
    auto v = parse_predictions("[0.12, -3.4]", 2);
    CHECK(v[0] == doctest::Approx(0.12));
    CHECK(v[1] == doctest::Approx(-3.4));

    auto w = parse_predictions("the values are 1.0 and 2.0 approximately", 2);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 2.0);

    auto e = parse_predictions("about 3e-2 then .5", 2);
    CHECK(e[0] == doctest::Approx(0.03));
    CHECK(e[1] == doctest::Approx(0.5));

    CHECK_THROWS_AS(parse_predictions("no idea", 1), LlmError);
}

TEST_CASE("demo formatter round-trips through the parser at 6 digits") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        double x = u(rng);
        double back = parse_predictions(format_value(x), 1)[0];
        CHECK(back == doctest::Approx(x).epsilon(1e-5));
    }
}

TEST_CASE("cache keys do not collide over many distinct prompts") {
    ProviderConfig cfg;
    std::mt19937_64 rng(17);
    std::set<std::string> keys;
    std::string base = "prompt body ";
    for (int i = 0; i < 100000; ++i) {
        std::string text = base + std::to_string(rng());
        keys.insert(compute_cache_key(cfg, text));
    }
    CHECK(keys.size() == 100000);
}

TEST_CASE("prediction embedding is the documented affine lift") {
    std::mt19937_64 rng(19);
    PredictionEmbeddingParams params(4, 1, rng);
    params.w.value.fill(0.0);
    params.w.value(0, 0) = 2.0;  // first basis column scaled 2
    params.b.value(0, 2) = -0.5;

    Tape tape;
    auto h = tape.value(encode_prediction(tape, {3.0}, params));
    CHECK(h(0, 0) == 6.0);
    CHECK(h(0, 1) == 0.0);
    CHECK(h(0, 2) == -0.5);
    CHECK(h(0, 3) == 0.0);

    // linearity: encode(a+b) = encode(a) + encode(b) - bias
    params.w.value = glorot_uniform(4, 1, rng);
    Tape t2;
    auto ea = t2.value(encode_prediction(t2, {1.25}, params));
    auto eb = t2.value(encode_prediction(t2, {-0.75}, params));
    auto eab = t2.value(encode_prediction(t2, {0.5}, params));
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(eab(0, j) ==
              doctest::Approx(ea(0, j) + eb(0, j) - params.b.value(0, j)).epsilon(1e-12));
}

TEST_CASE("prediction embedding parameters pass the finite-difference check") {
    std::mt19937_64 rng(23);
    PredictionEmbeddingParams params(3, 2, rng);
    Matrix target(1, 3);
    target(0, 1) = 0.7;
    std::vector<double> pred = {0.4, -1.1};

    auto loss_value = [&]() {
        Tape tape;
        return tape.value(tape.sq_err(encode_prediction(tape, pred, params), target))(0, 0);
    };
    for (ParamTensor* p : params.params()) {
        for (ParamTensor* q : params.params()) q->zero_grad();
        Tape tape;
        auto loss = tape.sq_err(encode_prediction(tape, pred, params), target);
        tape.backward(loss);
        Matrix analytic = p->grad;
        CHECK(max_rel_error(analytic, finite_diff_grad(loss_value, *p)) < 1e-4);
    }
}
