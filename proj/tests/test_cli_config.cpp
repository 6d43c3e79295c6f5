#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mmf/runconfig.hpp"

using namespace mmf;

TEST_CASE("dumped defaults reload to the same dump") {
    RunConfig defaults;
    std::string dumped = dump_config(defaults);

    RunConfig reloaded;
    std::istringstream in(dumped);
    load_config_text(reloaded, in);
    CHECK(dump_config(reloaded) == dumped);
}

TEST_CASE("file values match the in-code defaults key by key") {
    RunConfig rc;
    CHECK(rc.train.batch_size == 32);
    CHECK(rc.train.epochs == 50);
    CHECK(rc.train.d == 128);
    CHECK(rc.train.lr == 1e-3);
    CHECK(rc.train.plateau_patience == 7);
    CHECK(rc.train.lr_factor == 0.5);
    CHECK(rc.train.early_stop_patience == 15);
    CHECK(rc.train.cheb_k == 3);
    CHECK(rc.train.heads == 4);
    CHECK(rc.train.head_dim == 32);
    CHECK(rc.train.set2set_steps == 3);
    CHECK(rc.train.icl_k == 16);
    CHECK(rc.train.icl_strategy == SampleStrategy::Scaffold);
    CHECK(rc.train.train_frac == 0.8);
    CHECK(rc.train.valid_frac == 0.1);
    CHECK(rc.train.test_frac == 0.1);
    CHECK(rc.provider.provider == Provider::Mock);
    CHECK(rc.provider.top_p == 1.0);
    CHECK(rc.provider.temperature == 0.0);
    CHECK(rc.provider.prompt_char_budget == 16384);
}

TEST_CASE("unknown keys are rejected by name") {
    RunConfig rc;
    try {
        apply_config_entry(rc, "bogus_knob", "1");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus_knob") != std::string::npos);
    }
}

TEST_CASE("malformed values are rejected") {
    RunConfig rc;
    CHECK_THROWS_AS(apply_config_entry(rc, "epochs", "many"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(rc, "lr", "0.1x"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(rc, "seg_off", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(rc, "icl_strategy", "psychic"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(rc, "provider", "carrier-pigeon"), ConfigError);
}

TEST_CASE("comments, blanks, and whitespace are tolerated") {
    RunConfig rc;
    std::istringstream in(
        "# run settings\n"
        "\n"
        "  epochs = 9   # inline comment\n"
        "icl_strategy=random\n"
        "seg_off=true\n"
        "dataset=/data/things.csv\n");
    load_config_text(rc, in);
    CHECK(rc.train.epochs == 9);
    CHECK(rc.train.icl_strategy == SampleStrategy::Random);
    CHECK(rc.train.seg_off);
    CHECK(rc.dataset == "/data/things.csv");
}

TEST_CASE("later entries override earlier ones") {
    RunConfig rc;
    std::istringstream in("lr=0.01\nlr=0.125\n");
    load_config_text(rc, in);
    CHECK(rc.train.lr == 0.125);
}

TEST_CASE("missing separator is an error") {
    RunConfig rc;
    std::istringstream in("epochs 9\n");
    CHECK_THROWS_AS(load_config_text(rc, in), ConfigError);
}
