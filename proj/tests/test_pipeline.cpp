#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "mmf/archive.hpp"
#include "mmf/train.hpp"

using namespace mmf;

namespace {

std::filesystem::path write_temp(const std::string& tag, const std::string& body) {
    auto p = std::filesystem::temp_directory_path() / ("mmf_pipe_" + tag + ".csv");
    std::ofstream(p) << body;
    return p;
}

// Small ring-bearing corpus with several distinct scaffolds.
LabeledDataset ring_dataset() {
    std::string body = "smiles,y\n";
    const char* cores[] = {"C1CCCCC1", "C1CCCC1", "c1ccccc1", "C1CCOCC1", "C1CC1",
                           "c1ccncc1"};
    const char* tails[] = {"", "C", "CC", "O", "CO", "N"};
    for (const char* c : cores)
        for (const char* t : tails) {
            std::string s = std::string(c) + t;
            double y = 0.3 * double(s.size()) - 1.0;
            body += s + "," + std::to_string(y) + "\n";
        }
    return load_csv(write_temp("rings", body));
}

}  // namespace

TEST_CASE("csv loading drops bad rows and infers the task") {
    auto p = write_temp("basic", "smiles,y\nCCO,1.5\nC1CC,2.0\nCC,0.5\n");
    LabeledDataset ds = load_csv(p);
    CHECK(ds.records.size() == 2);
    CHECK(ds.dropped_rows == 1);
    CHECK(ds.target_count == 1);
    CHECK(ds.target_names[0] == "y");
    CHECK(ds.task == TaskKind::Regression);

    auto p2 = write_temp("cls", "smiles,tox\nCCO,1\nCC,0\nCCC,1\n");
    CHECK(load_csv(p2).task == TaskKind::BinaryClassification);

    auto p3 = write_temp("multi", "smiles,a,b\nCCO,1,0.5\nCC,0,2.5\n");
    LabeledDataset m = load_csv(p3);
    CHECK(m.target_count == 2);
    CHECK(m.task == TaskKind::Regression);

    CHECK_THROWS_AS(load_csv(write_temp("empty", "smiles,y\n")), DatasetError);
    CHECK_THROWS_AS(load_csv(write_temp("hdr", "name,y\nCCO,1\n")), DatasetError);
}

TEST_CASE("scaffold split never divides a scaffold group") {
    LabeledDataset ds = ring_dataset();
    SplitAssignment sp = scaffold_split(ds, 0.8, 0.1, 0.1, 0);
    CHECK(sp.train.size() + sp.valid.size() + sp.test.size() == ds.records.size());

    std::set<std::string> train_keys, valid_keys, test_keys;
    auto key_of = [&](std::size_t i) {
        return murcko_scaffold(parse_smiles(ds.records[i].smiles)).key;
    };
    for (std::size_t i : sp.train) train_keys.insert(key_of(i));
    for (std::size_t i : sp.valid) valid_keys.insert(key_of(i));
    for (std::size_t i : sp.test) test_keys.insert(key_of(i));
    for (const auto& k : train_keys) {
        CHECK(!valid_keys.count(k));
        CHECK(!test_keys.count(k));
    }
    for (const auto& k : valid_keys) CHECK(!test_keys.count(k));

    // all molecules share one scaffold -> too few groups
    auto p = write_temp("onescaf", "smiles,y\nC1CC1,1\nC1CC1C,2\nC1CC1CC,3\n");
    CHECK_THROWS_AS(scaffold_split(load_csv(p)), DatasetError);
}

TEST_CASE("greedy split sends the largest group to train") {
    // group sizes 6, 2, 1, 1 under fractions 0.8/0.1/0.1
    std::string body = "smiles,y\n";
    for (const char* t : {"", "C", "CC", "CCC", "CCCC", "O"})
        body += std::string("C1CCCCC1") + t + ",1\n";
    for (const char* t : {"", "C"}) body += std::string("c1ccccc1") + t + ",1\n";
    body += "C1CC1,1\nC1CCCC1,1\n";
    LabeledDataset ds = load_csv(write_temp("greedy", body));
    SplitAssignment sp = scaffold_split(ds);
    std::set<std::size_t> train(sp.train.begin(), sp.train.end());
    for (std::size_t i = 0; i < 6; ++i) CHECK(train.count(i));
}

TEST_CASE("standardizer arithmetic and round trip") {
    auto p = write_temp("std", "smiles,y\nC,1\nCC,2\nCCC,3\n");
    LabeledDataset ds = load_csv(p);
    Standardizer s = Standardizer::fit(ds, {0, 1, 2});
    CHECK(s.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));

    auto z = s.standardize({1.0});
    CHECK(z[0] == doctest::Approx(-1.2247448713915889).epsilon(1e-10));
    auto back = s.destandardize(s.standardize({2.71828}));
    CHECK(std::fabs(back[0] - 2.71828) < 1e-10);

    // refit on standardized data is the identity transform
    std::vector<double> zs;
    for (const auto& r : ds.records) zs.push_back(s.standardize(r.targets)[0]);
    double mean = (zs[0] + zs[1] + zs[2]) / 3.0;
    CHECK(std::fabs(mean) < 1e-12);

    auto pc = write_temp("const", "smiles,y\nC,5\nCC,5\nCCC,5\n");
    LabeledDataset dc = load_csv(pc);
    CHECK_THROWS_AS(Standardizer::fit(dc, {0, 1, 2}), DatasetError);
}

TEST_CASE("metric oracles") {
    CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 0, 1, 0}) == 0.75);
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    CHECK(roc_auc({0.1, 0.2}, {1, 1}) == 0.5);  // one class absent
    CHECK(mean_absolute_error({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(root_mean_squared_error({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(mean_absolute_error({1, 3}, {2, 5}) == 1.5);
    CHECK(root_mean_squared_error({0, 0}, {3, 4}) ==
          doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
}

TEST_CASE("plateau schedule halves after exactly the configured patience") {
    PlateauSchedule sched(1e-3, 7, 0.5);
    CHECK(sched.observe(1.0) == 1e-3);  // first observation improves
    for (int i = 0; i < 6; ++i) CHECK(sched.observe(1.0) == 1e-3);  // 6 stale epochs
    CHECK(sched.observe(1.0) == 0.5e-3);  // the 7th stale epoch cuts the rate
    // improvement resets the counter
    CHECK(sched.observe(0.5) == 0.5e-3);
    for (int i = 0; i < 6; ++i) CHECK(sched.observe(0.6) == 0.5e-3);
    CHECK(sched.observe(0.6) == 0.25e-3);
}

TEST_CASE("training is deterministic and returns the best epoch") {
    LabeledDataset ds = ring_dataset();
    SplitAssignment sp = scaffold_split(ds);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.head_dim = 4;
    cfg.batch_size = 8;
    cfg.seed = 11;
    ProviderConfig provider;
    auto cache = std::filesystem::temp_directory_path() / "mmf_pipe_cache";
    std::filesystem::remove_all(cache);
    populate_descriptions(ds, provider, cache);
    populate_icl_predictions(ds, sp, cfg, provider, cache);

    MmfModel m1 = build_model(cfg, ds);
    TrainResult r1 = train(m1, ds, sp, cfg);
    MmfModel m2 = build_model(cfg, ds);
    TrainResult r2 = train(m2, ds, sp, cfg);

    REQUIRE(r1.log.size() == r2.log.size());
    for (std::size_t e = 0; e < r1.log.size(); ++e) {
        CHECK(r1.log[e].train_loss == r2.log[e].train_loss);
        CHECK(r1.log[e].valid_loss == r2.log[e].valid_loss);
        CHECK(r1.log[e].lr == r2.log[e].lr);
    }
    for (const EpochLog& e : r1.log)
        CHECK(r1.best_valid_loss <= e.valid_loss);
    CHECK(r1.log[r1.best_epoch].valid_loss == r1.best_valid_loss);

    EvalReport report = evaluate(m1, ds, sp.valid);
    CHECK(report.mae.size() == 1);
    CHECK(report.mean_mae == report.mae[0]);
    CHECK(report.mean_mae >= 0.0);
    std::filesystem::remove_all(cache);
}

TEST_CASE("ablations excise their parameter families") {
    LabeledDataset ds = ring_dataset();
    TrainConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.head_dim = 4;

    auto names_of = [](MmfModel& m) {
        std::set<std::string> names;
        for (ParamTensor* p : m.trainable_params()) names.insert(p->name);
        return names;
    };

    MmfModel full = build_model(cfg, ds);
    auto base = names_of(full);
    CHECK(base.count("textenc.embedding"));
    CHECK(base.count("fusion.w_out"));
    CHECK(base.count("llm.w_icl"));
    CHECK(base.count("moe.fg_w"));

    cfg.seg_off = true;
    MmfModel seg = build_model(cfg, ds);
    auto seg_names = names_of(seg);
    for (const auto& n : seg_names) {
        CHECK(n.rfind("textenc.", 0) != 0);
        CHECK(n.rfind("fusion.", 0) != 0);
    }
    CHECK(seg_names.count("moe.out_w"));
    cfg.seg_off = false;

    cfg.peg_off = true;
    MmfModel peg = build_model(cfg, ds);
    auto peg_names = names_of(peg);
    CHECK(!peg_names.count("llm.w_icl"));
    CHECK(!peg_names.count("llm.b_icl"));
    CHECK(!peg_names.count("moe.fg_w"));
    CHECK(!peg_names.count("moe.fg_b"));
    CHECK(peg_names.count("moe.fs_w"));
    cfg.peg_off = false;

    cfg.moe_off = true;
    MmfModel moe = build_model(cfg, ds);
    auto moe_names = names_of(moe);
    CHECK(moe_names.count("moe.concat_w"));
    for (const auto& n : moe_names) CHECK(n.rfind("moe.fs", 0) != 0);
    CHECK(!moe_names.count("moe.out_w"));
}

TEST_CASE("every ablation variant trains and evaluates") {
    LabeledDataset ds = ring_dataset();
    SplitAssignment sp = scaffold_split(ds);
    ProviderConfig provider;
    auto cache = std::filesystem::temp_directory_path() / "mmf_pipe_cache_abl";
    std::filesystem::remove_all(cache);

    for (int variant = 0; variant < 3; ++variant) {
        TrainConfig cfg;
        cfg.epochs = 2;
        cfg.d = 8;
        cfg.heads = 2;
        cfg.head_dim = 4;
        cfg.batch_size = 8;
        cfg.seg_off = variant == 0;
        cfg.peg_off = variant == 1;
        cfg.moe_off = variant == 2;
        populate_descriptions(ds, provider, cache);
        if (!cfg.peg_off) populate_icl_predictions(ds, sp, cfg, provider, cache);
        MmfModel model = build_model(cfg, ds);
        TrainResult r = train(model, ds, sp, cfg);
        CHECK(r.log.size() == 2);
        EvalReport rep = evaluate(model, ds, sp.valid);
        CHECK(std::isfinite(rep.mean_mae));
    }
    std::filesystem::remove_all(cache);
}

TEST_CASE("model archive round-trips bit-exactly") {
    LabeledDataset ds = ring_dataset();
    SplitAssignment sp = scaffold_split(ds);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.head_dim = 4;
    cfg.batch_size = 8;
    ProviderConfig provider;
    auto cache = std::filesystem::temp_directory_path() / "mmf_pipe_cache_arc";
    std::filesystem::remove_all(cache);
    populate_descriptions(ds, provider, cache);
    populate_icl_predictions(ds, sp, cfg, provider, cache);
    MmfModel model = build_model(cfg, ds);
    train(model, ds, sp, cfg);

    auto path = std::filesystem::temp_directory_path() / "mmf_pipe_model.txt";
    save_model(model, path);
    MmfModel loaded = load_model(path);

    CHECK(loaded.cfg.d == model.cfg.d);
    CHECK(loaded.vocab.size() == model.vocab.size());
    auto y1 = predict_record(model, ds.records[0]);
    auto y2 = predict_record(loaded, ds.records[0]);
    CHECK(y1[0] == y2[0]);

    // corrupting a stored value breaks the checksum
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();
    auto at = text.find("param ");
    REQUIRE(at != std::string::npos);
    text[text.find('.', at)] = '7';
    auto bad = std::filesystem::temp_directory_path() / "mmf_pipe_model_bad.txt";
    std::ofstream(bad) << text;
    CHECK_THROWS_AS(load_model(bad), ArchiveMismatch);

    std::filesystem::remove(path);
    std::filesystem::remove(bad);
    std::filesystem::remove_all(cache);
}

TEST_CASE("training error taxonomy") {
    LabeledDataset ds = ring_dataset();
    SplitAssignment sp = scaffold_split(ds);
    TrainConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.head_dim = 4;
    MmfModel model = build_model(cfg, ds);

    SplitAssignment empty = sp;
    empty.train.clear();
    CHECK_THROWS_AS(train(model, ds, empty, cfg), TrainError);
    SplitAssignment novalid = sp;
    novalid.valid.clear();
    CHECK_THROWS_AS(train(model, ds, novalid, cfg), TrainError);
    CHECK_THROWS_AS(evaluate(model, ds, {}), TrainError);
}
