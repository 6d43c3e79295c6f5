// Command-line front end: describe / train / eval / predict / fp / demos /
// gradcheck over the fusion model. Exit codes: 0 ok, 1 usage or config
// error, 2 data error, 3 provider error.

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmf/archive.hpp"
#include "mmf/optim.hpp"
#include "mmf/runconfig.hpp"

namespace {

using namespace mmf;

struct CliError {
    int code;
    std::string message;
};

SplitAssignment make_splits(const LabeledDataset& ds, const TrainConfig& t) {
    return scaffold_split(ds, t.train_frac, t.valid_frac, t.test_frac, t.seed);
}

void prepass(LabeledDataset& ds, const SplitAssignment& splits, const RunConfig& rc,
             bool want_icl, bool verbose) {
    DescribeStats d = populate_descriptions(ds, rc.provider, rc.cache_dir);
    if (verbose)
        std::cout << "describe: molecules=" << d.molecules << " cache_hits=" << d.cache_hits
                  << " provider_calls=" << d.provider_calls << "\n";
    if (want_icl) {
        IclStats s = populate_icl_predictions(ds, splits, rc.train, rc.provider, rc.cache_dir);
        if (verbose)
            std::cout << "icl: molecules=" << s.molecules << " demo_count=" << s.demo_count
                      << " dropped_demos=" << s.dropped_demos
                      << " cache_hits=" << s.cache_hits
                      << " provider_calls=" << s.provider_calls << "\n";
    }
}

int cmd_describe(RunConfig& rc) {
    LabeledDataset ds = load_csv(rc.dataset);
    DescribeStats d = populate_descriptions(ds, rc.provider, rc.cache_dir);
    std::cout << "describe: molecules=" << d.molecules << " cache_hits=" << d.cache_hits
              << " provider_calls=" << d.provider_calls << "\n";
    return 0;
}

int cmd_train(RunConfig& rc) {
    LabeledDataset ds = load_csv(rc.dataset);
    if (ds.dropped_rows > 0)
        std::cout << "dataset: dropped_rows=" << ds.dropped_rows << "\n";
    SplitAssignment splits = make_splits(ds, rc.train);
    prepass(ds, splits, rc, !rc.train.peg_off, true);

    MmfModel model = build_model(rc.train, ds);
    TrainResult result = train(model, ds, splits, rc.train);
    for (const EpochLog& e : result.log)
        std::printf("epoch=%zu train_loss=%.8g valid_loss=%.8g lr=%.8g\n", e.epoch,
                    e.train_loss, e.valid_loss, e.lr);
    std::printf("train: best_epoch=%zu best_valid_loss=%.8g\n", result.best_epoch,
                result.best_valid_loss);

    save_model(model, rc.archive);
    std::cout << "archive: " << rc.archive << "\n";

    if (!splits.test.empty()) {
        EvalReport report = evaluate(model, ds, splits.test);
        if (ds.task == TaskKind::Regression)
            std::printf("test: mean_mae=%.8g mean_rmse=%.8g\n", report.mean_mae,
                        report.mean_rmse);
        else
            std::printf("test: mean_auc=%.8g\n", report.mean_auc);
    }
    return 0;
}

void print_report(const EvalReport& report) {
    if (report.task == TaskKind::Regression) {
        std::printf("%-16s %14s %14s\n", "target", "mae", "rmse");
        for (std::size_t j = 0; j < report.mae.size(); ++j)
            std::printf("%-16s %14.8g %14.8g\n", report.target_names[j].c_str(),
                        report.mae[j], report.rmse[j]);
        std::printf("%-16s %14.8g %14.8g\n", "mean", report.mean_mae, report.mean_rmse);
        std::printf("eval: mean_mae=%.8g mean_rmse=%.8g\n", report.mean_mae,
                    report.mean_rmse);
    } else {
        std::printf("%-16s %14s\n", "target", "auc");
        for (std::size_t j = 0; j < report.auc.size(); ++j)
            std::printf("%-16s %14.8g\n", report.target_names[j].c_str(), report.auc[j]);
        std::printf("%-16s %14.8g\n", "mean", report.mean_auc);
        std::printf("eval: mean_auc=%.8g\n", report.mean_auc);
    }
}

int cmd_eval(RunConfig& rc, const std::string& split_name) {
    MmfModel model = load_model(rc.archive);
    LabeledDataset ds = load_csv(rc.dataset);
    if (ds.target_count != model.cfg.targets)
        throw ArchiveMismatch("archive: target count disagrees with dataset");
    SplitAssignment splits = make_splits(ds, rc.train);
    prepass(ds, splits, rc, !model.cfg.peg_off, false);

    std::vector<std::size_t> indices;
    if (split_name == "train") indices = splits.train;
    else if (split_name == "valid") indices = splits.valid;
    else if (split_name == "test") indices = splits.test;
    else {
        indices.resize(ds.records.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    }
    print_report(evaluate(model, ds, indices));
    return 0;
}

int cmd_predict(RunConfig& rc, const std::string& smiles) {
    MmfModel model = load_model(rc.archive);
    DataRecord rec;
    rec.smiles = smiles;
    rec.targets.assign(model.cfg.targets, 0.0);
    parse_smiles(smiles);  // surface parse errors before any provider work

    if (!model.cfg.seg_off) {
        std::string combined;
        for (const std::string& prompt : build_cot_prompts(smiles)) {
            PromptBundle bundle = make_cot_bundle(smiles, prompt);
            combined += complete(bundle, rc.provider, rc.cache_dir).text;
            combined += "\n\n";
        }
        rec.description = combined;
    }
    if (!model.cfg.peg_off && !rc.dataset.empty()) {
        LabeledDataset ds = load_csv(rc.dataset);
        SplitAssignment splits = make_splits(ds, rc.train);
        DemoPool pool;
        for (std::size_t i : splits.train) {
            MoleculeGraph g = parse_smiles(ds.records[i].smiles);
            pool.smiles.push_back(ds.records[i].smiles);
            pool.fingerprints.push_back(morgan_fingerprint(g));
            pool.targets.push_back(ds.records[i].targets);
        }
        BitFingerprint fp = morgan_fingerprint(parse_smiles(smiles));
        std::vector<Demo> demos = sample_demos(smiles, fp, pool, rc.train.icl_k,
                                               rc.train.icl_strategy, rc.train.seed);
        PromptBundle bundle = build_icl_prompt(smiles, demos, kIclInstruction,
                                               rc.provider.prompt_char_budget);
        CompletionResult res = complete(bundle, rc.provider, rc.cache_dir);
        rec.icl_pred = parse_predictions(res.text, model.cfg.targets);
    }

    std::vector<double> y = predict_record(model, rec);
    std::cout << smiles << " ->";
    for (double v : y) std::printf(" %.8g", v);
    std::cout << "\n";
    return 0;
}

int cmd_fp(const std::string& smiles, int radius, std::size_t nbits) {
    MoleculeGraph g = parse_smiles(smiles);
    BitFingerprint fp = morgan_fingerprint(g, radius, nbits);
    std::cout << "bits:";
    for (std::size_t b : fp.set_bits()) std::cout << " " << b;
    std::cout << "\npopcount: " << fp.popcount() << "\n";
    return 0;
}

int cmd_demos(RunConfig& rc, const std::string& smiles) {
    LabeledDataset ds = load_csv(rc.dataset);
    DemoPool pool;
    for (const DataRecord& r : ds.records) {
        MoleculeGraph g = parse_smiles(r.smiles);
        pool.smiles.push_back(r.smiles);
        pool.fingerprints.push_back(morgan_fingerprint(g));
        pool.targets.push_back(r.targets);
    }
    BitFingerprint fp = morgan_fingerprint(parse_smiles(smiles));
    std::vector<Demo> demos = sample_demos(smiles, fp, pool, rc.train.icl_k,
                                           rc.train.icl_strategy, rc.train.seed);
    for (const Demo& d : demos) {
        std::printf("%-40s sim=%.6f ->", d.smiles.c_str(), d.similarity);
        for (double v : d.target) std::cout << " " << format_value(v);
        std::cout << "\n";
    }
    return 0;
}

int cmd_gradcheck() {
    ModelConfig mc;
    mc.d = 8;
    mc.cheb_k = 3;
    mc.heads = 2;
    mc.head_dim = 4;
    mc.set2set_steps = 3;  // the controller state first feeds back at step 3
    mc.max_text_tokens = 16;
    mc.targets = 2;
    Vocabulary vocab = Vocabulary::build({"ring count one", "carbon atoms three"}, 16);
    MmfModel model(mc, vocab, 17);

    DataRecord rec;
    rec.smiles = "CC(=O)NC1=CC=CC=C1";
    rec.description = "carbon atoms three ring count one";
    rec.icl_pred = {0.4, -0.2};
    MoleculeInput input = model.prepare(rec);
    Matrix target(1, 2);
    target(0, 0) = 0.3;
    target(0, 1) = -0.7;

    auto loss_value = [&]() {
        Tape tape;
        return tape.value(tape.sq_err(model.forward(tape, input), target))(0, 0);
    };

    bool ok = true;
    for (ParamTensor* p : model.trainable_params()) {
        for (ParamTensor* q : model.trainable_params()) q->zero_grad();
        Tape tape;
        Tape::Var loss = tape.sq_err(model.forward(tape, input), target);
        tape.backward(loss);
        Matrix analytic = p->grad;
        Matrix numeric = finite_diff_grad(loss_value, *p);
        double err = max_rel_error(analytic, numeric);
        std::printf("%-24s max_rel_error=%.3g %s\n", p->name.c_str(), err,
                    err < 1e-4 ? "ok" : "FAIL");
        if (!(err < 1e-4)) ok = false;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-modal molecular property prediction"};
    app.require_subcommand(1);

    RunConfig rc;
    // the config file must be applied before flag values land on top of it
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                load_config_file(rc, argv[i + 1]);
            } catch (const ConfigError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }
    }
    std::string config_path;
    app.add_option("--config", config_path, "key=value config file");

    std::string smiles, split_name = "test", strategy, provider_name;
    std::vector<std::string> ablate;
    int fp_radius = 2;
    std::size_t fp_nbits = 2048;

    auto add_common = [&](CLI::App* cmd, bool with_train_flags) {
        cmd->add_option("--dataset", rc.dataset, "dataset CSV path");
        cmd->add_option("--cache-dir", rc.cache_dir, "LLM response cache directory");
        cmd->add_option("--archive", rc.archive, "model archive path");
        cmd->add_option("--provider", provider_name, "mock|http");
        cmd->add_option("--seed", rc.train.seed, "RNG seed");
        cmd->add_option("--icl-k", rc.train.icl_k, "few-shot demo count");
        cmd->add_option("--icl-strategy", strategy, "random|scaffold");
        if (with_train_flags) {
            cmd->add_option("--epochs", rc.train.epochs, "training epochs");
            cmd->add_option("--batch-size", rc.train.batch_size, "batch size");
            cmd->add_option("--d", rc.train.d, "embedding width");
            cmd->add_option("--lr", rc.train.lr, "learning rate");
            cmd->add_option("--ablate", ablate, "seg|peg|moe (repeatable)")
                ->allow_extra_args(false);
        }
    };

    CLI::App* describe = app.add_subcommand("describe", "populate the description cache");
    add_common(describe, false);
    CLI::App* train_cmd = app.add_subcommand("train", "train and write a model archive");
    add_common(train_cmd, true);
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate an archive on a split");
    add_common(eval_cmd, false);
    eval_cmd->add_option("--split", split_name, "train|valid|test|all");
    CLI::App* predict_cmd = app.add_subcommand("predict", "predict properties for one SMILES");
    add_common(predict_cmd, false);
    predict_cmd->add_option("--smiles", smiles, "query SMILES")->required();
    CLI::App* fp_cmd = app.add_subcommand("fp", "print a molecular fingerprint");
    fp_cmd->add_option("--smiles", smiles, "query SMILES")->required();
    fp_cmd->add_option("--radius", fp_radius, "fingerprint radius");
    fp_cmd->add_option("--nbits", fp_nbits, "fingerprint width");
    CLI::App* demos_cmd = app.add_subcommand("demos", "print sampled demonstrations");
    add_common(demos_cmd, false);
    demos_cmd->add_option("--smiles", smiles, "query SMILES")->required();
    app.add_subcommand("gradcheck", "finite-difference gradient audit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (!strategy.empty()) {
            if (strategy == "random") rc.train.icl_strategy = SampleStrategy::Random;
            else if (strategy == "scaffold") rc.train.icl_strategy = SampleStrategy::Scaffold;
            else throw ConfigError("config: bad value for key icl_strategy");
        }
        if (!provider_name.empty()) {
            if (provider_name == "mock") rc.provider.provider = Provider::Mock;
            else if (provider_name == "http") rc.provider.provider = Provider::Http;
            else throw ConfigError("config: bad value for key provider");
        }
        for (const std::string& a : ablate) {
            if (a == "seg") rc.train.seg_off = true;
            else if (a == "peg") rc.train.peg_off = true;
            else if (a == "moe") rc.train.moe_off = true;
            else throw ConfigError("config: unknown ablation " + a);
        }

        if (describe->parsed()) return cmd_describe(rc);
        if (train_cmd->parsed()) return cmd_train(rc);
        if (eval_cmd->parsed()) return cmd_eval(rc, split_name);
        if (predict_cmd->parsed()) return cmd_predict(rc, smiles);
        if (fp_cmd->parsed()) return cmd_fp(smiles, fp_radius, fp_nbits);
        if (demos_cmd->parsed()) return cmd_demos(rc, smiles);
        return cmd_gradcheck();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const LlmError& e) {
        std::cerr << "error: provider: " << e.what() << "\n";
        return 3;
    } catch (const SmilesError& e) {
        std::cerr << "error: smiles: " << e.what() << " (position " << e.position()
                  << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
