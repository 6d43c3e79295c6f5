#include "mmf/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mmf/optim.hpp"

namespace mmf {

double PlateauSchedule::observe(double valid_loss) {
    if (!has_best_ || valid_loss < best_) {
        best_ = valid_loss;
        has_best_ = true;
        stale_ = 0;
        improved_last_ = true;
    } else {
        stale_ += 1;
        improved_last_ = false;
        if (stale_ >= patience_) {
            lr_ *= factor_;
            stale_ = 0;  // a persisting plateau earns another cut later
        }
    }
    return lr_;
}

DescribeStats populate_descriptions(LabeledDataset& ds, const ProviderConfig& provider,
                                    const std::filesystem::path& cache_dir) {
    DescribeStats stats;
    for (auto& rec : ds.records) {
        std::string combined;
        for (const std::string& prompt : build_cot_prompts(rec.smiles)) {
            PromptBundle bundle = make_cot_bundle(rec.smiles, prompt);
            CompletionResult res = complete(bundle, provider, cache_dir);
            if (res.cache_hit) stats.cache_hits += 1;
            else stats.provider_calls += 1;
            if (!combined.empty()) combined += "\n\n";
            combined += res.text;
        }
        rec.description = combined;
        stats.molecules += 1;
    }
    return stats;
}

IclStats populate_icl_predictions(LabeledDataset& ds, const SplitAssignment& splits,
                                  const TrainConfig& cfg, const ProviderConfig& provider,
                                  const std::filesystem::path& cache_dir) {
    if (splits.train.empty())
        throw TrainError(TrainError::Kind::EmptySplit, "icl pre-pass: empty train split");

    DemoPool pool;
    for (std::size_t i : splits.train) {
        const DataRecord& rec = ds.records[i];
        MoleculeGraph g = parse_smiles(rec.smiles);
        pool.smiles.push_back(rec.smiles);
        pool.fingerprints.push_back(morgan_fingerprint(g));
        pool.targets.push_back(rec.targets);
    }

    IclStats stats;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        DataRecord& rec = ds.records[i];
        MoleculeGraph g = parse_smiles(rec.smiles);
        BitFingerprint fp = morgan_fingerprint(g);
        std::vector<Demo> demos;
        if (ds.task == TaskKind::BinaryClassification && ds.target_count == 1) {
            try {
                demos = balanced_sample_demos(rec.smiles, fp, pool, cfg.icl_k,
                                              cfg.seed + i);
            } catch (const ChemError&) {
                demos = sample_demos(rec.smiles, fp, pool, cfg.icl_k, cfg.icl_strategy,
                                     cfg.seed + i);
            }
        } else {
            demos = sample_demos(rec.smiles, fp, pool, cfg.icl_k, cfg.icl_strategy,
                                 cfg.seed + i);
        }
        PromptBundle bundle = build_icl_prompt(rec.smiles, demos, kIclInstruction,
                                               provider.prompt_char_budget);
        CompletionResult res = complete(bundle, provider, cache_dir);
        if (res.cache_hit) stats.cache_hits += 1;
        else stats.provider_calls += 1;
        rec.icl_pred = parse_predictions(res.text, ds.target_count);
        stats.molecules += 1;
        stats.demo_count = std::max(stats.demo_count, bundle.demo_count);
        stats.dropped_demos += bundle.dropped_demos;
    }
    return stats;
}

MmfModel build_model(const TrainConfig& cfg, const LabeledDataset& ds) {
    std::vector<std::string> corpus;
    for (const auto& rec : ds.records) corpus.push_back(rec.description);
    Vocabulary vocab = Vocabulary::build(corpus, cfg.max_text_tokens);

    ModelConfig mc;
    mc.d = cfg.d;
    mc.cheb_k = cfg.cheb_k;
    mc.heads = cfg.heads;
    mc.head_dim = cfg.head_dim;
    mc.set2set_steps = cfg.set2set_steps;
    mc.max_text_tokens = cfg.max_text_tokens;
    mc.targets = ds.target_count;
    mc.task = ds.task;
    mc.seg_off = cfg.seg_off;
    mc.peg_off = cfg.peg_off;
    mc.moe_off = cfg.moe_off;
    return MmfModel(mc, std::move(vocab), cfg.seed);
}

namespace {

Matrix target_row(const MmfModel& model, const DataRecord& rec) {
    std::vector<double> y = model.standardizer.standardize(rec.targets);
    Matrix t(1, y.size());
    for (std::size_t j = 0; j < y.size(); ++j) t(0, j) = y[j];
    return t;
}

double split_loss(MmfModel& model, const LabeledDataset& ds,
                  const std::vector<std::size_t>& split,
                  const std::vector<MoleculeInput>& inputs) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i : split) {
        Tape tape;
        Tape::Var pred = model.forward(tape, inputs[i]);
        Tape::Var loss = tape.sq_err(pred, target_row(model, ds.records[i]));
        total += tape.value(loss)(0, 0);
        count += ds.target_count;
    }
    return total / static_cast<double>(count);
}

}  // namespace

TrainResult train(MmfModel& model, const LabeledDataset& ds, const SplitAssignment& splits,
                  const TrainConfig& cfg) {
    if (splits.train.empty())
        throw TrainError(TrainError::Kind::EmptySplit, "train: empty train split");
    if (splits.valid.empty())
        throw TrainError(TrainError::Kind::EmptySplit, "train: empty validation split");

    model.standardizer = Standardizer::fit(ds, splits.train);

    std::vector<MoleculeInput> inputs(ds.records.size());
    for (std::size_t i : splits.train) inputs[i] = model.prepare(ds.records[i]);
    for (std::size_t i : splits.valid) inputs[i] = model.prepare(ds.records[i]);

    std::vector<ParamTensor*> params = model.trainable_params();
    AdamState adam;
    adam.lr = cfg.lr;
    PlateauSchedule schedule(cfg.lr, cfg.plateau_patience, cfg.lr_factor);
    std::mt19937_64 rng(cfg.seed);

    TrainResult result;
    std::vector<Matrix> best_values;
    double best_valid = 0.0;
    bool has_best = false;
    std::size_t stale = 0;

    std::vector<std::size_t> order = splits.train;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        std::size_t epoch_terms = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            Tape tape;
            Tape::Var acc;
            for (std::size_t pos = start; pos < stop; ++pos) {
                std::size_t i = order[pos];
                Tape::Var pred = model.forward(tape, inputs[i]);
                Tape::Var err = tape.sq_err(pred, target_row(model, ds.records[i]));
                acc = acc.valid() ? tape.add(acc, err) : err;
            }
            std::size_t terms = (stop - start) * ds.target_count;
            Tape::Var loss = tape.affine(acc, 1.0 / static_cast<double>(terms), 0.0);
            double value = tape.value(loss)(0, 0);
            if (!std::isfinite(value))
                throw TrainError(TrainError::Kind::NonFiniteLoss,
                                 "train: non-finite loss in batch " +
                                     std::to_string(start / cfg.batch_size) +
                                     " of epoch " + std::to_string(epoch));
            tape.backward(loss);
            adam.lr = schedule.lr();
            adam_step(params, adam);
            epoch_loss += value * static_cast<double>(terms);
            epoch_terms += terms;
        }

        double valid_loss = split_loss(model, ds, splits.valid, inputs);
        double lr_after = schedule.observe(valid_loss);

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = epoch_loss / static_cast<double>(epoch_terms);
        log.valid_loss = valid_loss;
        log.lr = lr_after;
        result.log.push_back(log);

        if (!has_best || valid_loss < best_valid) {
            best_valid = valid_loss;
            has_best = true;
            result.best_epoch = epoch;
            stale = 0;
            best_values.clear();
            for (ParamTensor* p : params) best_values.push_back(p->value);
        } else {
            stale += 1;
            if (stale >= cfg.early_stop_patience) break;
        }
    }

    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best_values[k];
    result.best_valid_loss = best_valid;
    return result;
}

EvalReport evaluate(MmfModel& model, const LabeledDataset& ds,
                    const std::vector<std::size_t>& split) {
    if (split.empty())
        throw TrainError(TrainError::Kind::EmptySplit, "evaluate: empty split");

    std::size_t c = ds.target_count;
    std::vector<std::vector<double>> preds(c), truths(c);
    for (std::size_t i : split) {
        std::vector<double> p = predict_record(model, ds.records[i]);
        for (std::size_t j = 0; j < c; ++j) {
            preds[j].push_back(p[j]);
            truths[j].push_back(ds.records[i].targets[j]);
        }
    }

    EvalReport report;
    report.task = ds.task;
    report.target_names = ds.target_names;
    if (ds.task == TaskKind::Regression) {
        for (std::size_t j = 0; j < c; ++j) {
            report.mae.push_back(mean_absolute_error(preds[j], truths[j]));
            report.rmse.push_back(root_mean_squared_error(preds[j], truths[j]));
            report.mean_mae += report.mae.back();
            report.mean_rmse += report.rmse.back();
        }
        report.mean_mae /= static_cast<double>(c);
        report.mean_rmse /= static_cast<double>(c);
    } else {
        for (std::size_t j = 0; j < c; ++j) {
            report.auc.push_back(roc_auc(preds[j], truths[j]));
            report.mean_auc += report.auc.back();
        }
        report.mean_auc /= static_cast<double>(c);
    }
    return report;
}

std::vector<double> predict_record(MmfModel& model, const DataRecord& record) {
    MoleculeInput input = model.prepare(record);
    Tape tape;
    Tape::Var pred = model.forward(tape, input);
    const Matrix& m = tape.value(pred);
    std::vector<double> y(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] = m(0, j);
    return model.standardizer.destandardize(y);
}

}  // namespace mmf
