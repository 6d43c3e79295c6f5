#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmf/chem.hpp"
#include "mmf/dataset.hpp"
#include "mmf/llm.hpp"
#include "mmf/model.hpp"

namespace mmf {

class TrainError : public std::runtime_error {
public:
    enum class Kind { EmptySplit, NonFiniteLoss };

    TrainError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t epochs = 50;
    std::size_t d = 128;
    double lr = 1e-3;
    std::size_t plateau_patience = 7;
    double lr_factor = 0.5;
    std::size_t early_stop_patience = 15;
    std::size_t cheb_k = 3;
    std::size_t heads = 4;
    std::size_t head_dim = 32;
    std::size_t set2set_steps = 3;
    std::size_t max_text_tokens = 512;
    std::size_t icl_k = 16;
    SampleStrategy icl_strategy = SampleStrategy::Scaffold;
    double train_frac = 0.8;
    double valid_frac = 0.1;
    double test_frac = 0.1;
    bool seg_off = false;
    bool peg_off = false;
    bool moe_off = false;
    std::uint64_t seed = 0;
};

// Validation-loss plateau scheduler: the rate is halved once the loss has
// gone plateau_patience consecutive epochs without a strict improvement.
class PlateauSchedule {
public:
    PlateauSchedule(double lr, std::size_t patience, double factor)
        : lr_(lr), patience_(patience), factor_(factor) {}

    double observe(double valid_loss);
    double lr() const { return lr_; }
    bool improved_last() const { return improved_last_; }

private:
    double lr_;
    std::size_t patience_;
    double factor_;
    double best_ = 0.0;
    bool has_best_ = false;
    std::size_t stale_ = 0;
    bool improved_last_ = false;
};

struct DescribeStats {
    std::size_t molecules = 0;
    std::size_t cache_hits = 0;
    std::size_t provider_calls = 0;
};

// Runs the 14 chain-of-thought prompts per molecule (cache-aware) and stores
// the concatenated responses on each record.
DescribeStats populate_descriptions(LabeledDataset& ds, const ProviderConfig& provider,
                                    const std::filesystem::path& cache_dir);

struct IclStats {
    std::size_t molecules = 0;
    std::size_t cache_hits = 0;
    std::size_t provider_calls = 0;
    std::size_t demo_count = 0;      // k actually used per prompt (pre-drop)
    std::size_t dropped_demos = 0;   // total removed by the length guard
};

// Builds the demonstration pool from the train split, issues one few-shot
// prompt per molecule and caches the parsed numeric prediction.
IclStats populate_icl_predictions(LabeledDataset& ds, const SplitAssignment& splits,
                                  const TrainConfig& cfg, const ProviderConfig& provider,
                                  const std::filesystem::path& cache_dir);

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double valid_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
    double best_valid_loss = 0.0;
};

// Joint MSE training with Adam, plateau lr halving, early stopping, and a
// best-validation-epoch parameter snapshot restored before returning.
TrainResult train(MmfModel& model, const LabeledDataset& ds, const SplitAssignment& splits,
                  const TrainConfig& cfg);

EvalReport evaluate(MmfModel& model, const LabeledDataset& ds,
                    const std::vector<std::size_t>& split);

// Destandardized 1 x c prediction for one prepared record.
std::vector<double> predict_record(MmfModel& model, const DataRecord& record);

MmfModel build_model(const TrainConfig& cfg, const LabeledDataset& ds);

}  // namespace mmf
