#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmf {

class DatasetError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TaskKind { Regression, BinaryClassification };

struct DataRecord {
    std::string smiles;
    std::vector<double> targets;
    std::string description;       // concatenated CoT responses, cached
    std::vector<double> icl_pred;  // parsed few-shot prediction, cached
};

struct LabeledDataset {
    std::vector<DataRecord> records;
    TaskKind task = TaskKind::Regression;
    std::size_t target_count = 0;
    std::vector<std::string> target_names;
    std::size_t dropped_rows = 0;  // rows whose SMILES failed to parse
};

// CSV with header "smiles,<t1>,...,<tc>". Unparseable SMILES rows are
// dropped and counted; the task is classification iff every target is 0/1.
LabeledDataset load_csv(const std::filesystem::path& path);

struct SplitAssignment {
    std::vector<std::size_t> train, valid, test;
    double train_frac = 0.8, valid_frac = 0.1, test_frac = 0.1;
    std::uint64_t seed = 0;
};

// Groups records by scaffold, sorts groups largest-first, and greedily
// assigns each whole group to the split furthest below its target size.
// No scaffold ever straddles two splits.
SplitAssignment scaffold_split(const LabeledDataset& ds, double train_frac = 0.8,
                               double valid_frac = 0.1, double test_frac = 0.1,
                               std::uint64_t seed = 0);

// Per-target population mean/stddev, fitted on the train split only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer identity(std::size_t targets);
    static Standardizer fit(const LabeledDataset& ds,
                            const std::vector<std::size_t>& indices);

    std::vector<double> standardize(const std::vector<double>& y) const;
    std::vector<double> destandardize(const std::vector<double>& y) const;
};

// --- metrics ---

struct EvalReport {
    TaskKind task = TaskKind::Regression;
    std::vector<std::string> target_names;
    std::vector<double> mae;      // regression, original units
    std::vector<double> rmse;
    std::vector<double> auc;      // classification
    double mean_mae = 0.0, mean_rmse = 0.0, mean_auc = 0.0;
};

double mean_absolute_error(const std::vector<double>& pred, const std::vector<double>& truth);
double root_mean_squared_error(const std::vector<double>& pred, const std::vector<double>& truth);

// Pairwise-comparison ROC-AUC with half credit for score ties; 0.5 when one
// class is absent.
double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels);

}  // namespace mmf
