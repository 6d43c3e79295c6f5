#include "mmf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mmf/chem.hpp"
#include "mmf/molgraph.hpp"

namespace mmf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset file " + path.string());

    std::string header;
    if (!std::getline(in, header)) throw DatasetError("missing header row");
    std::vector<std::string> cols = split_csv_line(strip(header));
    if (cols.size() < 2 || strip(cols[0]) != "smiles")
        throw DatasetError("missing header: expected \"smiles,<t1>,...\"");

    LabeledDataset ds;
    ds.target_count = cols.size() - 1;
    for (std::size_t i = 1; i < cols.size(); ++i) ds.target_names.push_back(strip(cols[i]));

    bool all_binary = true;
    std::string line;
    while (std::getline(in, line)) {
        line = strip(line);
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != cols.size()) {
            ds.dropped_rows += 1;
            continue;
        }
        DataRecord rec;
        rec.smiles = strip(cells[0]);
        try {
            parse_smiles(rec.smiles);
        } catch (const SmilesError&) {
            ds.dropped_rows += 1;
            continue;
        }
        bool ok = true;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            char* end = nullptr;
            std::string cell = strip(cells[i]);
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || !std::isfinite(v)) {
                ok = false;
                break;
            }
            rec.targets.push_back(v);
            if (v != 0.0 && v != 1.0) all_binary = false;
        }
        if (!ok) {
            ds.dropped_rows += 1;
            continue;
        }
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty()) throw DatasetError("no valid rows in " + path.string());
    ds.task = all_binary ? TaskKind::BinaryClassification : TaskKind::Regression;
    return ds;
}

SplitAssignment scaffold_split(const LabeledDataset& ds, double train_frac,
                               double valid_frac, double test_frac,
                               std::uint64_t seed) {
    if (std::fabs(train_frac + valid_frac + test_frac - 1.0) > 1e-9)
        throw DatasetError("scaffold_split: fractions must sum to 1");

    std::map<ScaffoldKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        MoleculeGraph g = parse_smiles(ds.records[i].smiles);
        groups[murcko_scaffold(g)].push_back(i);
    }
    if (groups.size() < 3)
        throw DatasetError("scaffold_split: fewer than 3 scaffold groups");

    std::vector<std::pair<ScaffoldKey, std::vector<std::size_t>>> ordered(groups.begin(),
                                                                          groups.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second.size() != b.second.size()) return a.second.size() > b.second.size();
        return a.first < b.first;
    });

    SplitAssignment sp;
    sp.train_frac = train_frac;
    sp.valid_frac = valid_frac;
    sp.test_frac = test_frac;
    sp.seed = seed;
    double n = static_cast<double>(ds.records.size());
    double target[3] = {train_frac * n, valid_frac * n, test_frac * n};
    double assigned[3] = {0.0, 0.0, 0.0};
    std::vector<std::size_t>* sinks[3] = {&sp.train, &sp.valid, &sp.test};
    for (auto& [key, members] : ordered) {
        int best = 0;
        double best_deficit = target[0] - assigned[0];
        for (int s = 1; s < 3; ++s) {
            double deficit = target[s] - assigned[s];
            if (deficit > best_deficit) {
                best = s;
                best_deficit = deficit;
            }
        }
        for (std::size_t idx : members) sinks[best]->push_back(idx);
        assigned[best] += static_cast<double>(members.size());
    }
    return sp;
}

Standardizer Standardizer::identity(std::size_t targets) {
    Standardizer s;
    s.mean.assign(targets, 0.0);
    s.stddev.assign(targets, 1.0);
    return s;
}

Standardizer Standardizer::fit(const LabeledDataset& ds,
                               const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw DatasetError("Standardizer: empty split");
    std::size_t c = ds.target_count;
    Standardizer s;
    s.mean.assign(c, 0.0);
    s.stddev.assign(c, 0.0);
    for (std::size_t i : indices)
        for (std::size_t j = 0; j < c; ++j) s.mean[j] += ds.records[i].targets[j];
    double n = static_cast<double>(indices.size());
    for (std::size_t j = 0; j < c; ++j) s.mean[j] /= n;
    for (std::size_t i : indices)
        for (std::size_t j = 0; j < c; ++j) {
            double d = ds.records[i].targets[j] - s.mean[j];
            s.stddev[j] += d * d;
        }
    for (std::size_t j = 0; j < c; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / n);  // population std
        if (s.stddev[j] <= 0.0)
            throw DatasetError("Standardizer: degenerate target column " +
                               std::to_string(j));
    }
    return s;
}

std::vector<double> Standardizer::standardize(const std::vector<double>& y) const {
    std::vector<double> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) out[j] = (y[j] - mean[j]) / stddev[j];
    return out;
}

std::vector<double> Standardizer::destandardize(const std::vector<double>& y) const {
    std::vector<double> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) out[j] = y[j] * stddev[j] + mean[j];
    return out;
}

double mean_absolute_error(const std::vector<double>& pred,
                           const std::vector<double>& truth) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double root_mean_squared_error(const std::vector<double>& pred,
                               const std::vector<double>& truth) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            pairs += 1;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0) return 0.5;
    return wins / static_cast<double>(pairs);
}

}  // namespace mmf
