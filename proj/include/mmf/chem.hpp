#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmf/molgraph.hpp"

namespace mmf {

class ChemError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BitFingerprint {
    std::vector<std::uint64_t> bits;  // packed, little-endian bit order
    std::size_t nbits = 0;
    int radius = 0;

    bool test(std::size_t i) const { return (bits[i / 64] >> (i % 64)) & 1u; }
    void set(std::size_t i) { bits[i / 64] |= std::uint64_t(1) << (i % 64); }
    std::size_t popcount() const;
    std::vector<std::size_t> set_bits() const;
};

// Iterated-neighborhood (Morgan) fingerprint. Initial atom invariant is
// (element, degree, charge, H-count, aromatic); each round folds in the
// sorted (bond order, neighbor invariant) pairs through a fixed 64-bit hash,
// so fingerprints are identical across runs and platforms.
BitFingerprint morgan_fingerprint(const MoleculeGraph& graph, int radius = 2,
                                  std::size_t nbits = 2048);

// |a AND b| / |a OR b|; two all-zero fingerprints compare as 1.0.
double tanimoto(const BitFingerprint& a, const BitFingerprint& b);

struct ScaffoldKey {
    std::string key;  // empty for acyclic molecules
    bool operator==(const ScaffoldKey&) const = default;
    auto operator<=>(const ScaffoldKey&) const = default;
};

// Bemis-Murcko-style skeleton: prune degree-1 atoms until none remain, then
// canonically encode the surviving atoms, bonds and ring sizes.
ScaffoldKey murcko_scaffold(const MoleculeGraph& graph);

// Demonstration pool for ICL sampling: parallel arrays over the train split.
struct DemoPool {
    std::vector<std::string> smiles;
    std::vector<BitFingerprint> fingerprints;
    std::vector<std::vector<double>> targets;
};

struct Demo {
    std::string smiles;
    std::vector<double> target;
    double similarity = 0.0;  // tanimoto to the query (scaffold strategy)
    std::size_t pool_index = 0;
};

enum class SampleStrategy { Random, Scaffold };

// Random: seeded uniform sample without replacement. Scaffold: top-k by
// tanimoto similarity, ties broken by ascending pool index, output ordered
// by descending similarity. Entries whose SMILES equals the query's SMILES
// string are excluded.
std::vector<Demo> sample_demos(const std::string& query_smiles,
                               const BitFingerprint& query_fp, const DemoPool& pool,
                               std::size_t k, SampleStrategy strategy,
                               std::uint64_t seed);

// Class-balanced variant for binary classification: round(3k/5) entries from
// the majority class and the rest from the minority class, each class filled
// by descending similarity.
std::vector<Demo> balanced_sample_demos(const std::string& query_smiles,
                                        const BitFingerprint& query_fp,
                                        const DemoPool& pool, std::size_t k,
                                        std::uint64_t seed);

}  // namespace mmf
