#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmf/matrix.hpp"

namespace mmf {

enum class Element { B, C, N, O, F, P, S, Cl, Br, I, Other };
constexpr std::size_t kElementCount = 11;

enum class BondOrder { Single, Double, Triple, Aromatic };

// Node feature layout: element one-hot(11) + degree one-hot(0..5) +
// aromatic flag + charge one-hot(-2..2) + H-count one-hot(0..4).
constexpr std::size_t kNodeFeatureDim = 28;
// Edge feature layout: order one-hot(single,double,triple,aromatic) + in-ring flag.
constexpr std::size_t kEdgeFeatureDim = 5;

struct AtomRecord {
    Element element = Element::Other;
    bool aromatic = false;
    int formal_charge = 0;  // clamped to [-2, 2] at featurization
    int h_count = 0;        // hydrogens are implicit: counts, not nodes
    int degree = 0;         // number of incident heavy-atom bonds
};

struct BondRecord {
    int a = 0;
    int b = 0;
    BondOrder order = BondOrder::Single;
    bool in_ring = false;
};

struct MoleculeGraph {
    std::vector<AtomRecord> atoms;
    std::vector<BondRecord> bonds;
    Matrix adjacency;      // |V|x|V| binary, symmetric, zero diagonal
    Matrix node_features;  // |V| x kNodeFeatureDim, filled by featurize()
    Matrix edge_features;  // |E| x kEdgeFeatureDim, filled by featurize()

    std::size_t num_atoms() const { return atoms.size(); }
    std::size_t num_bonds() const { return bonds.size(); }
};

class SmilesError : public std::runtime_error {
public:
    enum class Kind {
        EmptyInput,
        UnbalancedBracket,
        UnclosedBranch,
        UnclosedRing,
        UnknownAtomSymbol,
    };

    SmilesError(Kind kind, std::size_t position, const std::string& what)
        : std::runtime_error(what), kind_(kind), position_(position) {}

    Kind kind() const { return kind_; }
    std::size_t position() const { return position_; }

private:
    Kind kind_;
    std::size_t position_;
};

// Parses the organic-subset SMILES grammar: bare and bracketed atoms,
// branches, ring closures (1-9 and %nn), bond symbols - = # :. Stereo
// markers and isotopes are accepted and discarded. Hydrogens stay implicit.
MoleculeGraph parse_smiles(std::string_view text);

// Populates node_features and edge_features with the fixed one-hot schema.
void featurize(MoleculeGraph& graph);

struct SpectralOperator {
    Matrix matrix;  // |V|x|V|, symmetric, eigenvalues in [0, 1]
};

// D^{-1/2} (A + I) D^{-1/2} with self-loop augmented degrees.
SpectralOperator spectral_operator(const MoleculeGraph& graph);

// Per-node sum of incident edge feature rows (|V| x kEdgeFeatureDim).
// Requires featurize() to have run.
Matrix edge_to_node(const MoleculeGraph& graph);

const char* element_symbol(Element e);

}  // namespace mmf
