#include "mmf/molgraph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>

namespace mmf {

namespace {

struct ElementInfo {
    const char* symbol;
    int valence;  // default valence for implicit-H accounting; 0 = no implicit H
};

constexpr std::array<ElementInfo, kElementCount> kElements = {{
    {"B", 3}, {"C", 4}, {"N", 3}, {"O", 2}, {"F", 1},
    {"P", 3}, {"S", 2}, {"Cl", 1}, {"Br", 1}, {"I", 1}, {"*", 0},
}};

std::optional<Element> lookup_element(const std::string& sym) {
    for (std::size_t i = 0; i < kElements.size(); ++i) {
        if (sym == kElements[i].symbol) return static_cast<Element>(i);
    }
    return std::nullopt;
}

double order_value(BondOrder o) {
    switch (o) {
        case BondOrder::Single: return 1.0;
        case BondOrder::Double: return 2.0;
        case BondOrder::Triple: return 3.0;
        case BondOrder::Aromatic: return 1.5;
    }
    return 1.0;
}

struct RingOpening {
    int atom;
    std::optional<BondOrder> order;
    std::size_t position;
};

// Marks bonds that lie on a cycle (non-bridge edges) via DFS low-link.
void mark_ring_bonds(MoleculeGraph& g) {
    std::size_t n = g.num_atoms();
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, bond idx)
    for (std::size_t e = 0; e < g.bonds.size(); ++e) {
        adj[g.bonds[e].a].push_back({g.bonds[e].b, static_cast<int>(e)});
        adj[g.bonds[e].b].push_back({g.bonds[e].a, static_cast<int>(e)});
    }
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    // iterative DFS to avoid recursion limits on long chains
    struct Frame { int v, parent_edge; std::size_t next; };
    for (std::size_t root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        std::vector<Frame> stack{{static_cast<int>(root), -1, 0}};
        disc[root] = low[root] = timer++;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < adj[f.v].size()) {
                auto [u, eidx] = adj[f.v][f.next++];
                if (eidx == f.parent_edge) continue;
                if (disc[u] == -1) {
                    disc[u] = low[u] = timer++;
                    stack.push_back({u, eidx, 0});
                } else {
                    low[f.v] = std::min(low[f.v], disc[u]);
                    g.bonds[eidx].in_ring = true;  // back edge
                }
            } else {
                int v = f.v;
                int pe = f.parent_edge;
                stack.pop_back();
                if (!stack.empty()) {
                    int p = stack.back().v;
                    low[p] = std::min(low[p], low[v]);
                    if (low[v] <= disc[p]) g.bonds[pe].in_ring = true;
                }
            }
        }
    }
}

}  // namespace

const char* element_symbol(Element e) { return kElements[static_cast<std::size_t>(e)].symbol; }

MoleculeGraph parse_smiles(std::string_view text) {
    // Round-trip stability: surrounding/internal whitespace never changes the graph.
    std::string s;
    s.reserve(text.size());
    std::vector<std::size_t> pos_map;  // index into original text per kept char
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isspace(static_cast<unsigned char>(text[i]))) {
            s.push_back(text[i]);
            pos_map.push_back(i);
        }
    }
    if (s.empty())
        throw SmilesError(SmilesError::Kind::EmptyInput, 0, "empty SMILES input");

    MoleculeGraph g;
    std::vector<int> branch_stack;
    std::vector<std::size_t> branch_pos;
    std::map<int, RingOpening> open_rings;
    int prev_atom = -1;
    std::optional<BondOrder> pending_bond;

    auto fail = [&](SmilesError::Kind k, std::size_t i, const std::string& msg) {
        std::size_t orig = i < pos_map.size() ? pos_map[i] : text.size();
        throw SmilesError(k, orig, msg + " at position " + std::to_string(orig));
    };

    auto add_bond = [&](int a, int b, std::optional<BondOrder> order) {
        BondOrder o;
        if (order) {
            o = *order;
        } else if (g.atoms[a].aromatic && g.atoms[b].aromatic) {
            o = BondOrder::Aromatic;
        } else {
            o = BondOrder::Single;
        }
        g.bonds.push_back({a, b, o, false});
        g.atoms[a].degree += 1;
        g.atoms[b].degree += 1;
    };

    auto add_atom = [&](Element el, bool aromatic, int charge, int explicit_h,
                        bool from_bracket) {
        AtomRecord atom;
        atom.element = el;
        atom.aromatic = aromatic;
        atom.formal_charge = std::clamp(charge, -2, 2);
        atom.h_count = from_bracket ? std::max(explicit_h, 0) : -1;  // -1: fill later
        int idx = static_cast<int>(g.atoms.size());
        g.atoms.push_back(atom);
        if (prev_atom >= 0) add_bond(prev_atom, idx, pending_bond);
        pending_bond.reset();
        prev_atom = idx;
    };

    auto open_or_close_ring = [&](int num, std::size_t at) {
        auto it = open_rings.find(num);
        if (it == open_rings.end()) {
            open_rings[num] = {prev_atom, pending_bond, at};
        } else {
            RingOpening opening = it->second;
            open_rings.erase(it);
            std::optional<BondOrder> order = pending_bond ? pending_bond : opening.order;
            add_bond(opening.atom, prev_atom, order);
        }
        pending_bond.reset();
    };

    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        char c = s[i];
        switch (c) {
            case '-': pending_bond = BondOrder::Single; ++i; break;
            case '=': pending_bond = BondOrder::Double; ++i; break;
            case '#': pending_bond = BondOrder::Triple; ++i; break;
            case ':': pending_bond = BondOrder::Aromatic; ++i; break;
            case '/':
            case '\\':
                // stereo bond markers: parsed, treated as single
                pending_bond = BondOrder::Single;
                ++i;
                break;
            case '(':
                if (prev_atom < 0) fail(SmilesError::Kind::UnclosedBranch, i, "branch before any atom");
                branch_stack.push_back(prev_atom);
                branch_pos.push_back(i);
                ++i;
                break;
            case ')':
                if (branch_stack.empty())
                    fail(SmilesError::Kind::UnclosedBranch, i, "unmatched ')'");
                prev_atom = branch_stack.back();
                branch_stack.pop_back();
                branch_pos.pop_back();
                ++i;
                break;
            case '%': {
                if (i + 2 >= n || !std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
                    !std::isdigit(static_cast<unsigned char>(s[i + 2])))
                    fail(SmilesError::Kind::UnclosedRing, i, "malformed %nn ring closure");
                int num = (s[i + 1] - '0') * 10 + (s[i + 2] - '0');
                if (prev_atom < 0)
                    fail(SmilesError::Kind::UnclosedRing, i, "ring closure before any atom");
                open_or_close_ring(num, i);
                i += 3;
                break;
            }
            case '[': {
                std::size_t start = i;
                std::size_t end = s.find(']', i);
                if (end == std::string::npos)
                    fail(SmilesError::Kind::UnbalancedBracket, start, "missing ']'");
                std::size_t j = i + 1;
                while (j < end && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;  // isotope
                if (j >= end || !std::isalpha(static_cast<unsigned char>(s[j])))
                    fail(SmilesError::Kind::UnknownAtomSymbol, j, "missing atom symbol in bracket");
                bool aromatic = std::islower(static_cast<unsigned char>(s[j]));
                std::string sym(1, static_cast<char>(std::toupper(s[j])));
                ++j;
                if (j < end && std::islower(static_cast<unsigned char>(s[j])) && s[j] != 'h') {
                    sym.push_back(s[j]);
                    ++j;
                }
                Element el = lookup_element(sym).value_or(Element::Other);
                while (j < end && s[j] == '@') ++j;  // chirality discarded
                int hcount = 0;
                if (j < end && s[j] == 'H') {
                    ++j;
                    hcount = 1;
                    if (j < end && std::isdigit(static_cast<unsigned char>(s[j]))) {
                        hcount = s[j] - '0';
                        ++j;
                    }
                }
                int charge = 0;
                while (j < end && (s[j] == '+' || s[j] == '-')) {
                    int sign = s[j] == '+' ? 1 : -1;
                    ++j;
                    if (j < end && std::isdigit(static_cast<unsigned char>(s[j]))) {
                        charge += sign * (s[j] - '0');
                        ++j;
                    } else {
                        charge += sign;
                    }
                }
                if (j != end)
                    fail(SmilesError::Kind::UnknownAtomSymbol, j, "unexpected bracket content");
                add_atom(el, aromatic, charge, hcount, /*from_bracket=*/true);
                i = end + 1;
                break;
            }
            case ']':
                fail(SmilesError::Kind::UnbalancedBracket, i, "unmatched ']'");
                break;
            default: {
                if (std::isdigit(static_cast<unsigned char>(c))) {
                    if (prev_atom < 0)
                        fail(SmilesError::Kind::UnclosedRing, i, "ring closure before any atom");
                    open_or_close_ring(c - '0', i);
                    ++i;
                    break;
                }
                if (std::isupper(static_cast<unsigned char>(c))) {
                    std::string sym(1, c);
                    if (i + 1 < n && std::islower(static_cast<unsigned char>(s[i + 1]))) {
                        std::string two = sym + s[i + 1];
                        if (lookup_element(two)) {
                            add_atom(*lookup_element(two), false, 0, 0, false);
                            i += 2;
                            break;
                        }
                    }
                    auto el = lookup_element(sym);
                    if (!el) fail(SmilesError::Kind::UnknownAtomSymbol, i, "unknown atom symbol");
                    add_atom(*el, false, 0, 0, false);
                    ++i;
                    break;
                }
                if (std::islower(static_cast<unsigned char>(c))) {
                    std::string sym(1, static_cast<char>(std::toupper(c)));
                    auto el = lookup_element(sym);
                    if (!el || kElements[static_cast<std::size_t>(*el)].valence == 0)
                        fail(SmilesError::Kind::UnknownAtomSymbol, i, "unknown aromatic atom");
                    add_atom(*el, true, 0, 0, false);
                    ++i;
                    break;
                }
                fail(SmilesError::Kind::UnknownAtomSymbol, i, "unexpected character");
            }
        }
    }

    if (!branch_stack.empty())
        fail(SmilesError::Kind::UnclosedBranch, branch_pos.back(), "unclosed '('");
    if (!open_rings.empty())
        fail(SmilesError::Kind::UnclosedRing, open_rings.begin()->second.position,
             "unclosed ring bond");

    // Implicit hydrogens for organic-subset atoms: default valence minus
    // the (aromatic-aware) bond order sum.
    std::vector<double> order_sum(g.num_atoms(), 0.0);
    for (const BondRecord& b : g.bonds) {
        order_sum[b.a] += order_value(b.order);
        order_sum[b.b] += order_value(b.order);
    }
    for (std::size_t a = 0; a < g.num_atoms(); ++a) {
        if (g.atoms[a].h_count < 0) {
            int valence = kElements[static_cast<std::size_t>(g.atoms[a].element)].valence;
            int used = static_cast<int>(std::ceil(order_sum[a] - 1e-9));
            g.atoms[a].h_count = std::max(0, valence - used);
        }
    }

    mark_ring_bonds(g);

    g.adjacency = Matrix(g.num_atoms(), g.num_atoms());
    for (const BondRecord& b : g.bonds) {
        g.adjacency(b.a, b.b) = 1.0;
        g.adjacency(b.b, b.a) = 1.0;
    }
    return g;
}

void featurize(MoleculeGraph& graph) {
    graph.node_features = Matrix(graph.num_atoms(), kNodeFeatureDim);
    for (std::size_t i = 0; i < graph.num_atoms(); ++i) {
        const AtomRecord& a = graph.atoms[i];
        std::size_t off = 0;
        graph.node_features(i, off + static_cast<std::size_t>(a.element)) = 1.0;
        off += kElementCount;
        graph.node_features(i, off + static_cast<std::size_t>(std::clamp(a.degree, 0, 5))) = 1.0;
        off += 6;
        graph.node_features(i, off) = a.aromatic ? 1.0 : 0.0;
        off += 1;
        graph.node_features(i, off + static_cast<std::size_t>(std::clamp(a.formal_charge, -2, 2) + 2)) = 1.0;
        off += 5;
        graph.node_features(i, off + static_cast<std::size_t>(std::clamp(a.h_count, 0, 4))) = 1.0;
    }
    graph.edge_features = Matrix(graph.num_bonds(), kEdgeFeatureDim);
    for (std::size_t e = 0; e < graph.num_bonds(); ++e) {
        graph.edge_features(e, static_cast<std::size_t>(graph.bonds[e].order)) = 1.0;
        graph.edge_features(e, 4) = graph.bonds[e].in_ring ? 1.0 : 0.0;
    }
}

SpectralOperator spectral_operator(const MoleculeGraph& graph) {
    std::size_t n = graph.num_atoms();
    Matrix a_hat = graph.adjacency;
    if (a_hat.rows() != n) a_hat = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) a_hat(i, i) += 1.0;  // self-loops
    std::vector<double> dinv(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += a_hat(i, j);
        dinv[i] = 1.0 / std::sqrt(deg);  // deg >= 1 after self-loops
    }
    SpectralOperator op{Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            op.matrix(i, j) = dinv[i] * a_hat(i, j) * dinv[j];
    return op;
}

Matrix edge_to_node(const MoleculeGraph& graph) {
    Matrix out(graph.num_atoms(), kEdgeFeatureDim);
    for (std::size_t e = 0; e < graph.num_bonds(); ++e) {
        for (std::size_t j = 0; j < kEdgeFeatureDim; ++j) {
            out(graph.bonds[e].a, j) += graph.edge_features(e, j);
            out(graph.bonds[e].b, j) += graph.edge_features(e, j);
        }
    }
    return out;
}

}  // namespace mmf
