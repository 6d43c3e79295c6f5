#include "mmf/chem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace mmf {

namespace {

// splitmix64-style mixer; fixed constants keep fingerprints stable across
// runs and platforms.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

int order_code(BondOrder o) { return static_cast<int>(o) + 1; }

}  // namespace

std::size_t BitFingerprint::popcount() const {
    std::size_t s = 0;
    for (std::uint64_t w : bits) s += std::popcount(w);
    return s;
}

std::vector<std::size_t> BitFingerprint::set_bits() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nbits; ++i)
        if (test(i)) out.push_back(i);
    return out;
}

BitFingerprint morgan_fingerprint(const MoleculeGraph& graph, int radius,
                                  std::size_t nbits) {
    if (nbits == 0) throw ChemError("morgan_fingerprint: nbits must be positive");
    BitFingerprint fp;
    fp.nbits = nbits;
    fp.radius = radius;
    fp.bits.assign((nbits + 63) / 64, 0);

    std::size_t n = graph.num_atoms();
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, order code)
    for (const BondRecord& b : graph.bonds) {
        adj[b.a].push_back({b.b, order_code(b.order)});
        adj[b.b].push_back({b.a, order_code(b.order)});
    }

    std::vector<std::uint64_t> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const AtomRecord& a = graph.atoms[i];
        std::uint64_t h = mix64(0x6d6f7267ull);  // domain tag
        h = hash_combine(h, static_cast<std::uint64_t>(a.element));
        h = hash_combine(h, static_cast<std::uint64_t>(a.degree));
        h = hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 8));
        h = hash_combine(h, static_cast<std::uint64_t>(a.h_count));
        h = hash_combine(h, a.aromatic ? 1u : 0u);
        inv[i] = h;
    }

    for (int r = 0; r <= radius; ++r) {
        for (std::size_t i = 0; i < n; ++i) fp.set(inv[i] % nbits);
        if (r == radius) break;
        std::vector<std::uint64_t> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::pair<int, std::uint64_t>> nbrs;
            nbrs.reserve(adj[i].size());
            for (auto [u, oc] : adj[i]) nbrs.push_back({oc, inv[u]});
            std::sort(nbrs.begin(), nbrs.end());
            std::uint64_t h = hash_combine(mix64(static_cast<std::uint64_t>(r) + 1), inv[i]);
            for (auto [oc, ni] : nbrs) {
                h = hash_combine(h, static_cast<std::uint64_t>(oc));
                h = hash_combine(h, ni);
            }
            next[i] = h;
        }
        inv = std::move(next);
    }
    return fp;
}

double tanimoto(const BitFingerprint& a, const BitFingerprint& b) {
    if (a.nbits != b.nbits) throw ChemError("tanimoto: fingerprint length mismatch");
    std::uint64_t inter = kernels::popcount_and(a.bits.data(), b.bits.data(), a.bits.size());
    std::uint64_t uni = kernels::popcount_or(a.bits.data(), b.bits.data(), a.bits.size());
    if (uni == 0) return 1.0;  // two featureless molecules are maximally similar
    return static_cast<double>(inter) / static_cast<double>(uni);
}

ScaffoldKey murcko_scaffold(const MoleculeGraph& graph) {
    std::size_t n = graph.num_atoms();
    std::vector<bool> alive(n, true);
    std::vector<int> degree(n, 0);
    for (const BondRecord& b : graph.bonds) {
        degree[b.a] += 1;
        degree[b.b] += 1;
    }
    // iteratively peel degree-1 atoms (side chains)
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (alive[i] && degree[i] <= 1) {
                alive[i] = false;
                changed = true;
                for (const BondRecord& b : graph.bonds) {
                    if (b.a == static_cast<int>(i) && alive[b.b]) degree[b.b] -= 1;
                    if (b.b == static_cast<int>(i) && alive[b.a]) degree[b.a] -= 1;
                }
            }
        }
    }

    std::vector<int> keep;
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) keep.push_back(static_cast<int>(i));
    if (keep.empty()) return ScaffoldKey{};

    std::vector<std::string> atom_tokens;
    for (int i : keep) {
        const AtomRecord& a = graph.atoms[i];
        atom_tokens.push_back(std::string(element_symbol(a.element)) +
                              (a.aromatic ? ":a" : ""));
    }
    std::sort(atom_tokens.begin(), atom_tokens.end());

    std::vector<std::pair<int, int>> kept_bonds;  // indices into graph.bonds kept
    std::vector<std::string> bond_tokens;
    for (std::size_t e = 0; e < graph.bonds.size(); ++e) {
        const BondRecord& b = graph.bonds[e];
        if (!alive[b.a] || !alive[b.b]) continue;
        kept_bonds.push_back({b.a, b.b});
        std::string ea = element_symbol(graph.atoms[b.a].element);
        std::string eb = element_symbol(graph.atoms[b.b].element);
        if (eb < ea) std::swap(ea, eb);
        bond_tokens.push_back(std::to_string(order_code(b.order)) + "(" + ea + "," + eb + ")");
    }
    std::sort(bond_tokens.begin(), bond_tokens.end());

    // smallest ring size through each kept edge (BFS excluding the edge);
    // the multiset of these sizes is isomorphism invariant
    std::vector<int> ring_sizes;
    for (auto [sa, sb] : kept_bonds) {
        std::vector<int> dist(n, -1);
        std::queue<int> q;
        dist[sa] = 0;
        q.push(sa);
        while (!q.empty() && dist[sb] < 0) {
            int v = q.front();
            q.pop();
            for (const BondRecord& b : graph.bonds) {
                if (!alive[b.a] || !alive[b.b]) continue;
                if ((b.a == sa && b.b == sb) || (b.a == sb && b.b == sa)) continue;
                int u = -1;
                if (b.a == v) u = b.b;
                else if (b.b == v) u = b.a;
                if (u >= 0 && dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    q.push(u);
                }
            }
        }
        if (dist[sb] >= 0) ring_sizes.push_back(dist[sb] + 1);
    }
    std::sort(ring_sizes.begin(), ring_sizes.end());

    std::string key = "atoms:";
    for (const auto& t : atom_tokens) key += t + ";";
    key += "|bonds:";
    for (const auto& t : bond_tokens) key += t + ";";
    key += "|rings:";
    for (int s : ring_sizes) key += std::to_string(s) + ";";
    return ScaffoldKey{key};
}

namespace {

std::vector<std::size_t> eligible_indices(const std::string& query_smiles,
                                          const DemoPool& pool) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pool.smiles.size(); ++i)
        if (pool.smiles[i] != query_smiles) out.push_back(i);  // leakage guard
    return out;
}

Demo make_demo(const DemoPool& pool, std::size_t idx, double sim) {
    return Demo{pool.smiles[idx], pool.targets[idx], sim, idx};
}

}  // namespace

std::vector<Demo> sample_demos(const std::string& query_smiles,
                               const BitFingerprint& query_fp, const DemoPool& pool,
                               std::size_t k, SampleStrategy strategy,
                               std::uint64_t seed) {
    std::vector<std::size_t> idx = eligible_indices(query_smiles, pool);
    if (k > idx.size()) throw ChemError("sample_demos: pool too small");

    std::vector<Demo> out;
    if (strategy == SampleStrategy::Random) {
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> shuffled = idx;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (std::size_t i = 0; i < k; ++i)
            out.push_back(make_demo(pool, shuffled[i],
                                    tanimoto(query_fp, pool.fingerprints[shuffled[i]])));
        return out;
    }

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(idx.size());
    for (std::size_t i : idx) scored.push_back({tanimoto(query_fp, pool.fingerprints[i]), i});
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // ties by ascending pool index
    });
    for (std::size_t i = 0; i < k; ++i)
        out.push_back(make_demo(pool, scored[i].second, scored[i].first));
    return out;
}

std::vector<Demo> balanced_sample_demos(const std::string& query_smiles,
                                        const BitFingerprint& query_fp,
                                        const DemoPool& pool, std::size_t k,
                                        std::uint64_t /*seed*/) {
    std::vector<std::size_t> idx = eligible_indices(query_smiles, pool);
    std::vector<std::size_t> cls0, cls1;
    for (std::size_t i : idx) {
        if (pool.targets[i].empty()) throw ChemError("balanced_sample_demos: empty target");
        double y = pool.targets[i][0];
        if (y == 0.0) cls0.push_back(i);
        else if (y == 1.0) cls1.push_back(i);
        else throw ChemError("balanced_sample_demos: target not binary");
    }
    if (cls0.empty() || cls1.empty())
        throw ChemError("balanced_sample_demos: both classes must be present");

    // 3:2 majority-to-minority ratio
    std::size_t majority_count = static_cast<std::size_t>(
        std::llround(3.0 * static_cast<double>(k) / 5.0));
    std::size_t minority_count = k - majority_count;
    const std::vector<std::size_t>& majority = cls0.size() >= cls1.size() ? cls0 : cls1;
    const std::vector<std::size_t>& minority = cls0.size() >= cls1.size() ? cls1 : cls0;
    if (majority_count > majority.size() || minority_count > minority.size())
        throw ChemError("balanced_sample_demos: class exhausted");

    auto take_top = [&](const std::vector<std::size_t>& members, std::size_t want) {
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t i : members)
            scored.push_back({tanimoto(query_fp, pool.fingerprints[i]), i});
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::vector<Demo> out;
        for (std::size_t i = 0; i < want; ++i)
            out.push_back(make_demo(pool, scored[i].second, scored[i].first));
        return out;
    };

    std::vector<Demo> out = take_top(majority, majority_count);
    std::vector<Demo> minor = take_top(minority, minority_count);
    out.insert(out.end(), minor.begin(), minor.end());
    std::stable_sort(out.begin(), out.end(), [](const Demo& a, const Demo& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.pool_index < b.pool_index;
    });
    return out;
}

}  // namespace mmf
