#include "secalloc/hag.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n); rejection keeps the draw portable.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

} // namespace

Hag generate_synthetic_hag(const KnowledgeBase& kb, std::uint64_t seed,
                           const HagGenParams& params) {
    if (params.n_nodes == 0)
        throw ConfigError("n_nodes must be positive");
    if (params.n_nodes > kb.techniques.size())
        throw ConfigError("n_nodes (" + std::to_string(params.n_nodes) +
                          ") exceeds the number of techniques (" +
                          std::to_string(kb.techniques.size()) + ")");
    if (!(params.edge_density > 0.0) || params.edge_density > 1.0)
        throw ConfigError("edge_density must lie in (0, 1]");

    KbIndex index(kb);
    std::mt19937_64 rng(seed);

    std::vector<std::size_t> impact_pool;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < kb.techniques.size(); ++i) {
        if (kb.techniques[i].tactic == kb.impact_tactic())
            impact_pool.push_back(i);
        else
            rest.push_back(i);
    }

    std::vector<std::size_t> selected;
    selected.reserve(params.n_nodes);
    if (!impact_pool.empty()) {
        std::size_t pick = uniform_below(rng, impact_pool.size());
        selected.push_back(impact_pool[pick]);
        for (std::size_t i = 0; i < impact_pool.size(); ++i)
            if (i != pick) rest.push_back(impact_pool[i]);
        std::sort(rest.begin(), rest.end());
    }

    // Draws without replacement from the ascending remaining pool.
    while (selected.size() < params.n_nodes) {
        std::size_t pick = uniform_below(rng, rest.size());
        selected.push_back(rest[pick]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
    }

    std::sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
        auto ta = index.tactic(kb.techniques[a].tactic).value();
        auto tb = index.tactic(kb.techniques[b].tactic).value();
        if (ta != tb) return ta < tb;
        return kb.techniques[a].id < kb.techniques[b].id;
    });

    Hag hag;
    hag.nodes.reserve(selected.size());
    for (std::size_t i : selected) hag.nodes.push_back(kb.techniques[i].id);

    for (std::size_t a = 0; a < selected.size(); ++a) {
        auto ta = index.tactic(kb.techniques[selected[a]].tactic).value();
        for (std::size_t b = 0; b < selected.size(); ++b) {
            auto tb = index.tactic(kb.techniques[selected[b]].tactic).value();
            if (ta >= tb) continue;
            if (uniform_unit(rng) < params.edge_density)
                hag.edges.emplace_back(hag.nodes[a], hag.nodes[b]);
        }
    }
    return hag;
}

void validate_hag(const Hag& hag, const KnowledgeBase& kb) {
    KbIndex index(kb);
    std::map<std::string, std::size_t> node_tactic;
    for (const auto& n : hag.nodes) {
        auto t = index.technique_tactic(n);
        if (!t)
            throw ValidationError("HAG node '" + n +
                                  "' is not a known technique with a known tactic");
        if (!node_tactic.emplace(n, *t).second)
            throw ValidationError("HAG node '" + n + "' listed twice");
    }
    for (const auto& [u, v] : hag.edges) {
        auto iu = node_tactic.find(u);
        auto iv = node_tactic.find(v);
        if (iu == node_tactic.end() || iv == node_tactic.end())
            throw ValidationError("HAG edge (" + u + ", " + v +
                                  ") references a node not in the node list");
        if (iu->second >= iv->second)
            throw ValidationError("HAG edge (" + u + ", " + v +
                                  ") does not increase the tactic index");
    }
}

EnumerationResult enumerate_sequences(const Hag& hag, const EnumerationCaps& caps) {
    EnumerationResult result;

    // Adjacency and degrees over id-sorted nodes for a stable visit order.
    std::vector<std::string> order = hag.nodes;
    std::sort(order.begin(), order.end());

    std::map<std::string, std::vector<std::string>> adj;
    std::map<std::string, std::size_t> indeg;
    for (const auto& n : order) {
        adj[n];
        indeg[n] = 0;
    }
    for (const auto& [u, v] : hag.edges) {
        adj[u].push_back(v);
        ++indeg[v];
    }
    for (auto& [_, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

    std::vector<std::string> path;
    bool stop = false;

    auto dfs = [&](auto&& self, const std::string& node) -> void {
        if (stop) return;
        path.push_back(node);
        if (path.size() > caps.max_len) {
            result.truncation.length_capped = true;
            path.pop_back();
            return;
        }
        if (adj[node].empty()) { // sink
            if (result.sequences.size() >= caps.max_count) {
                result.truncation.count_capped = true;
                stop = true;
            } else {
                result.sequences.push_back(AttackSequence{path});
            }
        } else {
            for (const auto& next : adj[node]) {
                self(self, next);
                if (stop) break;
            }
        }
        path.pop_back();
    };

    for (const auto& n : order) {
        if (indeg[n] == 0 && !stop) dfs(dfs, n);
    }
    return result;
}

std::vector<AttackSequence> filter_impact_sequences(const std::vector<AttackSequence>& seqs,
                                                    const KnowledgeBase& kb) {
    KbIndex index(kb);
    const std::string& impact = kb.impact_tactic();
    std::vector<AttackSequence> kept;
    for (const auto& seq : seqs) {
        bool has_impact = false;
        for (const auto& tid : seq.techniques) {
            auto k = index.technique(tid);
            if (k && kb.techniques[*k].tactic == impact) {
                has_impact = true;
                break;
            }
        }
        if (has_impact) kept.push_back(seq);
    }
    return kept;
}

SequenceSet build_sequence_matrix(const std::vector<AttackSequence>& seqs,
                                  const KnowledgeBase& kb) {
    KbIndex index(kb);
    SequenceSet set;
    set.sequences = seqs;
    set.S = BinaryTable(seqs.size(), kb.techniques.size());
    for (std::size_t l = 0; l < seqs.size(); ++l) {
        for (const auto& tid : seqs[l].techniques) {
            auto k = index.technique(tid);
            if (!k)
                throw ValidationError("sequence " + std::to_string(l) +
                                      " references unknown technique '" + tid + "'");
            set.S(l, *k) = 1;
        }
    }
    return set;
}

} // namespace secalloc
