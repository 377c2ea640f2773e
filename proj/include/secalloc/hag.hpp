#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "secalloc/attack_model.hpp"
#include "secalloc/types.hpp"

namespace secalloc {

// Directed acyclic technique graph. Every edge goes from a technique of a
// strictly earlier tactic to one of a strictly later tactic, which rules out
// cycles and repeated techniques on any path.
struct Hag {
    std::vector<std::string> nodes;                          // technique ids
    std::vector<std::pair<std::string, std::string>> edges;  // ordered pairs
};

// Ordered, repeat-free technique list with strictly increasing tactic indices.
struct AttackSequence {
    std::vector<std::string> techniques;

    bool operator==(const AttackSequence&) const = default;
};

// Sequences plus the sequence/technique membership table S
// (S[l][k] = 1 iff technique k appears in sequence l).
struct SequenceSet {
    std::vector<AttackSequence> sequences;
    BinaryTable S;
};

struct HagGenParams {
    std::size_t n_nodes = 0;
    double edge_density = 0.0; // in (0, 1]
};

// Deterministic synthetic HAG generator. The randomness contract is part of
// the file-format contract so seeds are portable across implementations:
//   - PRNG: std::mt19937_64 seeded with `seed`;
//   - uniform double in [0,1): (next() >> 11) * 2^-53;
//   - uniform integer below n: rejection sampling on the raw 64-bit stream
//     (retry while draw >= 2^64 - 2^64 % n, then take draw % n).
// Node choice: one impact-tactic technique first when the knowledge base has
// any, then uniform draws without replacement from the ascending remaining
// technique pool. Nodes are sorted by (tactic index, id); each
// tactic-increasing node pair is then visited in that order and kept as an
// edge iff a uniform draw < edge_density.
Hag generate_synthetic_hag(const KnowledgeBase& kb, std::uint64_t seed,
                           const HagGenParams& params);

// Verifies node ids resolve and every edge strictly increases the tactic
// index; throws ValidationError otherwise.
void validate_hag(const Hag& hag, const KnowledgeBase& kb);

struct EnumerationCaps {
    std::size_t max_len = 12;      // maximum path length (node count)
    std::size_t max_count = 10000; // stop once this many paths were emitted
};

// Signals that enumeration dropped something; never fatal.
struct TruncationNotice {
    bool length_capped = false; // at least one path exceeded max_len
    bool count_capped = false;  // enumeration stopped at max_count
    bool any() const { return length_capped || count_capped; }
};

struct EnumerationResult {
    std::vector<AttackSequence> sequences;
    TruncationNotice truncation;
};

// All simple paths from in-degree-0 nodes to out-degree-0 nodes, depth-first
// with nodes and neighbors visited in id order, so output order is stable.
EnumerationResult enumerate_sequences(const Hag& hag, const EnumerationCaps& caps = {});

// Keeps exactly the sequences touching at least one impact-tactic technique.
std::vector<AttackSequence> filter_impact_sequences(const std::vector<AttackSequence>& seqs,
                                                    const KnowledgeBase& kb);

// Builds S with row order following the input order. Duplicate sequences
// produce duplicate rows on purpose: vulnerability is a fraction of rows.
SequenceSet build_sequence_matrix(const std::vector<AttackSequence>& seqs,
                                  const KnowledgeBase& kb);

} // namespace secalloc
