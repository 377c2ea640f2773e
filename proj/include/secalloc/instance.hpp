#pragma once

#include <optional>

#include "secalloc/attack_model.hpp"
#include "secalloc/hag.hpp"
#include "secalloc/scoring.hpp"

namespace secalloc {

struct InstanceOptions {
    double eta0_cap = kDefaultEta0Cap;
    bool sparse_tiebreak = true;             // secondary objective: fewest mitigations
    std::optional<std::size_t> max_selected; // optional cap on the mitigation count
};

// Everything one optimization run needs: the knowledge base, the sequence
// set, derived relation tables, and the scoring parameters.
struct ProblemInstance {
    KnowledgeBase kb;
    SequenceSet seqs;
    BinaryTable M; // mitigations x techniques
    BinaryTable C; // mitigations x sectors
    RealTable P;   // M[i][k] * log(1 - eta0_i)
    RealVector eta0;
    double lambda = 0.1;
    double delta = 0.1;
    InstanceOptions options;

    std::size_t n_mitigations() const { return kb.mitigations.size(); }
    std::size_t n_techniques() const { return kb.techniques.size(); }
    std::size_t n_sectors() const { return kb.sectors.size(); }
    std::size_t n_sequences() const { return seqs.sequences.size(); }
};

// Validates the knowledge base, resolves sequences against it, and builds
// the relation tables. Throws ValidationError / ConfigError on bad input.
ProblemInstance make_instance(KnowledgeBase kb, std::vector<AttackSequence> sequences,
                              double lambda, double delta, InstanceOptions options = {});

// Scores one (x, b) assignment end to end through the closed-form algebra.
ScoreBreakdown score_assignment(const ProblemInstance& instance, const BinaryVector& x,
                                const BudgetVector& b);

} // namespace secalloc
