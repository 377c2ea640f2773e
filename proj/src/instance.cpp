#include "secalloc/instance.hpp"

#include <sstream>

#include "secalloc/errors.hpp"

namespace secalloc {

ProblemInstance make_instance(KnowledgeBase kb, std::vector<AttackSequence> sequences,
                              double lambda, double delta, InstanceOptions options) {
    auto report = validate_knowledge_base(kb, options.eta0_cap);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "knowledge base failed validation:";
        for (const auto& f : report.findings) msg << "\n  [" << f.code << "] " << f.message;
        throw ValidationError(msg.str());
    }
    if (kb.sectors.empty())
        throw ValidationError("budget allocation needs at least one sector");

    ScoringParams params;
    params.lambda = lambda;
    params.delta = delta;
    for (const auto& m : kb.mitigations) params.eta0.push_back(m.eta0);
    params.check();

    ProblemInstance instance;
    instance.kb = std::move(kb);
    instance.seqs = build_sequence_matrix(sequences, instance.kb);
    instance.M = build_mitigation_matrix(instance.kb);
    instance.C = build_sector_matrix(instance.kb);
    instance.eta0 = std::move(params.eta0);
    instance.P = build_p_matrix(instance.M, instance.eta0);
    instance.lambda = lambda;
    instance.delta = delta;
    instance.options = options;
    return instance;
}

ScoreBreakdown score_assignment(const ProblemInstance& instance, const BinaryVector& x,
                                const BudgetVector& b) {
    ScoreBreakdown out;
    out.f = fractional_budget(instance.C, b);
    out.eta = improve_efficacy(instance.eta0, instance.lambda, out.f);
    out.log_r = technique_log_success(instance.M, x, out.eta);
    out.log_v = sequence_log_success(instance.seqs.S, out.log_r);
    auto cls = classify_and_vulnerability(out.log_v, instance.delta);
    out.highly_likely = std::move(cls.highly_likely);
    out.highly_likely_count = cls.count;
    out.vulnerability = cls.vulnerability;
    out.empty_sequence_warning = cls.empty_sequence_warning;
    return out;
}

} // namespace secalloc
