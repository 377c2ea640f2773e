#include "secalloc/attack_model.hpp"

#include <set>

#include "secalloc/errors.hpp"

namespace secalloc {

std::vector<std::string> default_tactic_order() {
    return {
        "initial-access",  "execution",           "persistence",
        "privilege-escalation", "defense-evasion", "credential-access",
        "discovery",       "lateral-movement",    "collection",
        "command-and-control", "exfiltration",    "impact",
    };
}

std::vector<Sector> default_sectors() {
    return {
        {"assets", "Asset Management"},
        {"continuity", "Business Continuity"},
        {"access_trust", "Access & Trust"},
        {"operations", "Operations"},
        {"defense", "Defense"},
        {"governance", "Security Governance"},
        {"individual", "Employee Training"},
    };
}

KbIndex::KbIndex(const KnowledgeBase& kb) {
    for (std::size_t i = 0; i < kb.techniques.size(); ++i)
        techniques_.emplace(kb.techniques[i].id, i);
    for (std::size_t i = 0; i < kb.mitigations.size(); ++i)
        mitigations_.emplace(kb.mitigations[i].id, i);
    for (std::size_t i = 0; i < kb.sectors.size(); ++i)
        sectors_.emplace(kb.sectors[i].id, i);
    for (std::size_t i = 0; i < kb.tactic_order.size(); ++i)
        tactics_.emplace(kb.tactic_order[i], i);

    technique_tactic_.resize(kb.techniques.size(), npos);
    for (std::size_t i = 0; i < kb.techniques.size(); ++i) {
        auto it = tactics_.find(kb.techniques[i].tactic);
        if (it != tactics_.end()) technique_tactic_[i] = it->second;
    }
}

namespace {
std::optional<std::size_t> find_in(const std::unordered_map<std::string, std::size_t>& m,
                                   const std::string& id) {
    auto it = m.find(id);
    if (it == m.end()) return std::nullopt;
    return it->second;
}
} // namespace

std::optional<std::size_t> KbIndex::technique(const std::string& id) const {
    return find_in(techniques_, id);
}
std::optional<std::size_t> KbIndex::mitigation(const std::string& id) const {
    return find_in(mitigations_, id);
}
std::optional<std::size_t> KbIndex::sector(const std::string& id) const {
    return find_in(sectors_, id);
}
std::optional<std::size_t> KbIndex::tactic(const std::string& id) const {
    return find_in(tactics_, id);
}

std::optional<std::size_t> KbIndex::technique_tactic(const std::string& technique_id) const {
    auto t = technique(technique_id);
    if (!t || technique_tactic_[*t] == npos) return std::nullopt;
    return technique_tactic_[*t];
}

ValidationReport validate_knowledge_base(const KnowledgeBase& kb, double eta0_cap) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message) {
        report.findings.push_back({std::move(code), std::move(message)});
    };

    if (kb.tactic_order.empty())
        add("empty-tactic-order", "tactic_order must list at least one tactic");

    std::set<std::string> seen;
    for (const auto& t : kb.tactic_order)
        if (!seen.insert(t).second)
            add("duplicate-id", "duplicate tactic '" + t + "' in tactic_order");

    seen.clear();
    for (const auto& t : kb.techniques) {
        if (!seen.insert(t.id).second)
            add("duplicate-id", "duplicate technique id '" + t.id + "'");
    }

    seen.clear();
    for (const auto& s : kb.sectors) {
        if (!seen.insert(s.id).second)
            add("duplicate-id", "duplicate sector id '" + s.id + "'");
    }

    seen.clear();
    for (const auto& m : kb.mitigations) {
        if (!seen.insert(m.id).second)
            add("duplicate-id", "duplicate mitigation id '" + m.id + "'");
    }

    KbIndex index(kb);

    for (const auto& t : kb.techniques) {
        if (!index.tactic(t.tactic))
            add("unknown-tactic",
                "technique '" + t.id + "' names tactic '" + t.tactic +
                    "' which is not in tactic_order");
    }

    for (const auto& m : kb.mitigations) {
        if (m.eta0 < 0.0 || m.eta0 > eta0_cap)
            add("eta0-out-of-range",
                "mitigation '" + m.id + "': eta0 exceeds cap (allowed range [0, " +
                    std::to_string(eta0_cap) + "]; log(1 - eta0) must stay finite)");
        if (m.sectors.empty())
            add("empty-sector-set", "mitigation '" + m.id + "' belongs to no sector");
        std::set<std::string> local;
        for (const auto& s : m.sectors) {
            if (!index.sector(s))
                add("unknown-sector",
                    "mitigation '" + m.id + "' references unknown sector '" + s + "'");
            if (!local.insert(s).second)
                add("duplicate-entry",
                    "mitigation '" + m.id + "' lists sector '" + s + "' twice");
        }
        local.clear();
        for (const auto& t : m.techniques) {
            if (!index.technique(t))
                add("dangling-reference",
                    "mitigation '" + m.id + "' references unknown technique '" + t + "'");
            if (!local.insert(t).second)
                add("duplicate-entry",
                    "mitigation '" + m.id + "' lists technique '" + t + "' twice");
        }
    }

    return report;
}

BinaryTable build_mitigation_matrix(const KnowledgeBase& kb) {
    KbIndex index(kb);
    BinaryTable m(kb.mitigations.size(), kb.techniques.size());
    for (std::size_t i = 0; i < kb.mitigations.size(); ++i) {
        for (const auto& tid : kb.mitigations[i].techniques) {
            auto k = index.technique(tid);
            if (!k)
                throw ValidationError("mitigation '" + kb.mitigations[i].id +
                                      "' references unknown technique '" + tid + "'");
            m(i, *k) = 1;
        }
    }
    return m;
}

BinaryTable build_sector_matrix(const KnowledgeBase& kb) {
    KbIndex index(kb);
    BinaryTable c(kb.mitigations.size(), kb.sectors.size());
    for (std::size_t i = 0; i < kb.mitigations.size(); ++i) {
        const auto& mit = kb.mitigations[i];
        if (mit.sectors.empty())
            throw ValidationError("mitigation '" + mit.id +
                                  "' belongs to no sector; the per-mitigation budget divides "
                                  "by its sector count");
        for (const auto& sid : mit.sectors) {
            auto j = index.sector(sid);
            if (!j)
                throw ValidationError("mitigation '" + mit.id +
                                      "' references unknown sector '" + sid + "'");
            c(i, *j) = 1;
        }
    }
    return c;
}

} // namespace secalloc
