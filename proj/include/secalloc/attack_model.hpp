#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "secalloc/types.hpp"

namespace secalloc {

// Upper bound on mitigation efficacies. Efficacy 1 would make log(1 - eta)
// blow up, so values are capped strictly below 1.
constexpr double kDefaultEta0Cap = 0.99;

struct Technique {
    std::string id;
    std::string name;
    std::string tactic;
};

struct Mitigation {
    std::string id;
    std::string name;
    double eta0 = 0.0;                   // initial efficacy, in [0, eta0_cap]
    std::vector<std::string> sectors;    // budget sectors it draws from (nonempty)
    std::vector<std::string> techniques; // technique ids it can prevent
};

struct Sector {
    std::string id;
    std::string name;
};

struct KnowledgeBase {
    std::vector<std::string> tactic_order; // attack sequences traverse tactics in this order
    std::vector<Technique> techniques;
    std::vector<Mitigation> mitigations;
    std::vector<Sector> sectors;

    // The impact tactic is by convention the last entry of tactic_order.
    const std::string& impact_tactic() const { return tactic_order.back(); }
};

// Default enterprise tactic list, ordered, ending in "impact".
std::vector<std::string> default_tactic_order();

// The seven budget sectors used when a model file does not override them.
std::vector<Sector> default_sectors();

// Fast id -> index lookups over an immutable KnowledgeBase.
class KbIndex {
public:
    explicit KbIndex(const KnowledgeBase& kb);

    std::optional<std::size_t> technique(const std::string& id) const;
    std::optional<std::size_t> mitigation(const std::string& id) const;
    std::optional<std::size_t> sector(const std::string& id) const;
    std::optional<std::size_t> tactic(const std::string& id) const;

    // Tactic position of a technique, if both the technique and its tactic resolve.
    std::optional<std::size_t> technique_tactic(const std::string& technique_id) const;

private:
    std::unordered_map<std::string, std::size_t> techniques_;
    std::unordered_map<std::string, std::size_t> mitigations_;
    std::unordered_map<std::string, std::size_t> sectors_;
    std::unordered_map<std::string, std::size_t> tactics_;
    std::vector<std::size_t> technique_tactic_; // technique index -> tactic index (or npos)
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct ValidationFinding {
    std::string code;    // stable machine key, e.g. "duplicate-id"
    std::string message; // human-readable detail
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    bool ok() const { return findings.empty(); }
};

// Collects every defect in kb instead of stopping at the first one.
// Checks: duplicate ids, dangling technique references, empty sector sets,
// unknown sectors, eta0 outside [0, eta0_cap], unknown tactics.
ValidationReport validate_knowledge_base(const KnowledgeBase& kb,
                                         double eta0_cap = kDefaultEta0Cap);

// M[i][k] = 1 iff technique k is covered by mitigation i. Row/column order
// follows kb list order. Requires a validated kb (throws ValidationError on
// a dangling technique reference).
BinaryTable build_mitigation_matrix(const KnowledgeBase& kb);

// C[i][j] = 1 iff mitigation i belongs to sector j. Every row must end up
// nonzero; a mitigation without sectors raises ValidationError since later
// stages divide by the row sum.
BinaryTable build_sector_matrix(const KnowledgeBase& kb);

} // namespace secalloc
