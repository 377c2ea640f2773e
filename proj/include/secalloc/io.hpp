#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "secalloc/hag.hpp"
#include "secalloc/instance.hpp"
#include "secalloc/milp.hpp"
#include "secalloc/solver.hpp"

#include <json.hpp>

namespace secalloc {

// Insertion-ordered JSON so emitted documents have a stable key order.
using Json = nlohmann::ordered_json;

// Fixed number formatting for every emitted file: 9 significant digits,
// '.' decimal separator. Identical inputs give identical bytes.
std::string format_double(double v);

// Re-serializes j with format_double applied to every floating number.
std::string emit_json(const Json& j);

// Parses a double the same way emitted files store it; round-tripping a
// formatted value through this is exact.
double normalize_double(double v);

struct LoadOptions {
    bool strict = true; // unknown keys / validation findings abort instead of warn
    double eta0_cap = kDefaultEta0Cap;
};

// Model file: {"tactic_order": [...]?, "sectors": [...], "techniques": [...],
// "mitigations": [...]}. tactic_order falls back to the default enterprise
// list. Throws ParseError with field context, ValidationError on findings in
// strict mode; lenient mode records warnings instead.
KnowledgeBase load_model(const std::string& path, const LoadOptions& opts = {},
                         std::vector<std::string>* warnings = nullptr);
KnowledgeBase parse_model(const Json& doc, const LoadOptions& opts = {},
                          std::vector<std::string>* warnings = nullptr);
Json model_to_json(const KnowledgeBase& kb);
void save_model(const KnowledgeBase& kb, const std::string& path);

// HAG file: {"nodes": [...], "edges": [["u","v"], ...]}.
Hag load_hag(const std::string& path);
Json hag_to_json(const Hag& hag);
void save_hag(const Hag& hag, const std::string& path);

// Sequence file: {"sequences": [["t1","t2"], ...]}; bypasses enumeration.
std::vector<AttackSequence> load_sequences(const std::string& path);
Json sequences_to_json(const std::vector<AttackSequence>& seqs);
void save_sequences(const std::vector<AttackSequence>& seqs, const std::string& path);

struct RunConfig {
    std::string model_path;
    std::string hag_path;       // exactly one of hag_path / sequences_path
    std::string sequences_path;
    double lambda = 0.1;
    double delta = 0.1;
    SolverOptions solver;
    InstanceOptions instance;
    LoadOptions load;
    std::string out_path;

    // generate
    std::uint64_t seed = 1;
    std::size_t gen_nodes = 12;
    double gen_density = 0.3;
    EnumerationCaps caps;
    std::string out_hag_path;
    std::string out_sequences_path;

    // verify
    double grid_step = 0.0; // 0 picks default_grid_step(n_sectors)
    long objective_offset = 0; // test hook shifting the claimed objective

    // sweep: emit measured wall time instead of 0 (breaks byte determinism)
    bool report_timing = false;
};

struct SweepRow {
    double lambda = 0.0;
    std::size_t objective = 0;
    double vulnerability = 0.0;
    RealVector b;
    std::string status;
    double gap = 0.0;
    double seconds = 0.0;
};

struct SweepReport {
    std::vector<std::string> sector_ids;
    std::vector<SweepRow> rows;
};

std::string write_sweep_csv(const SweepReport& report);
SweepReport parse_sweep_csv(const std::string& text);

// Solution document for cmd_optimize; deterministic byte stream.
Json solution_to_json(const Solution& sol, const ProblemInstance& instance,
                      const std::vector<std::string>& warnings);

// Loads inputs, assembles the instance per config (HAG input is enumerated
// and impact-filtered; a sequences file is taken as-is).
ProblemInstance assemble_instance(const RunConfig& config,
                                  std::vector<std::string>* warnings = nullptr);

// Exit codes: 0 solved (optimal or feasible), 2 timed out, 1 any error;
// cmd_verify uses 0 PASS, 1 FAIL, 3 enumeration guard.
int cmd_optimize(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, const std::vector<double>& lambda_grid,
              std::ostream& log);
int cmd_generate(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

} // namespace secalloc
