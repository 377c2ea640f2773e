#pragma once

#include <cstddef>
#include <vector>

#include "secalloc/types.hpp"

namespace secalloc {

// Tolerance for the budget simplex constraint (sum b = 1).
constexpr double kBudgetTolerance = 1e-9;

// Slack applied toward "highly likely" at the threshold boundary, so the
// non-strict comparison v >= delta is deterministic under float noise.
constexpr double kDeltaSlack = 1e-12;

// Budget partition over sectors: nonnegative entries summing to 1.
class BudgetVector {
public:
    explicit BudgetVector(RealVector values); // throws ValidationError off the simplex

    static BudgetVector uniform(std::size_t n_sectors);

    const RealVector& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }

private:
    RealVector values_;
};

struct ScoringParams {
    double lambda = 0.1; // defender skill, >= 0
    double delta = 0.1;  // likelihood threshold, in (0, 1]
    RealVector eta0;     // initial efficacy per mitigation

    void check() const; // throws ConfigError on out-of-range lambda/delta
};

// Full evaluation of one (x, b) assignment.
struct ScoreBreakdown {
    RealVector f;                    // per-mitigation fractional budgets
    RealVector eta;                  // improved efficacies
    RealVector log_r;                // per-technique log success rates (<= 0)
    RealVector log_v;                // per-sequence log success rates (<= 0)
    std::vector<char> highly_likely; // per-sequence flags
    double vulnerability = 0.0;      // flagged count / sequence count
    std::size_t highly_likely_count = 0;
    bool empty_sequence_warning = false; // set when there are zero sequences
};

// f_i = (sum_j C[i][j] b_j) / (sum_j C[i][j]). Throws ValidationError when a
// row of C is all-zero (nothing to average over).
RealVector fractional_budget(const BinaryTable& C, const BudgetVector& b);

// eta = 1 - (1 - eta0) * exp(-lambda * f); monotone in f and lambda,
// equal to eta0 at f = 0, always < 1.
double improve_efficacy(double eta0, double lambda, double f);
RealVector improve_efficacy(const RealVector& eta0, double lambda, const RealVector& f);

// log r_k = sum_i x_i M[i][k] log(1 - eta_i). Requires eta_i < 1. A technique
// no selected mitigation covers keeps log r_k = 0 (success rate 1); that is a
// legal state, not an error.
RealVector technique_log_success(const BinaryTable& M, const BinaryVector& x,
                                 const RealVector& eta);

// P[i][k] = M[i][k] * log(1 - eta0_i); all entries <= 0.
RealTable build_p_matrix(const BinaryTable& M, const RealVector& eta0);

// Fused form: log r_k = [P^T x]_k - lambda [M^T diag(f) x]_k. Agrees with
// improve_efficacy followed by technique_log_success to within 1e-9.
RealVector technique_log_success_budgeted(const BinaryTable& M, const RealTable& P,
                                          const BinaryVector& x, const RealVector& f,
                                          double lambda);

// log v_l = sum_k S[l][k] log r_k.
RealVector sequence_log_success(const BinaryTable& S, const RealVector& log_r);

struct Classification {
    std::vector<char> highly_likely;
    std::size_t count = 0;
    double vulnerability = 0.0;
    bool empty_sequence_warning = false;
};

// flag_l = (log v_l >= log delta - slack); vulnerability = count / N_D.
// An empty sequence set yields vulnerability 0 with the warning flag set.
Classification classify_and_vulnerability(const RealVector& log_v, double delta);

} // namespace secalloc
