#include "secalloc/scoring.hpp"

#include <cmath>
#include <string>

#include "secalloc/errors.hpp"

namespace secalloc {

BudgetVector::BudgetVector(RealVector values) : values_(std::move(values)) {
    double sum = 0.0;
    for (double v : values_) {
        if (v < 0.0)
            throw ValidationError("budget entries must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kBudgetTolerance)
        throw ValidationError("budget entries must sum to 1 (got " + std::to_string(sum) + ")");
}

BudgetVector BudgetVector::uniform(std::size_t n_sectors) {
    RealVector v(n_sectors, 1.0 / static_cast<double>(n_sectors));
    // Make the sum exact regardless of the division rounding.
    double partial = 0.0;
    for (std::size_t j = 0; j + 1 < n_sectors; ++j) partial += v[j];
    if (n_sectors > 0) v[n_sectors - 1] = 1.0 - partial;
    return BudgetVector(std::move(v));
}

void ScoringParams::check() const {
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (!(delta > 0.0) || delta > 1.0) throw ConfigError("delta must lie in (0, 1]");
}

RealVector fractional_budget(const BinaryTable& C, const BudgetVector& b) {
    RealVector f(C.rows(), 0.0);
    for (std::size_t i = 0; i < C.rows(); ++i) {
        double num = 0.0;
        std::size_t den = 0;
        for (std::size_t j = 0; j < C.cols(); ++j) {
            if (C(i, j)) {
                num += b[j];
                ++den;
            }
        }
        if (den == 0)
            throw ValidationError("sector table row " + std::to_string(i) +
                                  " is all-zero; fractional budget is undefined");
        f[i] = num / static_cast<double>(den);
    }
    return f;
}

double improve_efficacy(double eta0, double lambda, double f) {
    // Same closed form as 1 - (1 - eta0) exp(-lambda f), arranged so that a
    // zero allocation returns eta0 bit-exactly.
    return eta0 + (1.0 - eta0) * (-std::expm1(-lambda * f));
}

RealVector improve_efficacy(const RealVector& eta0, double lambda, const RealVector& f) {
    RealVector eta(eta0.size(), 0.0);
    for (std::size_t i = 0; i < eta0.size(); ++i)
        eta[i] = improve_efficacy(eta0[i], lambda, f[i]);
    return eta;
}

RealVector technique_log_success(const BinaryTable& M, const BinaryVector& x,
                                 const RealVector& eta) {
    RealVector log_r(M.cols(), 0.0);
    for (std::size_t i = 0; i < M.rows(); ++i) {
        if (!x[i]) continue;
        const double term = std::log1p(-eta[i]); // log(1 - eta_i)
        for (std::size_t k = 0; k < M.cols(); ++k)
            if (M(i, k)) log_r[k] += term;
    }
    return log_r;
}

RealTable build_p_matrix(const BinaryTable& M, const RealVector& eta0) {
    RealTable p(M.rows(), M.cols());
    for (std::size_t i = 0; i < M.rows(); ++i) {
        const double term = std::log1p(-eta0[i]);
        for (std::size_t k = 0; k < M.cols(); ++k)
            if (M(i, k)) p(i, k) = term;
    }
    return p;
}

RealVector technique_log_success_budgeted(const BinaryTable& M, const RealTable& P,
                                          const BinaryVector& x, const RealVector& f,
                                          double lambda) {
    RealVector log_r(M.cols(), 0.0);
    for (std::size_t i = 0; i < M.rows(); ++i) {
        if (!x[i]) continue;
        const double budget_term = lambda * f[i];
        for (std::size_t k = 0; k < M.cols(); ++k)
            if (M(i, k)) log_r[k] += P(i, k) - budget_term;
    }
    return log_r;
}

RealVector sequence_log_success(const BinaryTable& S, const RealVector& log_r) {
    RealVector log_v(S.rows(), 0.0);
    for (std::size_t l = 0; l < S.rows(); ++l) {
        double acc = 0.0;
        for (std::size_t k = 0; k < S.cols(); ++k)
            if (S(l, k)) acc += log_r[k];
        log_v[l] = acc;
    }
    return log_v;
}

Classification classify_and_vulnerability(const RealVector& log_v, double delta) {
    if (!(delta > 0.0) || delta > 1.0) throw ConfigError("delta must lie in (0, 1]");
    Classification result;
    result.highly_likely.resize(log_v.size(), 0);
    const double threshold = std::log(delta) - kDeltaSlack;
    for (std::size_t l = 0; l < log_v.size(); ++l) {
        if (log_v[l] >= threshold) {
            result.highly_likely[l] = 1;
            ++result.count;
        }
    }
    if (log_v.empty()) {
        result.vulnerability = 0.0;
        result.empty_sequence_warning = true;
    } else {
        result.vulnerability =
            static_cast<double>(result.count) / static_cast<double>(log_v.size());
    }
    return result;
}

} // namespace secalloc
