#pragma once

// Closed-form values and bounds for each protocol, plus the audit of the
// general soundness/completeness trade-off eps_S / (1 - eps_C) >= 1/d.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "kcekqs/errors.hpp"
#include "kcekqs/protocols.hpp"
#include "kcekqs/qudit.hpp"
#include "kcekqs/stats.hpp"

namespace kcekqs::analysis {

using protocols::ProtocolId;
using protocols::ProtocolParams;

enum class BoundKind { Exact, Lower, Upper };

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::Exact: return "exact";
    case BoundKind::Lower: return "lower";
    case BoundKind::Upper: return "upper";
  }
  return "?";
}

struct FormulaValue {
  double value = 0.0;
  BoundKind kind = BoundKind::Exact;
};

struct ClosedForms {
  std::optional<FormulaValue> eps_C;
  std::optional<FormulaValue> eps_S;
  std::optional<FormulaValue> eps_K;
  std::optional<FormulaValue> eps_M;
  std::optional<FormulaValue> p_abort;
};

/// Binomial(n, p) probability mass at k.
inline double binomial_pmf(std::size_t n, std::size_t k, double p) {
  if (k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double log_c = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
  return std::exp(log_c + kk * std::log(p) + (nn - kk) * std::log1p(-p));
}

/// Honest-Alice rejection probability in B-to-A: a decoy count x ~ Bin(N, 1/d)
/// passes her test alongside Q_B, and a random q-sublist of the x + 1
/// detected labels misses Q_B with probability (x + 1 - q) / (x + 1).
inline double eps_c_b2a_exact(std::size_t N, std::size_t d, std::size_t q) {
  if (d < 2) throw InvalidDimension("d must be at least 2");
  if (q < 1 || q > N + 1) throw InvalidArgument("need 1 <= q <= N + 1");
  const double p = 1.0 / static_cast<double>(d);
  double total = 0.0;
  for (std::size_t x = q; x <= N; ++x) {
    total += binomial_pmf(N, x, p) * static_cast<double>(x + 1 - q) / static_cast<double>(x + 1);
  }
  return total;
}

/// Probability that honest Alice aborts: more than q positives, i.e. at
/// least q decoys detected besides Q_B.
inline double p_abort_b2a_exact(std::size_t N, std::size_t d, std::size_t q) {
  if (d < 2) throw InvalidDimension("d must be at least 2");
  const double p = 1.0 / static_cast<double>(d);
  double total = 0.0;
  for (std::size_t x = q; x <= N; ++x) total += binomial_pmf(N, x, p);
  return total;
}

inline double hoeffding_bound(std::size_t N, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("hoeffding_bound needs epsilon > 0");
  return std::exp(-2.0 * epsilon * epsilon * static_cast<double>(N));
}

/// Acceptance of the best single-phi cheating Alice in A-to-B, as a ratio of
/// symmetric-subspace dimensions.
inline double a2b_soundness_wratio(std::size_t N, std::size_t d) {
  return static_cast<double>(qudit::w_real(N + 1, d) / (qudit::w_real(N, d) * static_cast<long double>(d)));
}

inline double a2b_soundness(std::size_t N, std::size_t d) {
  const double n1 = static_cast<double>(N + 1);
  return 1.0 / n1 + static_cast<double>(N) / (static_cast<double>(d) * n1);
}

inline double eps_m(std::size_t d) { return 2.0 / (static_cast<double>(d) + 1.0); }

inline ClosedForms closed_forms(ProtocolId id, const ProtocolParams& params) {
  params.validate(id, false);
  const std::size_t d = params.d;
  const std::size_t N = params.N;
  const std::size_t q = params.effective_q(id);
  const double dd = static_cast<double>(d);
  const double eps = params.eps_c_target;
  ClosedForms f;
  f.eps_M = FormulaValue{eps_m(d), BoundKind::Exact};
  switch (id) {
    case ProtocolId::Classical1:
    case ProtocolId::Classical2: {
      const double qq = static_cast<double>(q);
      f.eps_C = FormulaValue{eps, BoundKind::Exact};
      f.eps_S = FormulaValue{qq / dd, BoundKind::Exact};
      f.eps_K = FormulaValue{(1.0 - eps) * (1.0 - eps) / qq, BoundKind::Lower};
      break;
    }
    case ProtocolId::QuantumA2B:
      f.eps_C = FormulaValue{0.0, BoundKind::Exact};
      f.eps_S = FormulaValue{a2b_soundness(N, d), BoundKind::Exact};
      f.eps_K = FormulaValue{static_cast<double>(N + 2) / static_cast<double>(N + 1 + d), BoundKind::Exact};
      break;
    case ProtocolId::QuantumB2A:
      f.eps_C = FormulaValue{eps_c_b2a_exact(N, d, q), BoundKind::Exact};
      f.eps_S = FormulaValue{static_cast<double>(q) / static_cast<double>(N + 1), BoundKind::Lower};
      f.eps_K = FormulaValue{4.0 / (dd + 1.0), BoundKind::Upper};
      break;
    case ProtocolId::QuantumB2AAbort: {
      // Without an abort, honest Alice commits to every positive, Q_B included.
      f.eps_C = FormulaValue{0.0, BoundKind::Exact};
      f.eps_S = FormulaValue{static_cast<double>(q) / static_cast<double>(N + 1), BoundKind::Lower};
      f.eps_K = FormulaValue{4.0 / (dd + 1.0), BoundKind::Upper};
      const double slack = N == 0 ? 0.0 : static_cast<double>(q) / static_cast<double>(N) - 1.0 / dd;
      f.p_abort = FormulaValue{slack > 0.0 ? hoeffding_bound(N, slack) : 1.0, BoundKind::Upper};
      break;
    }
  }
  return f;
}

struct AuditResult {
  bool pass = false;
  double ratio = 0.0;  // point estimate eps_S / (1 - eps_C)
  double slack = 0.0;  // ratio with z-standard-error slack, minus 1/d
};

inline AuditResult tradeoff_audit(stats::Estimate eps_s, stats::Estimate eps_c, std::size_t d, double z = 3.0) {
  if (d < 2) throw InvalidDimension("d must be at least 2");
  if (eps_c.value >= 1.0) throw InvalidArgument("eps_C >= 1 leaves the ratio undefined");
  AuditResult r;
  r.ratio = eps_s.value / (1.0 - eps_c.value);
  // Both estimates move z standard errors in the direction that favours the
  // bound. A denominator pushed to zero or below leaves nothing to refute.
  const double num = eps_s.value + z * eps_s.std_err;
  const double den = 1.0 - eps_c.value - z * eps_c.std_err;
  if (den <= 0.0) {
    r.slack = std::numeric_limits<double>::infinity();
    r.pass = true;
    return r;
  }
  r.slack = num / den - 1.0 / static_cast<double>(d);
  r.pass = r.slack >= -1e-12;
  return r;
}

inline AuditResult tradeoff_audit(const stats::TrialStats& eps_s, const stats::TrialStats& eps_c, std::size_t d,
                                  double z = 3.0) {
  return tradeoff_audit(eps_s.as_estimate(), eps_c.as_estimate(), d, z);
}

}  // namespace kcekqs::analysis
