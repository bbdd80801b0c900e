#pragma once

// Brute-force checks of the closed forms the simulator relies on.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kcekqs/analysis.hpp"
#include "kcekqs/qudit.hpp"

namespace kcekqs::verify {

struct VerifyOptions {
  std::size_t max_dim = 8;
  std::size_t max_space = 256;  // largest d^n handled by dense checks
  bool inject_fault = false;    // test hook: perturb w(n, d) by one
  std::uint64_t seed = 20240611;
  std::size_t haar_samples = 100000;
};

struct CheckResult {
  std::string name;
  std::string params;
  bool pass = false;
  double error = 0.0;
  double tolerance = 0.0;
};

namespace detail {

inline double w_checked(std::size_t n, std::size_t d, const VerifyOptions& o) {
  return static_cast<double>(qudit::w(n, d)) + (o.inject_fault ? 1.0 : 0.0);
}

inline std::string nd(std::size_t n, std::size_t d) {
  return "n=" + std::to_string(n) + " d=" + std::to_string(d);
}

// Pairs (n, d) with n >= 1, 2 <= d <= max_dim and d^n <= max_space.
inline std::vector<std::pair<std::size_t, std::size_t>> small_spaces(const VerifyOptions& o, std::size_t min_n = 1) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t d = 2; d <= o.max_dim; ++d) {
    std::size_t size = 1;
    for (std::size_t n = 1;; ++n) {
      size *= d;
      if (size > o.max_space) break;
      if (n >= min_n) out.emplace_back(n, d);
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<CheckResult> check_sym_projectors(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  for (auto [n, d] : detail::small_spaces(o)) {
    const auto p = qudit::sym_projector(n, d, o.max_space);
    const double trace_err = std::abs(p.trace() - detail::w_checked(n, d, o));
    const double err = std::max({trace_err, p.idempotency_error(), p.hermiticity_error()});
    out.push_back({"sym-projector", detail::nd(n, d), err <= 1e-10, err, 1e-10});
  }
  return out;
}

/// P(Pi_S) on phi^{(x)N} (x) I/d against w(N+1, d) / (w(N, d) d).
inline std::vector<CheckResult> check_sym_outcome(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(o.seed);
  for (auto [n, d] : detail::small_spaces(o)) {
    const std::size_t N = n - 1;
    const auto phi = qudit::haar_random(d, rng);
    std::vector<qudit::Factor> factors(N, phi);
    factors.emplace_back(qudit::MaximallyMixed{});
    const double got = qudit::sym_outcome_probability(factors, d, o.max_space);
    const double want = detail::w_checked(N + 1, d, o) / (detail::w_checked(N, d, o) * static_cast<double>(d));
    const double err = std::abs(got - want);
    out.push_back({"sym-outcome", "N=" + std::to_string(N) + " d=" + std::to_string(d), err <= 1e-10, err, 1e-10});
  }
  return out;
}

/// w(N+1, d) / (w(N, d) d) == 1/(N+1) + N/(d(N+1)) over a grid.
inline CheckResult check_closed_form_identity(const VerifyOptions& o) {
  double worst = 0.0;
  const std::size_t dmax = std::min<std::size_t>(50, std::max<std::size_t>(o.max_dim, 2));
  for (std::size_t d = 2; d <= dmax; ++d) {
    for (std::size_t N = 0; N <= 50; ++N) {
      const double ratio = analysis::a2b_soundness_wratio(N, d) +
                           (o.inject_fault ? 1.0 / (static_cast<double>(d) * static_cast<double>(qudit::w(N, d))) : 0.0);
      worst = std::max(worst, std::abs(ratio - analysis::a2b_soundness(N, d)));
    }
  }
  return {"closed-form-identity", "N<=50 d<=" + std::to_string(dmax), worst <= 1e-12, worst, 1e-12};
}

/// Honest B-to-A rejection by enumerating every decoy detection pattern and
/// every q-subset of the detected labels.
inline double eps_c_b2a_enumerated(std::size_t N, std::size_t d, std::size_t q) {
  const double p = 1.0 / static_cast<double>(d);
  double total = 0.0;
  for (std::uint32_t pattern = 0; pattern < (1u << N); ++pattern) {
    const auto x = static_cast<std::size_t>(std::popcount(pattern));
    const double prob = std::pow(p, static_cast<double>(x)) * std::pow(1.0 - p, static_cast<double>(N - x));
    const std::size_t detected = x + 1;  // Q_B always passes; it is element 0
    if (detected <= q) continue;
    std::uint64_t subsets = 0;
    std::uint64_t hits = 0;
    for (std::uint32_t s = 0; s < (1u << detected); ++s) {
      if (static_cast<std::size_t>(std::popcount(s)) != q) continue;
      ++subsets;
      if (s & 1u) ++hits;
    }
    total += prob * (1.0 - static_cast<double>(hits) / static_cast<double>(subsets));
  }
  return total;
}

inline std::vector<CheckResult> check_eps_c(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  for (std::size_t d = 2; d <= std::min<std::size_t>(o.max_dim, 4); ++d) {
    double worst = 0.0;
    for (std::size_t N = 0; N <= 8; ++N) {
      for (std::size_t q = 1; q <= N + 1; ++q) {
        double got = analysis::eps_c_b2a_exact(N, d, q);
        if (o.inject_fault && q < N + 1) got *= 1.5;
        worst = std::max(worst, std::abs(got - eps_c_b2a_enumerated(N, d, q)));
      }
    }
    out.push_back({"eps-c-enumeration", "N<=8 d=" + std::to_string(d), worst <= 1e-12, worst, 1e-12});
  }
  return out;
}

/// First two moments of |<0|psi>|^2 under Haar sampling: 1/d and 2/(d(d+1)).
inline std::vector<CheckResult> check_haar_moments(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(o.seed + 1);
  for (std::size_t d = 2; d <= std::min<std::size_t>(o.max_dim, 6); ++d) {
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < o.haar_samples; ++i) {
      const double p = std::norm(qudit::haar_random(d, rng)[0]);
      s1 += p;
      s2 += p * p;
      s4 += p * p * p * p;
    }
    const double n = static_cast<double>(o.haar_samples);
    const double dd = static_cast<double>(d);
    const double m1 = s1 / n, m2 = s2 / n;
    const double se1 = std::sqrt(std::max(0.0, m2 - m1 * m1) / n);
    const double se2 = std::sqrt(std::max(0.0, s4 / n - m2 * m2) / n);
    const double z1 = std::abs(m1 - 1.0 / dd) / se1;
    const double z2 = std::abs(m2 - 2.0 / (dd * (dd + 1.0))) / se2;
    const double z = std::max(z1, z2);
    out.push_back({"haar-moments", "d=" + std::to_string(d), z <= 5.0, z, 5.0});
  }
  return out;
}

inline std::vector<CheckResult> run_all(const VerifyOptions& o) {
  std::vector<CheckResult> all;
  auto append = [&](std::vector<CheckResult> v) { all.insert(all.end(), v.begin(), v.end()); };
  append(check_sym_projectors(o));
  append(check_sym_outcome(o));
  all.push_back(check_closed_form_identity(o));
  append(check_eps_c(o));
  append(check_haar_moments(o));
  return all;
}

inline bool all_pass(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

}  // namespace kcekqs::verify
