#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "kcekqs/errors.hpp"
#include "kcekqs/qudit.hpp"

namespace kcekqs::estimation {

using qudit::PureState;

struct EstimationResult {
  PureState guess;
  double achieved_fsq;  // fidelity_sq(guess, true state)
};

inline constexpr std::uint64_t kRejectionIterationCap = 10'000'000;

/// Optimal mean squared fidelity of a state estimate built from `copies`
/// copies of a Haar-random qudit of dimension d: (m + 1) / (m + d).
inline double mean_estimation_fsq(std::size_t copies, std::size_t d) {
  if (d < 2) throw InvalidDimension("mean_estimation_fsq needs d >= 2");
  return static_cast<double>(copies + 1) / static_cast<double>(copies + d);
}

/// Draws a guess from the optimal covariant measurement on `copies` copies
/// of eta: guess density proportional to |<guess|eta>|^{2m} over Haar
/// measure, realized by rejection sampling.
template <class Rng>
EstimationResult covariant_estimate(const PureState& eta, std::size_t copies, Rng& rng,
                                    std::uint64_t iteration_cap = kRejectionIterationCap) {
  if (copies == 0) throw InvalidArgument("covariant_estimate needs at least one copy");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::uint64_t it = 0; it < iteration_cap; ++it) {
    PureState phi = qudit::haar_random(eta.dim(), rng);
    const double f = qudit::fidelity_sq(phi, eta);
    if (unif(rng) < std::pow(f, static_cast<double>(copies))) {
      return {std::move(phi), f};
    }
  }
  throw SamplingError("covariant_estimate: no acceptance within " +
                      std::to_string(iteration_cap) + " iterations");
}

/// Covariant measurement on an arbitrary n-qudit state `joint` (local
/// dimension d): accept a Haar phi with probability |<phi^{(x)n}|joint>|^2.
/// For joint = eta^{(x)n} this is covariant_estimate(eta, n).
template <class Rng>
EstimationResult covariant_estimate_joint(const PureState& joint, std::size_t n, std::size_t d,
                                          const PureState& truth, Rng& rng,
                                          std::uint64_t iteration_cap = kRejectionIterationCap) {
  if (n == 0) throw InvalidArgument("covariant_estimate_joint needs n >= 1");
  std::size_t expected = 1;
  for (std::size_t i = 0; i < n && expected <= joint.dim(); ++i) expected *= d;
  if (expected != joint.dim()) throw DimensionMismatch("joint state is not n qudits of dimension d");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto dd = static_cast<Eigen::Index>(d);
  for (std::uint64_t it = 0; it < iteration_cap; ++it) {
    PureState phi = qudit::haar_random(d, rng);
    // contract conj(phi) into one factor at a time
    qudit::Vector rest = joint.amplitudes();
    while (rest.size() > 1) {
      const Eigen::Index cols = rest.size() / dd;
      Eigen::Map<const qudit::Matrix> m(rest.data(), cols, dd);
      qudit::Vector next = m * phi.amplitudes().conjugate();
      rest = std::move(next);
    }
    const double accept = qudit::clamp_probability(std::norm(rest[0]));
    if (unif(rng) < accept) {
      const double f = qudit::fidelity_sq(phi, truth);
      return {std::move(phi), f};
    }
  }
  throw SamplingError("covariant_estimate_joint: no acceptance within " +
                      std::to_string(iteration_cap) + " iterations");
}

/// Single-copy strategy: measure eta in the computational basis and guess
/// the basis vector obtained. Haar-averaged mean F^2 is 2/(d+1).
template <class Rng>
EstimationResult basis_measure_guess(const PureState& eta, Rng& rng) {
  const std::size_t k = qudit::measure_basis(eta, rng);
  PureState guess = PureState::basis(eta.dim(), k);
  const double f = qudit::fidelity_sq(guess, eta);
  return {std::move(guess), f};
}

}  // namespace kcekqs::estimation
