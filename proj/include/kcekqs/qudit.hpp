#pragma once

// Dense linear algebra for small qudit systems.
//
// Tensor products use the Kronecker convention: factor 0 is the most
// significant digit of the flat index, so |i_0 i_1 ... i_{n-1}> sits at
// i_0 d^{n-1} + ... + i_{n-1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kcekqs/errors.hpp"

namespace kcekqs::qudit {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kProjectorTolerance = 1e-10;
inline constexpr double kProbabilitySlack = 1e-12;
inline constexpr std::size_t kDefaultSizeCap = 4096;

// Clips rounding excursions of at most kProbabilitySlack outside [0,1].
inline double clamp_probability(double p) {
  if (p >= 0.0 && p <= 1.0) return p;
  if (p < 0.0 && p >= -kProbabilitySlack) return 0.0;
  if (p > 1.0 && p <= 1.0 + kProbabilitySlack) return 1.0;
  throw NumericalError("probability " + std::to_string(p) + " outside [0,1]");
}

// d^n, or ResourceError when it exceeds `cap`.
inline std::size_t checked_power(std::size_t d, std::size_t n, std::size_t cap) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (d != 0 && result > cap / d) {
      throw ResourceError("dimension " + std::to_string(d) + "^" + std::to_string(n) +
                          " exceeds size cap " + std::to_string(cap));
    }
    result *= d;
  }
  if (result > cap) {
    throw ResourceError("dimension " + std::to_string(result) + " exceeds size cap " +
                        std::to_string(cap));
  }
  return result;
}

/// A unit-norm vector of amplitudes, optionally declared as a tensor
/// product of `factors` equal-dimension subsystems.
class PureState {
 public:
  explicit PureState(Vector amplitudes, std::size_t factors = 1)
      : amps_(std::move(amplitudes)), factors_(factors) {
    if (amps_.size() == 0) throw InvalidDimension("pure state of dimension 0");
    if (factors_ == 0) throw InvalidArgument("pure state with zero factors");
    const double norm_sq = amps_.squaredNorm();
    if (std::abs(norm_sq - 1.0) > kNormTolerance) {
      throw NumericalError("state norm^2 " + std::to_string(norm_sq) + " is not 1");
    }
    local_dim_ = infer_local_dim();
  }

  static PureState normalized(Vector raw, std::size_t factors = 1) {
    const double norm = raw.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NumericalError("cannot normalize a zero or non-finite vector");
    }
    raw /= norm;
    return PureState(std::move(raw), factors);
  }

  static PureState basis(std::size_t dim, std::size_t index) {
    if (dim == 0) throw InvalidDimension("basis state of dimension 0");
    if (index >= dim) throw InvalidArgument("basis index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return PureState(std::move(v));
  }

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  std::size_t factors() const { return factors_; }
  // Dimension of one tensor factor.
  std::size_t local_dim() const { return local_dim_; }
  const Vector& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

 private:
  std::size_t infer_local_dim() const {
    const std::size_t total = dim();
    if (factors_ == 1) return total;
    auto guess = static_cast<std::size_t>(
        std::llround(std::pow(static_cast<double>(total), 1.0 / static_cast<double>(factors_))));
    for (std::size_t cand : {guess - 1, guess, guess + 1}) {
      if (cand < 1) continue;
      std::size_t p = 1;
      for (std::size_t i = 0; i < factors_ && p <= total; ++i) p *= cand;
      if (p == total) return cand;
    }
    throw InvalidDimension("dimension " + std::to_string(total) + " is not a " +
                           std::to_string(factors_) + "-th power");
  }

  Vector amps_;
  std::size_t factors_;
  std::size_t local_dim_ = 0;
};

/// Square matrix equal to its conjugate transpose.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw DimensionMismatch("operator is not square");
    if (m_.rows() == 0) throw InvalidDimension("operator of dimension 0");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
      throw InvalidArgument("operator is not Hermitian");
    }
  }

  static HermitianOperator projector_onto(const PureState& s) {
    return HermitianOperator(s.amplitudes() * s.amplitudes().adjoint());
  }

  // Orthogonal projector onto the span of an orthonormal family.
  static HermitianOperator projector_onto(std::span<const PureState> family) {
    if (family.empty()) throw InvalidArgument("empty family");
    const auto n = static_cast<Eigen::Index>(family.front().dim());
    Matrix p = Matrix::Zero(n, n);
    for (const auto& s : family) {
      if (static_cast<Eigen::Index>(s.dim()) != n) throw DimensionMismatch("family dims differ");
      p += s.amplitudes() * s.amplitudes().adjoint();
    }
    return HermitianOperator(std::move(p));
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }

  double idempotency_error() const { return (m_ * m_ - m_).cwiseAbs().maxCoeff(); }
  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
  bool is_projector(double tol = kProjectorTolerance) const { return idempotency_error() < tol; }

 private:
  Matrix m_;
};

struct MeasurementOutcome {
  int index;
  PureState post_state;
};

// Marker for a maximally mixed factor I/d.
struct MaximallyMixed {};

using Factor = std::variant<PureState, MaximallyMixed>;

/// Haar-random pure state: normalized vector of i.i.d. standard complex
/// Gaussians.
template <class Rng>
PureState haar_random(std::size_t d, Rng& rng) {
  if (d == 0) throw InvalidDimension("haar_random with d = 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  for (;;) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v[i] = Complex(re, im);
    }
    if (v.norm() > 0.0) break;
  }
  return PureState::normalized(std::move(v));
}

/// Columns form a Haar-random d x d unitary (QR of a Ginibre matrix with
/// the phase correction on R's diagonal).
template <class Rng>
Matrix haar_unitary(std::size_t d, Rng& rng) {
  if (d == 0) throw InvalidDimension("haar_unitary with d = 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(d);
  Matrix z(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(r, c) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex diag = r(i, i);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(i) *= diag / mag;
  }
  return q;
}

/// Appends `count` Haar-random unit vectors, each orthogonal to everything
/// already in `family` (Gram-Schmidt applied twice).
template <class Rng>
void extend_orthonormal(std::vector<Vector>& family, std::size_t count, std::size_t d, Rng& rng) {
  if (family.size() + count > d) throw InvalidArgument("cannot extend beyond the space dimension");
  for (std::size_t added = 0; added < count;) {
    Vector v = haar_random(d, rng).amplitudes();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& f : family) v -= f * f.dot(v);
    }
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    family.push_back(v / norm);
    ++added;
  }
}

/// Rotates an orthonormal family by a Haar-random unitary on its span.
template <class Rng>
std::vector<Vector> rotate_within_span(const std::vector<Vector>& family, Rng& rng) {
  if (family.size() <= 1) {
    std::vector<Vector> out = family;
    if (!out.empty()) {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      out.front() *= std::polar(1.0, angle(rng));
    }
    return out;
  }
  const Matrix u = haar_unitary(family.size(), rng);
  std::vector<Vector> out(family.size(), Vector::Zero(family.front().size()));
  for (std::size_t j = 0; j < family.size(); ++j) {
    for (std::size_t i = 0; i < family.size(); ++i) {
      out[j] += u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * family[i];
    }
  }
  return out;
}

/// |<a|b>|^2.
inline double fidelity_sq(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("fidelity_sq of dims " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  return clamp_probability(std::norm(a.amplitudes().dot(b.amplitudes())));
}

inline PureState tensor_product(const PureState& a, const PureState& b,
                                std::size_t cap = kDefaultSizeCap) {
  if (a.local_dim() != b.local_dim()) throw DimensionMismatch("tensor factors differ in dimension");
  const std::size_t total = a.dim() * b.dim();
  if (total > cap) throw ResourceError("tensor product dimension exceeds size cap");
  Vector out(static_cast<Eigen::Index>(total));
  const auto nb = static_cast<Eigen::Index>(b.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    out.segment(i * nb, nb) = a.amplitudes()[i] * b.amplitudes();
  }
  return PureState::normalized(std::move(out), a.factors() + b.factors());
}

/// n-fold tensor power s^{(x)n}.
inline PureState tensor_power(const PureState& s, std::size_t n, std::size_t cap = kDefaultSizeCap) {
  if (n == 0) throw InvalidArgument("tensor_power with n = 0");
  checked_power(s.dim(), n, cap);
  PureState out = s;
  for (std::size_t i = 1; i < n; ++i) out = tensor_product(out, s, cap);
  return out;
}

/// Tensor product of an ordered list of single-qudit states.
inline PureState tensor_all(std::span<const PureState> states, std::size_t cap = kDefaultSizeCap) {
  if (states.empty()) throw InvalidArgument("tensor of an empty list");
  checked_power(states.front().dim(), states.size(), cap);
  PureState out = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) out = tensor_product(out, states[i], cap);
  return out;
}

/// w(a, b) = C(a + b - 1, a): dimension of the symmetric subspace of a
/// qudits of dimension b. Exact; throws on 64-bit overflow.
inline std::uint64_t w(std::uint64_t a, std::uint64_t b) {
  if (b == 0) throw InvalidArgument("w(a, 0) is undefined");
  const std::uint64_t n = a + b - 1;
  const std::uint64_t k = std::min(a, b - 1);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw ResourceError("w(" + std::to_string(a) + ", " + std::to_string(b) + ") overflows");
    }
  }
  return static_cast<std::uint64_t>(result);
}

/// Floating-point w(a, b) for arguments where the exact value overflows.
inline long double w_real(std::uint64_t a, std::uint64_t b) {
  if (b == 0) throw InvalidArgument("w(a, 0) is undefined");
  const std::uint64_t n = a + b - 1;
  const std::uint64_t k = std::min(a, b - 1);
  long double result = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= static_cast<long double>(n - k + i) / static_cast<long double>(i);
  }
  return result;
}

namespace detail {

inline std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

// Calls fn(source_index, permuted_index) for every basis index of (C^d)^{(x)n}
// and every permutation of the n tensor factors.
template <class Fn>
void for_each_factor_permutation(std::size_t n, std::size_t d, Fn&& fn) {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) dim *= d;
  std::vector<std::size_t> stride(n);
  for (std::size_t k = 0; k < n; ++k) {
    stride[n - 1 - k] = k == 0 ? 1 : stride[n - k] * d;
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> digit(n);
  do {
    std::fill(digit.begin(), digit.end(), 0);
    for (std::size_t idx = 0; idx < dim; ++idx) {
      std::size_t target = 0;
      for (std::size_t k = 0; k < n; ++k) target += digit[perm[k]] * stride[k];
      fn(idx, target);
      // odometer increment, least significant factor last
      for (std::size_t k = n; k-- > 0;) {
        if (++digit[k] < d) break;
        digit[k] = 0;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace detail

/// Pi_S v = (1/n!) sum_pi U_pi v without forming the dense projector. Every
/// basis index in a permutation orbit is reached equally often, so the sum
/// reduces to averaging v over each orbit (indices with the same sorted digits).
inline Vector apply_sym_projector(const Vector& v, std::size_t n, std::size_t d) {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) dim *= d;
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw DimensionMismatch("vector size does not match d^n");
  }
  std::vector<std::size_t> canon(dim);
  std::vector<std::size_t> digit(n);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = 0; k < n; ++k) {
      digit[k] = rest % d;
      rest /= d;
    }
    std::sort(digit.begin(), digit.end());
    std::size_t c = 0;
    for (std::size_t k = 0; k < n; ++k) c = c * d + digit[k];
    canon[idx] = c;
  }
  Vector sum = Vector::Zero(v.size());
  std::vector<std::size_t> count(dim, 0);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    sum[static_cast<Eigen::Index>(canon[idx])] += v[static_cast<Eigen::Index>(idx)];
    ++count[canon[idx]];
  }
  Vector out(v.size());
  for (std::size_t idx = 0; idx < dim; ++idx) {
    out[static_cast<Eigen::Index>(idx)] =
        sum[static_cast<Eigen::Index>(canon[idx])] / static_cast<double>(count[canon[idx]]);
  }
  return out;
}

/// Dense projector onto the symmetric subspace of n qudits of dimension d,
/// built from the explicit permutation-operator sum.
inline HermitianOperator sym_projector(std::size_t n, std::size_t d,
                                       std::size_t cap = kDefaultSizeCap) {
  if (n == 0 || d == 0) throw InvalidDimension("sym_projector needs n, d >= 1");
  const std::size_t dim = checked_power(d, n, cap);
  const auto idim = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(idim, idim);
  const double weight = 1.0 / static_cast<double>(detail::factorial(n));
  detail::for_each_factor_permutation(n, d, [&](std::size_t src, std::size_t dst) {
    p(static_cast<Eigen::Index>(dst), static_cast<Eigen::Index>(src)) += weight;
  });
  return HermitianOperator(p.cast<Complex>());
}

/// Tr(Pi_S rho) for rho a tensor product of pure single-qudit states and
/// maximally mixed factors I/d. Mixed factors are expanded over the
/// computational basis.
inline double sym_outcome_probability(std::span<const Factor> factors, std::size_t d,
                                      std::size_t cap = kDefaultSizeCap) {
  if (d == 0) throw InvalidDimension("d = 0");
  if (factors.empty()) throw InvalidArgument("no factors");
  const std::size_t n = factors.size();
  checked_power(d, n, cap);
  std::vector<std::size_t> mixed_slots;
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto* s = std::get_if<PureState>(&factors[i])) {
      if (s->dim() != d) throw DimensionMismatch("factor dimension differs from d");
    } else {
      mixed_slots.push_back(i);
    }
  }
  std::vector<std::size_t> choice(mixed_slots.size(), 0);
  double total = 0.0;
  std::size_t terms = 0;
  for (;;) {
    std::vector<PureState> product;
    product.reserve(n);
    std::size_t next_mixed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto* s = std::get_if<PureState>(&factors[i])) {
        product.push_back(*s);
      } else {
        product.push_back(PureState::basis(d, choice[next_mixed++]));
      }
    }
    const PureState joint = tensor_all(product, cap);
    total += apply_sym_projector(joint.amplitudes(), n, d).squaredNorm();
    ++terms;
    std::size_t k = 0;
    for (; k < choice.size(); ++k) {
      if (++choice[k] < d) break;
      choice[k] = 0;
    }
    if (k == choice.size()) break;
  }
  return clamp_probability(total / static_cast<double>(terms));
}

/// Two-outcome projective measurement {p, I - p}; outcome 1 is p.
template <class Rng>
MeasurementOutcome measure_binary(const PureState& s, const HermitianOperator& p, Rng& rng) {
  if (s.dim() != p.dim()) throw DimensionMismatch("state and projector dims differ");
  if (!p.is_projector()) throw InvalidArgument("measure_binary requires a projector");
  const Vector projected = p.matrix() * s.amplitudes();
  const double prob = clamp_probability(s.amplitudes().dot(projected).real());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int outcome = unif(rng) < prob ? 1 : 0;
  Vector post = outcome == 1 ? projected : Vector(s.amplitudes() - projected);
  return {outcome, PureState::normalized(std::move(post), s.factors())};
}

/// The binary measurement {Pi_S, I - Pi_S} on an n-qudit state, applied
/// through the permutation sum.
template <class Rng>
MeasurementOutcome measure_symmetric(const PureState& s, std::size_t n, std::size_t d, Rng& rng) {
  const Vector projected = apply_sym_projector(s.amplitudes(), n, d);
  const double prob = clamp_probability(projected.squaredNorm());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int outcome = unif(rng) < prob ? 1 : 0;
  Vector post = outcome == 1 ? projected : Vector(s.amplitudes() - projected);
  return {outcome, PureState::normalized(std::move(post), n)};
}

/// Complete projective measurement in the computational basis.
template <class Rng>
std::size_t measure_basis(const PureState& s, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const double p = std::norm(s[i]);
    if (p <= 0.0) continue;
    cum += p;
    last_nonzero = i;
    if (u < cum) return i;
  }
  return last_nonzero;
}

/// Projective measurement in an arbitrary orthonormal basis (columns given
/// as states); returns the index of the basis element obtained.
template <class Rng>
std::size_t measure_in_basis(const PureState& s, std::span<const PureState> basis, Rng& rng) {
  if (basis.size() != s.dim()) throw DimensionMismatch("basis size differs from dimension");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = fidelity_sq(basis[i], s);
    if (p <= 0.0) continue;
    cum += p;
    last_nonzero = i;
    if (u < cum) return i;
  }
  return last_nonzero;
}

}  // namespace kcekqs::qudit
