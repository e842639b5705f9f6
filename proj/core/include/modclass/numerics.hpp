#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace modclass {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Splittable 64-bit seed mixing (splitmix64 finalizer over parent and index).
/// Child streams derived from distinct (parent, index) pairs never share state.
std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// Seeded random source. The engine is mt19937_64, whose output sequence is fixed
/// by the C++ standard; every variate is generated here rather than through the
/// implementation-defined <random> distributions, so streams replay identically
/// across standard libraries.
///
/// A stream is owned by exactly one chain or trial and must not be shared
/// between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream keyed on (seed, index).
  RandomStream child(std::uint64_t index) const { return RandomStream(mix_seed(seed_, index)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal.
  double normal();

  /// Circularly-symmetric complex normal CN(0, 1).
  cplx complex_normal();

  /// Gamma(shape, 1) variate.
  double gamma(double shape);

  /// log of a Gamma(shape, 1) variate. Stays finite for shapes far below 1,
  /// where the variate itself underflows.
  double log_gamma_variate(double shape);

  /// Index drawn with probability weights[i] / total. Weights must be nonnegative.
  std::size_t categorical(std::span<const double> weights, double total);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// First L columns of the size-N DFT matrix: entry(n, l) = exp(-j 2 pi n l / N),
/// no 1/sqrt(N) scaling. Columns are orthogonal with squared norm N.
class DftSubmatrix {
 public:
  DftSubmatrix() = default;
  DftSubmatrix(int n_subcarriers, int n_taps);

  int subcarriers() const noexcept { return n_; }
  int taps() const noexcept { return l_; }
  cplx entry(int n, int l) const { return w_(n, l); }
  const CMatrix& matrix() const noexcept { return w_; }

  /// W^H diag(weights) W for real nonnegative per-subcarrier weights (L x L).
  CMatrix weighted_gram(std::span<const double> weights) const;

 private:
  int n_ = 0;
  int l_ = 0;
  CMatrix w_;
};

DftSubmatrix dft_submatrix(int n_subcarriers, int n_taps);

std::vector<double> sample_dirichlet(std::span<const double> params, RandomStream& rng);

/// Draw from CN(mean, cov). cov must be Hermitian PSD; a Cholesky factor is used
/// when it exists, otherwise a diagonal jitter of 1e-12 * trace / d, otherwise a
/// clamped eigendecomposition.
CVector sample_complex_gaussian(const CVector& mean, const CMatrix& cov, RandomStream& rng);

/// Draw from CN(mean, precision^{-1}) given the Hermitian positive definite precision.
CVector sample_complex_gaussian_precision(const CVector& mean, const CMatrix& precision,
                                          RandomStream& rng);

/// Inverse-gamma IG(shape, scale): density proportional to z^(-shape-1) exp(-scale / z).
double sample_inverse_gamma(double shape, double scale, RandomStream& rng);

/// psi(x) for x > 0.
double digamma(double x);

/// Shannon entropy in nats; zero entries contribute nothing.
double shannon_entropy(std::span<const double> p);

}  // namespace modclass
