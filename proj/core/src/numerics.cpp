#include "modclass/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "modclass/errors.hpp"

namespace modclass {

std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(parent) ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomStream::uniform() {
  // 53 random mantissa bits, shifted by half an ulp to exclude 0.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

cplx RandomStream::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

double RandomStream::log_gamma_variate(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma shape must be positive and finite");
  }
  // Marsaglia-Tsang; shapes below 1 are boosted by one and corrected with U^(1/shape).
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(uniform()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

double RandomStream::gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

std::size_t RandomStream::categorical(std::span<const double> weights, double total) {
  if (weights.empty()) throw DimensionError("categorical draw over an empty support");
  const double target = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  // Rounding can leave target marginally above the running sum; take the last
  // index with positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

DftSubmatrix::DftSubmatrix(int n_subcarriers, int n_taps) : n_(n_subcarriers), l_(n_taps) {
  if (n_subcarriers < 1 || n_taps < 1) {
    throw DimensionError("DFT submatrix needs N >= 1 and L >= 1");
  }
  if (n_taps > n_subcarriers) {
    throw DimensionError("DFT submatrix needs L <= N (got L=" + std::to_string(n_taps) +
                         ", N=" + std::to_string(n_subcarriers) + ")");
  }
  w_.resize(n_, l_);
  for (int n = 0; n < n_; ++n) {
    for (int l = 0; l < l_; ++l) {
      // Reduce n*l mod N first so large products keep full phase accuracy.
      const auto k = static_cast<long long>(n) * l % n_;
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) / n_;
      w_(n, l) = std::polar(1.0, phase);
    }
  }
}

CMatrix DftSubmatrix::weighted_gram(std::span<const double> weights) const {
  if (static_cast<int>(weights.size()) != n_) {
    throw DimensionError("weighted_gram: expected one weight per subcarrier");
  }
  // Entry (l, l') depends only on l' - l: t_d = sum_n w_n exp(-j 2 pi n d / N).
  std::vector<cplx> lag(l_, cplx{0.0, 0.0});
  for (int d = 0; d < l_; ++d) {
    cplx acc{0.0, 0.0};
    for (int n = 0; n < n_; ++n) acc += weights[n] * w_(n, d);
    lag[d] = acc;
  }
  CMatrix g(l_, l_);
  for (int l = 0; l < l_; ++l) {
    for (int lp = 0; lp < l_; ++lp) {
      g(l, lp) = lp >= l ? lag[lp - l] : std::conj(lag[l - lp]);
    }
  }
  return g;
}

DftSubmatrix dft_submatrix(int n_subcarriers, int n_taps) {
  return DftSubmatrix(n_subcarriers, n_taps);
}

std::vector<double> sample_dirichlet(std::span<const double> params, RandomStream& rng) {
  if (params.empty()) throw DimensionError("Dirichlet needs at least one parameter");
  std::vector<double> logs(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] > 0.0) || !std::isfinite(params[i])) {
      throw DomainError("Dirichlet parameters must be positive and finite");
    }
    logs[i] = rng.log_gamma_variate(params[i]);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (auto& v : logs) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : logs) v /= total;
  return logs;
}

namespace {

bool is_hermitian(const CMatrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

CVector standard_complex_normal(Eigen::Index d, RandomStream& rng) {
  CVector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.complex_normal();
  return z;
}

}  // namespace

CVector sample_complex_gaussian(const CVector& mean, const CMatrix& cov, RandomStream& rng) {
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d) {
    throw DimensionError("complex Gaussian: covariance shape does not match mean");
  }
  if (d == 0) return mean;
  if (!cov.allFinite() || !is_hermitian(cov)) {
    throw NumericalError("complex Gaussian: covariance is not finite Hermitian");
  }

  Eigen::LLT<CMatrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    return mean + llt.matrixL() * standard_complex_normal(d, rng);
  }
  const double trace = cov.trace().real();
  if (trace > 0.0) {
    CMatrix jittered = cov;
    jittered.diagonal().array() += 1e-12 * trace / static_cast<double>(d);
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) {
      return mean + llt.matrixL() * standard_complex_normal(d, rng);
    }
  }

  // Singular PSD (including cov == 0): symmetric square root with clamped spectrum.
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("complex Gaussian: eigendecomposition failed");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double top = std::max(0.0, lambda.maxCoeff());
  if (lambda.minCoeff() < -1e-9 * std::max(top, 1e-300) && lambda.minCoeff() < -1e-12) {
    throw NumericalError("complex Gaussian: covariance is indefinite");
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const CVector z = standard_complex_normal(d, rng);
  return mean + eig.eigenvectors() * (lambda.cast<cplx>().asDiagonal() *
                                      (eig.eigenvectors().adjoint() * z));
}

CVector sample_complex_gaussian_precision(const CVector& mean, const CMatrix& precision,
                                          RandomStream& rng) {
  const Eigen::Index d = mean.size();
  if (precision.rows() != d || precision.cols() != d) {
    throw DimensionError("complex Gaussian: precision shape does not match mean");
  }
  if (d == 0) return mean;
  Eigen::LLT<CMatrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    CMatrix jittered = precision;
    jittered.diagonal().array() += 1e-12 * precision.trace().real() / static_cast<double>(d);
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("complex Gaussian: precision matrix is not positive definite");
    }
  }
  // precision = U^H U, so U^{-1} z has covariance precision^{-1}.
  const CVector z = standard_complex_normal(d, rng);
  return mean + llt.matrixU().solve(z);
}

double sample_inverse_gamma(double shape, double scale, RandomStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    throw DomainError("inverse gamma needs positive finite shape and scale");
  }
  constexpr double kLogMax = 700.0;
  const double log_value = std::log(scale) - rng.log_gamma_variate(shape);
  return std::exp(std::clamp(log_value, -kLogMax, kLogMax));
}

double digamma(double x) {
  if (!(x > 0.0) || std::isnan(x)) throw DomainError("digamma defined here for x > 0 only");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series with Bernoulli coefficients B_2k / (2k).
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return result + std::log(x) - 0.5 * inv - series;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace modclass
