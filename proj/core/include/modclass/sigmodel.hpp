#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modclass/numerics.hpp"

namespace modclass {

enum class ModulationId { BPSK, QPSK, PSK8, QAM16, PSK16 };

std::string_view to_string(ModulationId id) noexcept;

/// Accepts the canonical tokens (QPSK, PSK8, QAM16, PSK16, BPSK) and the
/// common spellings 8-PSK, 8PSK, 16-QAM, 16QAM, 16-PSK, 16PSK (case-insensitive).
ModulationId parse_modulation(std::string_view name);

/// Unit-average-power symbol alphabet. PSK alphabets sit at angles 2 pi i / M,
/// QPSK at (+-1 +-j)/sqrt(2), 16-QAM on the Gray-mapped {+-1, +-3}^2 grid / sqrt(10).
struct Constellation {
  ModulationId id;
  std::vector<cplx> points;

  std::string_view name() const noexcept { return to_string(id); }
  int size() const noexcept { return static_cast<int>(points.size()); }
};

Constellation build_constellation(ModulationId id);
Constellation build_constellation(std::string_view name);

/// One (point, constellation) pair of the candidate space. A point shared by
/// several constellations appears once per constellation.
struct Candidate {
  cplx point;
  double power;  // |point|^2
  int label;     // index of the owning constellation in the pool
};

class ModulationPool {
 public:
  ModulationPool() = default;
  explicit ModulationPool(std::vector<Constellation> constellations);

  static ModulationPool from_ids(std::span<const ModulationId> ids);

  int size() const noexcept { return static_cast<int>(constellations_.size()); }
  const Constellation& operator[](int i) const { return constellations_.at(i); }
  const std::vector<Constellation>& constellations() const noexcept { return constellations_; }
  std::optional<int> index_of(ModulationId id) const noexcept;

  /// Candidates grouped by label in pool order; M_A = candidates().size().
  const std::vector<Candidate>& candidates() const noexcept { return candidates_; }
  int total_states() const noexcept { return static_cast<int>(candidates_.size()); }
  int first_candidate(int label) const { return offsets_.at(label); }

  std::vector<std::string> names() const;

 private:
  std::vector<Constellation> constellations_;
  std::vector<Candidate> candidates_;
  std::vector<int> offsets_;
};

/// Pool of the default experiments: QPSK, 8-PSK, 16-QAM.
ModulationPool default_pool();
/// Default pool extended with 16-PSK.
ModulationPool extended_pool();

struct Scenario {
  int N = 128;      // subcarriers
  int K = 2;        // OFDM symbols per coherence frame
  int Mt = 2;
  int Mr = 2;
  int L = 5;        // true tap count
  int L_hat = 5;    // tap count assumed by the classifier
  std::vector<double> tap_powers_db{0.0, -4.2, -11.5, -17.6, -21.5};
  double snr_db = 10.0;
  ModulationPool pool = default_pool();
  ModulationId true_modulation = ModulationId::QPSK;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Dense complex array indexed (n, k, m) with the antenna index fastest.
class Grid3 {
 public:
  Grid3() = default;
  Grid3(int n, int k, int m) : n_(n), k_(k), m_(m), data_(static_cast<std::size_t>(n) * k * m) {}

  int subcarriers() const noexcept { return n_; }
  int frames() const noexcept { return k_; }
  int antennas() const noexcept { return m_; }

  cplx& operator()(int n, int k, int m) { return data_[index(n, k, m)]; }
  cplx operator()(int n, int k, int m) const { return data_[index(n, k, m)]; }

  std::span<cplx> at(int n, int k) { return {data_.data() + index(n, k, 0), std::size_t(m_)}; }
  std::span<const cplx> at(int n, int k) const {
    return {data_.data() + index(n, k, 0), std::size_t(m_)};
  }

  const std::vector<cplx>& data() const noexcept { return data_; }
  std::vector<cplx>& data() noexcept { return data_; }

  bool operator==(const Grid3&) const = default;

 private:
  std::size_t index(int n, int k, int m) const noexcept {
    return (static_cast<std::size_t>(k) * n_ + n) * m_ + m;
  }

  int n_ = 0;
  int k_ = 0;
  int m_ = 0;
  std::vector<cplx> data_;
};

using TransmitGrid = Grid3;  // s[n, k, mt]
using ReceivedGrid = Grid3;  // y[n, k, mr]

/// Index of the (mt, mr) link in per-link arrays.
inline int link_index(int mt, int mr, int Mt) noexcept { return mr * Mt + mt; }

struct ChannelRealization {
  int Mt = 0;
  int Mr = 0;
  std::vector<CVector> taps;  // per link, L entries
  std::vector<CVector> freq;  // per link, W * taps (N entries)

  static ChannelRealization from_taps(std::vector<CVector> taps, int Mt, int Mr,
                                      const DftSubmatrix& w);

  /// Mr x Mt frequency response at subcarrier n.
  CMatrix response(int n) const;
};

double sigma2_from_snr(double snr_db, int Mt);

/// dB profile converted to linear powers summing to one.
std::vector<double> normalized_tap_powers(std::span<const double> tap_powers_db);

ChannelRealization draw_channel(const Scenario& scenario, RandomStream& rng);

/// y[n, k] = H[n] s[n, k] + z[n, k] with z ~ CN(0, sigma2 I); sigma2 may be zero.
ReceivedGrid propagate(const TransmitGrid& tx, const ChannelRealization& channel, double sigma2,
                       RandomStream& rng);

struct Synthesis {
  TransmitGrid tx;
  ChannelRealization channel;
  double sigma2 = 0.0;
  ReceivedGrid rx;
};

/// Draws channel, then symbols uniform on the true constellation, then noise.
Synthesis synthesize(const Scenario& scenario, RandomStream& rng);

/// ln CN(y; H s, sigma2 I) for one subcarrier/OFDM symbol.
double subcarrier_loglik(std::span<const cplx> y, std::span<const cplx> s, const CMatrix& h,
                         double sigma2);

}  // namespace modclass
