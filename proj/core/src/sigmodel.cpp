#include "modclass/sigmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include "modclass/errors.hpp"

namespace modclass {

std::string_view to_string(ModulationId id) noexcept {
  switch (id) {
    case ModulationId::BPSK: return "BPSK";
    case ModulationId::QPSK: return "QPSK";
    case ModulationId::PSK8: return "PSK8";
    case ModulationId::QAM16: return "QAM16";
    case ModulationId::PSK16: return "PSK16";
  }
  return "?";
}

ModulationId parse_modulation(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_' || std::isspace(static_cast<unsigned char>(c))) continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "BPSK" || key == "2PSK") return ModulationId::BPSK;
  if (key == "QPSK" || key == "4PSK") return ModulationId::QPSK;
  if (key == "PSK8" || key == "8PSK") return ModulationId::PSK8;
  if (key == "QAM16" || key == "16QAM") return ModulationId::QAM16;
  if (key == "PSK16" || key == "16PSK") return ModulationId::PSK16;
  throw ConfigError("unknown modulation '" + std::string(name) + "'");
}

namespace {

std::vector<cplx> psk_points(int order, double offset) {
  std::vector<cplx> pts;
  pts.reserve(order);
  for (int i = 0; i < order; ++i) {
    pts.push_back(std::polar(1.0, offset + 2.0 * std::numbers::pi * i / order));
  }
  return pts;
}

std::vector<cplx> qam16_points() {
  constexpr double kGrayLevel[4] = {-3.0, -1.0, 3.0, 1.0};  // 00, 01, 10, 11
  const double scale = 1.0 / std::sqrt(10.0);
  std::vector<cplx> pts;
  pts.reserve(16);
  for (int bits = 0; bits < 16; ++bits) {
    pts.emplace_back(kGrayLevel[bits >> 2] * scale, kGrayLevel[bits & 3] * scale);
  }
  return pts;
}

}  // namespace

Constellation build_constellation(ModulationId id) {
  switch (id) {
    case ModulationId::BPSK: return {id, psk_points(2, 0.0)};
    case ModulationId::QPSK: return {id, psk_points(4, std::numbers::pi / 4.0)};
    case ModulationId::PSK8: return {id, psk_points(8, 0.0)};
    case ModulationId::QAM16: return {id, qam16_points()};
    case ModulationId::PSK16: return {id, psk_points(16, 0.0)};
  }
  throw ConfigError("unsupported modulation");
}

Constellation build_constellation(std::string_view name) {
  return build_constellation(parse_modulation(name));
}

ModulationPool::ModulationPool(std::vector<Constellation> constellations)
    : constellations_(std::move(constellations)) {
  if (constellations_.empty()) throw ConfigError("modulation pool is empty");
  std::set<ModulationId> seen;
  for (const auto& c : constellations_) {
    if (!seen.insert(c.id).second) {
      throw ConfigError("modulation pool lists " + std::string(c.name()) + " twice");
    }
  }
  for (int label = 0; label < size(); ++label) {
    offsets_.push_back(static_cast<int>(candidates_.size()));
    for (const auto& p : constellations_[label].points) {
      candidates_.push_back({p, std::norm(p), label});
    }
  }
}

ModulationPool ModulationPool::from_ids(std::span<const ModulationId> ids) {
  std::vector<Constellation> cs;
  for (auto id : ids) cs.push_back(build_constellation(id));
  return ModulationPool(std::move(cs));
}

std::optional<int> ModulationPool::index_of(ModulationId id) const noexcept {
  for (int i = 0; i < size(); ++i) {
    if (constellations_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<std::string> ModulationPool::names() const {
  std::vector<std::string> out;
  for (const auto& c : constellations_) out.emplace_back(c.name());
  return out;
}

ModulationPool default_pool() {
  const ModulationId ids[] = {ModulationId::QPSK, ModulationId::PSK8, ModulationId::QAM16};
  return ModulationPool::from_ids(ids);
}

ModulationPool extended_pool() {
  const ModulationId ids[] = {ModulationId::QPSK, ModulationId::PSK8, ModulationId::QAM16,
                              ModulationId::PSK16};
  return ModulationPool::from_ids(ids);
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("scenario: " + what); };
  if (K < 1 || Mt < 1 || Mr < 1) fail("K, Mt and Mr must be at least 1");
  if (L < 1 || L > N) fail("need N >= L >= 1");
  if (L_hat < 1 || L_hat > N) fail("need N >= L_hat >= 1");
  if (static_cast<int>(tap_powers_db.size()) != L) fail("tap_powers_db must have L entries");
  for (double p : tap_powers_db) {
    if (!std::isfinite(p)) fail("tap powers must be finite");
  }
  if (!std::isfinite(snr_db)) fail("snr_db must be finite");
  if (pool.size() == 0) fail("modulation pool is empty");
  if (!pool.index_of(true_modulation)) {
    fail("true modulation " + std::string(to_string(true_modulation)) + " is not in the pool");
  }
}

ChannelRealization ChannelRealization::from_taps(std::vector<CVector> taps, int Mt, int Mr,
                                                 const DftSubmatrix& w) {
  if (static_cast<int>(taps.size()) != Mt * Mr) {
    throw DimensionError("channel: expected Mt * Mr tap vectors");
  }
  ChannelRealization ch;
  ch.Mt = Mt;
  ch.Mr = Mr;
  ch.freq.reserve(taps.size());
  for (const auto& h : taps) {
    if (h.size() != w.taps()) throw DimensionError("channel: tap count does not match W");
    ch.freq.push_back(w.matrix() * h);
  }
  ch.taps = std::move(taps);
  return ch;
}

CMatrix ChannelRealization::response(int n) const {
  CMatrix h(Mr, Mt);
  for (int mr = 0; mr < Mr; ++mr) {
    for (int mt = 0; mt < Mt; ++mt) h(mr, mt) = freq[link_index(mt, mr, Mt)](n);
  }
  return h;
}

double sigma2_from_snr(double snr_db, int Mt) {
  if (Mt < 1) throw DomainError("Mt must be at least 1");
  return static_cast<double>(Mt) / std::pow(10.0, snr_db / 10.0);
}

std::vector<double> normalized_tap_powers(std::span<const double> tap_powers_db) {
  std::vector<double> p;
  double total = 0.0;
  for (double db : tap_powers_db) {
    p.push_back(std::pow(10.0, db / 10.0));
    total += p.back();
  }
  for (auto& v : p) v /= total;
  return p;
}

ChannelRealization draw_channel(const Scenario& scenario, RandomStream& rng) {
  scenario.validate();
  const auto powers = normalized_tap_powers(scenario.tap_powers_db);
  std::vector<CVector> taps;
  taps.reserve(static_cast<std::size_t>(scenario.Mt) * scenario.Mr);
  for (int mr = 0; mr < scenario.Mr; ++mr) {
    for (int mt = 0; mt < scenario.Mt; ++mt) {
      CVector h(scenario.L);
      for (int l = 0; l < scenario.L; ++l) h(l) = std::sqrt(powers[l]) * rng.complex_normal();
      taps.push_back(std::move(h));
    }
  }
  return ChannelRealization::from_taps(std::move(taps), scenario.Mt, scenario.Mr,
                                       DftSubmatrix(scenario.N, scenario.L));
}

ReceivedGrid propagate(const TransmitGrid& tx, const ChannelRealization& channel, double sigma2,
                       RandomStream& rng) {
  if (!(sigma2 >= 0.0)) throw DomainError("noise variance must be nonnegative");
  if (tx.antennas() != channel.Mt) throw DimensionError("propagate: Mt mismatch");
  const int N = tx.subcarriers();
  const int K = tx.frames();
  ReceivedGrid rx(N, K, channel.Mr);
  const double noise_std = std::sqrt(sigma2);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      const auto s = tx.at(n, k);
      for (int mr = 0; mr < channel.Mr; ++mr) {
        cplx acc{0.0, 0.0};
        for (int mt = 0; mt < channel.Mt; ++mt) {
          acc += channel.freq[link_index(mt, mr, channel.Mt)](n) * s[mt];
        }
        if (sigma2 > 0.0) acc += noise_std * rng.complex_normal();
        rx(n, k, mr) = acc;
      }
    }
  }
  return rx;
}

Synthesis synthesize(const Scenario& scenario, RandomStream& rng) {
  Synthesis out;
  out.channel = draw_channel(scenario, rng);
  const auto constellation = build_constellation(scenario.true_modulation);
  out.tx = TransmitGrid(scenario.N, scenario.K, scenario.Mt);
  for (int k = 0; k < scenario.K; ++k) {
    for (int n = 0; n < scenario.N; ++n) {
      for (int mt = 0; mt < scenario.Mt; ++mt) {
        auto idx = static_cast<std::size_t>(rng.uniform() * constellation.size());
        idx = std::min<std::size_t>(idx, constellation.points.size() - 1);
        out.tx(n, k, mt) = constellation.points[idx];
      }
    }
  }
  out.sigma2 = sigma2_from_snr(scenario.snr_db, scenario.Mt);
  out.rx = propagate(out.tx, out.channel, out.sigma2, rng);
  return out;
}

double subcarrier_loglik(std::span<const cplx> y, std::span<const cplx> s, const CMatrix& h,
                         double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("subcarrier_loglik: sigma2 must be positive");
  if (static_cast<Eigen::Index>(y.size()) != h.rows() ||
      static_cast<Eigen::Index>(s.size()) != h.cols()) {
    throw DimensionError("subcarrier_loglik: shape mismatch");
  }
  double residual = 0.0;
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    cplx acc = y[r];
    for (Eigen::Index c = 0; c < h.cols(); ++c) acc -= h(r, c) * s[c];
    residual += std::norm(acc);
  }
  const double mr = static_cast<double>(y.size());
  return -mr * std::log(std::numbers::pi * sigma2) - residual / sigma2;
}

}  // namespace modclass
