#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modclass/errors.hpp"
#include "modclass/sigmodel.hpp"
#include "oracles.hpp"

using namespace modclass;

namespace {

double average_power(const Constellation& c) {
  double p = 0.0;
  for (auto x : c.points) p += std::norm(x);
  return p / c.size();
}

bool contains(const Constellation& c, cplx x) {
  return std::any_of(c.points.begin(), c.points.end(), [&](cplx p) { return std::abs(p - x) < 1e-12; });
}

}  // namespace

TEST_CASE("constellation sizes and unit power") {
  const std::pair<ModulationId, int> expected[] = {{ModulationId::BPSK, 2},
                                                   {ModulationId::QPSK, 4},
                                                   {ModulationId::PSK8, 8},
                                                   {ModulationId::QAM16, 16},
                                                   {ModulationId::PSK16, 16}};
  for (const auto& [id, size] : expected) {
    const auto c = build_constellation(id);
    CHECK(c.size() == size);
    CHECK(std::abs(average_power(c) - 1.0) < 1e-12);
    for (int i = 0; i < c.size(); ++i) {
      for (int j = i + 1; j < c.size(); ++j) CHECK(std::abs(c.points[i] - c.points[j]) > 1e-6);
    }
  }
}

TEST_CASE("QPSK points") {
  const auto c = build_constellation("QPSK");
  const double r = 1.0 / std::sqrt(2.0);
  for (cplx x : {cplx(r, r), cplx(-r, r), cplx(r, -r), cplx(-r, -r)}) CHECK(contains(c, x));
}

TEST_CASE("16-QAM points lie on the scaled odd grid") {
  const auto c = build_constellation("16-QAM");
  for (double re : {-3.0, -1.0, 1.0, 3.0}) {
    for (double im : {-3.0, -1.0, 1.0, 3.0}) CHECK(contains(c, cplx(re, im) / std::sqrt(10.0)));
  }
}

TEST_CASE("8-PSK points sit at multiples of pi/4") {
  const auto c = build_constellation("8PSK");
  for (int i = 0; i < 8; ++i) CHECK(contains(c, std::polar(1.0, 2.0 * std::numbers::pi * i / 8)));
}

TEST_CASE("QPSK and 8-PSK are subsets of 16-PSK") {
  const auto psk16 = build_constellation(ModulationId::PSK16);
  for (auto id : {ModulationId::QPSK, ModulationId::PSK8}) {
    for (auto x : build_constellation(id).points) CHECK(contains(psk16, x));
  }
}

TEST_CASE("modulation names") {
  CHECK(parse_modulation("qpsk") == ModulationId::QPSK);
  CHECK(parse_modulation("8-PSK") == ModulationId::PSK8);
  CHECK(parse_modulation("16qam") == ModulationId::QAM16);
  CHECK(parse_modulation("PSK16") == ModulationId::PSK16);
  for (auto id : {ModulationId::BPSK, ModulationId::QPSK, ModulationId::PSK8, ModulationId::QAM16,
                  ModulationId::PSK16}) {
    CHECK(parse_modulation(to_string(id)) == id);
  }
  CHECK_THROWS_AS(parse_modulation("64QAM"), ConfigError);
  CHECK_THROWS_AS(build_constellation("OOK"), ConfigError);
}

TEST_CASE("pool candidates carry one entry per (point, constellation)") {
  const auto pool = default_pool();
  CHECK(pool.size() == 3);
  CHECK(pool.total_states() == 28);
  CHECK(pool.first_candidate(0) == 0);
  CHECK(pool.first_candidate(1) == 4);
  CHECK(pool.first_candidate(2) == 12);
  for (int i = 0; i < pool.total_states(); ++i) {
    const auto& c = pool.candidates()[i];
    CHECK(c.power == doctest::Approx(std::norm(c.point)));
    CHECK(contains(pool[c.label], c.point));
  }
  CHECK(extended_pool().total_states() == 44);
  CHECK(pool.names() == std::vector<std::string>{"QPSK", "PSK8", "QAM16"});
}

TEST_CASE("pool rejects empty and duplicate entries") {
  CHECK_THROWS_AS(ModulationPool(std::vector<Constellation>{}), ConfigError);
  const ModulationId dup[] = {ModulationId::QPSK, ModulationId::QPSK};
  CHECK_THROWS_AS(ModulationPool::from_ids(dup), ConfigError);
}

TEST_CASE("sigma2 from SNR") {
  CHECK(sigma2_from_snr(10.0, 2) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(sigma2_from_snr(0.0, 2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sigma2_from_snr(-10.0, 1) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("tap powers are normalized to unit sum") {
  for (const std::vector<double>& db : {std::vector<double>{0.0}, {0.0, -4.2, -11.5, -17.6, -21.5},
                                        {0.0, -2.0, -2.5}}) {
    const auto p = normalized_tap_powers(db);
    double total = 0.0;
    for (double v : p) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p[0] / p.back() == doctest::Approx(std::pow(10.0, -db.back() / 10.0)));
  }
}

TEST_CASE("scenario validation") {
  Scenario s;
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.L_hat = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.L = 200;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.tap_powers_db = {0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.Mr = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.true_modulation = ModulationId::PSK16;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("channel energy is normalized") {
  const std::vector<std::vector<double>> profiles{{0.0}, {0.0, -4.2, -11.5, -17.6, -21.5}, {0.0, -2.0, -2.5}};
  for (const auto& db : profiles) {
    Scenario s;
    s.N = 8;
    s.Mt = s.Mr = 1;
    s.L = s.L_hat = static_cast<int>(db.size());
    s.tap_powers_db = db;
    RandomStream rng(21);
    double energy = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) energy += draw_channel(s, rng).taps[0].squaredNorm();
    CHECK(energy / draws >= 0.98);
    CHECK(energy / draws <= 1.02);
  }
}

TEST_CASE("noiseless identity channel passes symbols through") {
  Scenario s;
  s.N = 8;
  s.K = 2;
  s.Mt = s.Mr = 1;
  s.L = s.L_hat = 1;
  s.tap_powers_db = {0.0};
  const auto W = dft_submatrix(8, 1);
  CVector h(1);
  h << cplx(1, 0);
  const auto channel = ChannelRealization::from_taps({h}, 1, 1, W);
  RandomStream rng(22);
  TransmitGrid tx(8, 2, 1);
  const auto qam = build_constellation(ModulationId::QAM16);
  for (auto& v : tx.data()) v = qam.points[rng.next_u64() % 16];
  const auto y = propagate(tx, channel, 0.0, rng);
  CHECK(y == tx);
}

TEST_CASE("synthesis shapes, membership and determinism") {
  Scenario s;
  s.true_modulation = ModulationId::PSK8;
  RandomStream a(23), b(23);
  const auto x = synthesize(s, a);
  const auto y = synthesize(s, b);
  CHECK(x.tx.subcarriers() == 128);
  CHECK(x.tx.frames() == 2);
  CHECK(x.tx.antennas() == 2);
  CHECK(x.rx.subcarriers() == 128);
  CHECK(x.rx.antennas() == 2);
  CHECK(x.sigma2 == doctest::Approx(0.2));
  CHECK(x.rx == y.rx);
  const auto c = build_constellation(ModulationId::PSK8);
  for (auto v : x.tx.data()) CHECK(contains(c, v));
}

TEST_CASE("synthesized noise has the configured variance") {
  Scenario s;
  s.N = 64;
  s.K = 4;
  s.Mt = s.Mr = 2;
  s.L = s.L_hat = 2;
  s.tap_powers_db = {0.0, -3.0};
  s.snr_db = 3.0;
  RandomStream rng(24);
  double residual = 0.0;
  int count = 0;
  for (int t = 0; t < 50; ++t) {
    const auto x = synthesize(s, rng);
    for (int n = 0; n < s.N; ++n) {
      const CMatrix H = x.channel.response(n);
      for (int k = 0; k < s.K; ++k) {
        Eigen::Map<const CVector> tx(x.tx.at(n, k).data(), s.Mt);
        Eigen::Map<const CVector> rx(x.rx.at(n, k).data(), s.Mr);
        residual += (rx - H * tx).squaredNorm();
        count += s.Mr;
      }
    }
  }
  CHECK(residual / count == doctest::Approx(sigma2_from_snr(3.0, 2)).epsilon(0.02));
}

TEST_CASE("per-subcarrier and per-antenna assembly agree") {
  RandomStream rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    Scenario s;
    s.N = 2 + static_cast<int>(rng.next_u64() % 7);
    s.K = 1 + static_cast<int>(rng.next_u64() % 2);
    s.Mt = 1 + static_cast<int>(rng.next_u64() % 2);
    s.Mr = 1 + static_cast<int>(rng.next_u64() % 2);
    s.L = s.L_hat = 1 + static_cast<int>(rng.next_u64() % std::min(3, s.N));
    s.tap_powers_db.assign(s.L, 0.0);
    s.true_modulation = ModulationId::QAM16;
    const auto x = synthesize(s, rng);
    const auto W = dft_submatrix(s.N, s.L);
    const auto noiseless = propagate(x.tx, x.channel, 0.0, rng);
    const auto reference = oracles::assemble_per_antenna(x.tx, x.channel.taps, s.Mr, W);
    double diff = 0.0;
    for (std::size_t i = 0; i < noiseless.data().size(); ++i) {
      diff = std::max(diff, std::abs(noiseless.data()[i] - reference.data()[i]));
    }
    CHECK(diff < 1e-10);

    double total = 0.0;
    for (int n = 0; n < s.N; ++n) {
      const CMatrix H = x.channel.response(n);
      for (int k = 0; k < s.K; ++k) total += subcarrier_loglik(x.rx.at(n, k), x.tx.at(n, k), H, x.sigma2);
    }
    CHECK(std::abs(total - oracles::loglik_per_antenna(x.rx, x.tx, x.channel.taps, W, x.sigma2)) < 1e-8);
  }
}

TEST_CASE("subcarrier log-likelihood") {
  CMatrix H(2, 2);
  H << cplx(1, 0.5), cplx(0, -1), cplx(0.3, 0), cplx(2, 1);
  const std::vector<cplx> s{cplx(1, 0), cplx(0, 1)};
  Eigen::Map<const CVector> sv(s.data(), 2);
  const CVector hy = H * sv;
  const std::vector<cplx> y(hy.data(), hy.data() + 2);
  const double sigma2 = 0.3;
  const double at_zero = subcarrier_loglik(y, s, H, sigma2);
  CHECK(at_zero == doctest::Approx(-2.0 * std::log(std::numbers::pi * sigma2)));
  CHECK(subcarrier_loglik(y, s, H, 2.0 * sigma2) - at_zero == doctest::Approx(-2.0 * std::log(2.0)));
  auto y_off = y;
  y_off[0] += cplx(0.1, 0.2);
  CHECK(subcarrier_loglik(y_off, s, H, sigma2) == doctest::Approx(at_zero - 0.05 / sigma2));
  CHECK_THROWS_AS(subcarrier_loglik(y, s, H, 0.0), DomainError);
  CHECK_THROWS_AS(subcarrier_loglik(y, s, H, -1.0), DomainError);
}
