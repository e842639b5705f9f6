#include "modclass/presets.hpp"

namespace modclass {

namespace {

const std::vector<double> kFig3Taps{0.0, -4.2, -11.5, -17.6, -21.5};
const std::vector<double> kThreeTaps{0.0, -2.0, -2.5};
const std::vector<ModulationId> kPool4{ModulationId::QPSK, ModulationId::PSK8,
                                       ModulationId::QAM16, ModulationId::PSK16};

ExperimentConfig base(std::string_view name) {
  ExperimentConfig c;
  c.name = std::string(name);
  c.output_dir = "out/" + c.name;
  return c;
}

ExperimentConfig three_tap(std::string_view name) {
  auto c = base(name);
  c.L = 3;
  c.tap_powers_db = kThreeTaps;
  c.L_hat = {3};
  return c;
}

std::vector<Preset> build() {
  std::vector<Preset> out;

  auto fig3 = base("fig3");
  fig3.tap_powers_db = kFig3Taps;
  fig3.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  fig3.methods = {Method::Gibbs, Method::GibbsRestarts, Method::GibbsAnnealing,
                  Method::GibbsRestartsAnnealing, Method::Superconstellation};
  out.push_back({"fig3", "restart/annealing ablation and superconstellation, L=5", fig3});

  auto fig4 = three_tap("fig4");
  fig4.snr_db = {0.0, 5.0, 10.0, 15.0};
  fig4.L_hat = {1, 3, 5};
  out.push_back({"fig4", "channel-length mismatch, L=3 with L_hat in {1, 3, 5}", fig4});

  auto fig5 = three_tap("fig5");
  fig5.snr_db = {0.0, 5.0, 10.0, 15.0};
  fig5.pool = kPool4;
  out.push_back({"fig5", "four-modulation pool versus SNR, L=3", fig5});

  auto fig6 = base("fig6");
  fig6.N = 64;
  fig6.K = 1;
  fig6.L = 2;
  fig6.tap_powers_db = {0.0, -4.2};
  fig6.L_hat = {2};
  fig6.snr_db = {10.0};
  fig6.methods = {Method::Gibbs, Method::Hybrid};
  fig6.iterations = {20, 50, 100, 200};
  fig6.burn_in = 0.9;
  out.push_back({"fig6", "hybrid Gibbs/mean field versus Gibbs over M, N=64, K=1", fig6});

  auto fig7 = base("fig7_mr1");
  fig7.Mr = 1;
  fig7.tap_powers_db = kFig3Taps;
  fig7.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  out.push_back({"fig7_mr1", "one receive antenna, two transmit antennas, L=5", fig7});

  auto table2 = three_tap("table2");
  table2.snr_db = {5.0};
  out.push_back({"table2", "three-modulation confusion matrix at 5 dB", table2});

  auto table3 = three_tap("table3");
  table3.snr_db = {5.0};
  table3.pool = kPool4;
  out.push_back({"table3", "four-modulation confusion matrix at 5 dB", table3});

  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

std::optional<ExperimentConfig> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.config;
  }
  return std::nullopt;
}

}  // namespace modclass
