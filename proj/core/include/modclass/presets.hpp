#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "modclass/config.hpp"

namespace modclass {

struct Preset {
  std::string_view name;
  std::string_view summary;
  ExperimentConfig config;
};

/// Built-in scenarios: fig3, fig4, fig5, fig6, fig7_mr1, table2, table3.
const std::vector<Preset>& presets();
std::optional<ExperimentConfig> find_preset(std::string_view name);

}  // namespace modclass
