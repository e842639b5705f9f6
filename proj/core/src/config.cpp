#include "modclass/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "modclass/errors.hpp"

namespace modclass {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodNames{{
    {Method::Gibbs, "gibbs"},
    {Method::GibbsRestarts, "gibbs+restarts"},
    {Method::GibbsAnnealing, "gibbs+annealing"},
    {Method::GibbsRestartsAnnealing, "gibbs+restarts+annealing"},
    {Method::MeanField, "meanfield"},
    {Method::Hybrid, "hybrid"},
    {Method::Superconstellation, "superconstellation"},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("config: bad value '" + std::string(value) + "' for key '" + std::string(key) +
                    "'");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

template <class Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<int> to_ints(std::string_view key, std::string_view v) {
  std::vector<int> out;
  for (auto item : split_list(v)) out.push_back(to_int<int>(key, item));
  return out;
}

std::string fmt(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& render) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += render(items[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  for (const auto& [id, name] : kMethodNames) {
    if (id == m) return name;
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (const auto& [id, known] : kMethodNames) {
    if (known == name) return id;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  for (auto item : split_list(list)) out.push_back(parse_method(item));
  return out;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (trials < 1) fail("trials must be at least 1");
  if (snr_db.empty()) fail("snr_db needs at least one value");
  if (methods.empty()) fail("method needs at least one value");
  if (L_hat.empty()) fail("L_hat needs at least one value");
  if (iterations.empty()) fail("M needs at least one value");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) fail("burn_in must lie in [0, 1)");
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) fail("gamma must be positive");
  if (output_dir.empty()) fail("output_dir is empty");
  auto unique = [](auto items) {
    std::sort(items.begin(), items.end());
    return std::adjacent_find(items.begin(), items.end()) == items.end();
  };
  if (!unique(methods)) fail("method listed twice");
  if (!unique(L_hat)) fail("L_hat value listed twice");
  if (!unique(iterations)) fail("M value listed twice");
  if (!unique(snr_db)) fail("snr_db value listed twice");
  make_pool();
  for (double snr : snr_db) {
    for (int lh : L_hat) scenario(snr, lh, pool.front()).validate();
  }
  for (auto m : methods) {
    for (int M : iterations) {
      inference(m, M).validate(static_cast<int>(pool.size()));
      if (m == Method::Hybrid && switch_iteration > M) fail("switch_iteration exceeds M");
    }
  }
}

ModulationPool ExperimentConfig::make_pool() const {
  return ModulationPool::from_ids(pool);
}

Scenario ExperimentConfig::scenario(double snr, int lh, ModulationId truth) const {
  Scenario s;
  s.N = N;
  s.K = K;
  s.Mt = Mt;
  s.Mr = Mr;
  s.L = L;
  s.L_hat = lh;
  s.tap_powers_db = tap_powers_db;
  s.snr_db = snr;
  s.pool = make_pool();
  s.true_modulation = truth;
  return s;
}

InferenceConfig ExperimentConfig::inference(Method method, int M) const {
  InferenceConfig cfg = default_inference_config(static_cast<int>(pool.size()), N, K, Mt);
  if (gamma) cfg.gamma.assign(pool.size(), *gamma);
  cfg.alpha0 = alpha0;
  cfg.beta0 = beta0;
  cfg.alpha_h = alpha_h;
  cfg.M = M;
  cfg.M0 = static_cast<int>(std::lround(burn_in * M));
  if (cfg.M0 >= M) cfg.M0 = M - 1;
  cfg.annealing.p0 = anneal_p0;
  cfg.annealing.m0_fraction = anneal_m0;
  cfg.switch_iteration = switch_iteration;
  cfg.mf_rel_tol = mf_rel_tol;
  cfg.n_run = 1;
  switch (method) {
    case Method::GibbsRestarts:
      cfg.n_run = n_run;
      break;
    case Method::GibbsAnnealing:
      cfg.annealing.enabled = true;
      break;
    case Method::GibbsRestartsAnnealing:
      cfg.n_run = n_run;
      cfg.annealing.enabled = true;
      break;
    case Method::Superconstellation:
      cfg.n_run = n_run;
      cfg.annealing.enabled = true;
      cfg.variant = SamplerVariant::Superconstellation;
      cfg.gamma.assign(pool.size(), 0.0);
      break;
    case Method::Gibbs:
    case Method::MeanField:
    case Method::Hybrid:
      break;
  }
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + " has no '='");
    }
    const auto key = trim(line.substr(0, eq));
    const auto v = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) throw ConfigError("config: duplicate key '" + std::string(key) + "'");

    if (key == "name") c.name = std::string(v);
    else if (key == "N") c.N = to_int<int>(key, v);
    else if (key == "K") c.K = to_int<int>(key, v);
    else if (key == "Mt") c.Mt = to_int<int>(key, v);
    else if (key == "Mr") c.Mr = to_int<int>(key, v);
    else if (key == "L") c.L = to_int<int>(key, v);
    else if (key == "tap_powers_db") c.tap_powers_db = to_doubles(key, v);
    else if (key == "snr_db") c.snr_db = to_doubles(key, v);
    else if (key == "pool") {
      c.pool.clear();
      for (auto item : split_list(v)) c.pool.push_back(parse_modulation(item));
    } else if (key == "method") {
      c.methods = parse_methods(v);
    } else if (key == "L_hat") c.L_hat = to_ints(key, v);
    else if (key == "M") c.iterations = to_ints(key, v);
    else if (key == "burn_in") c.burn_in = to_double(key, v);
    else if (key == "gamma") {
      if (v == "auto") c.gamma.reset();
      else c.gamma = to_double(key, v);
    } else if (key == "alpha0") c.alpha0 = to_double(key, v);
    else if (key == "beta0") c.beta0 = to_double(key, v);
    else if (key == "alpha_h") c.alpha_h = to_double(key, v);
    else if (key == "n_run") c.n_run = to_int<int>(key, v);
    else if (key == "anneal_p0") c.anneal_p0 = to_double(key, v);
    else if (key == "anneal_m0") c.anneal_m0 = to_double(key, v);
    else if (key == "switch_iteration") c.switch_iteration = to_int<int>(key, v);
    else if (key == "mf_rel_tol") c.mf_rel_tol = to_double(key, v);
    else if (key == "trials") c.trials = to_int<int>(key, v);
    else if (key == "seed") c.seed = to_int<std::uint64_t>(key, v);
    else if (key == "output_dir") c.output_dir = std::string(v);
    else if (key == "timing") c.timing = to_bool(key, v);
    else throw ConfigError("config: unknown key '" + std::string(key) + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  auto num = [](double v) { return fmt(v); };
  auto integer = [](int v) { return std::to_string(v); };
  std::ostringstream out;
  out << "name = " << c.name << '\n'
      << "N = " << c.N << '\n'
      << "K = " << c.K << '\n'
      << "Mt = " << c.Mt << '\n'
      << "Mr = " << c.Mr << '\n'
      << "L = " << c.L << '\n'
      << "tap_powers_db = " << join(c.tap_powers_db, num) << '\n'
      << "snr_db = " << join(c.snr_db, num) << '\n'
      << "pool = " << join(c.pool, [](ModulationId id) { return std::string(to_string(id)); }) << '\n'
      << "method = " << join(c.methods, [](Method m) { return std::string(to_string(m)); }) << '\n'
      << "L_hat = " << join(c.L_hat, integer) << '\n'
      << "M = " << join(c.iterations, integer) << '\n'
      << "burn_in = " << fmt(c.burn_in) << '\n'
      << "gamma = " << (c.gamma ? fmt(*c.gamma) : std::string("auto")) << '\n'
      << "alpha0 = " << fmt(c.alpha0) << '\n'
      << "beta0 = " << fmt(c.beta0) << '\n'
      << "alpha_h = " << fmt(c.alpha_h) << '\n'
      << "n_run = " << c.n_run << '\n'
      << "anneal_p0 = " << fmt(c.anneal_p0) << '\n'
      << "anneal_m0 = " << fmt(c.anneal_m0) << '\n'
      << "switch_iteration = " << c.switch_iteration << '\n'
      << "mf_rel_tol = " << fmt(c.mf_rel_tol) << '\n'
      << "trials = " << c.trials << '\n'
      << "seed = " << c.seed << '\n'
      << "output_dir = " << c.output_dir << '\n'
      << "timing = " << (c.timing ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace modclass
