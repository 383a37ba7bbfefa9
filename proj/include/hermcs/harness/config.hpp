#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hermcs/error.hpp"
#include "hermcs/sampling.hpp"

namespace hermcs::harness {

enum class ExperimentId { kEx1a, kEx1b, kEx2, kEx3, kEx4, kEx5, kHistograms };

inline std::string_view to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::kEx1a: return "ex1a";
    case ExperimentId::kEx1b: return "ex1b";
    case ExperimentId::kEx2: return "ex2";
    case ExperimentId::kEx3: return "ex3";
    case ExperimentId::kEx4: return "ex4";
    case ExperimentId::kEx5: return "ex5";
    case ExperimentId::kHistograms: return "histograms";
  }
  return "unknown";
}

inline ExperimentId parse_experiment_id(std::string_view name) {
  for (auto id : {ExperimentId::kEx1a, ExperimentId::kEx1b, ExperimentId::kEx2, ExperimentId::kEx3,
                  ExperimentId::kEx4, ExperimentId::kEx5, ExperimentId::kHistograms}) {
    if (name == to_string(id)) return id;
  }
  throw InvalidArgument("unknown experiment id '" + std::string(name) +
                        "' (expected ex1a, ex1b, ex2, ex3, ex4, ex5 or histograms)");
}

/// A named signal setting for the histogram experiment.
struct SignalSetting {
  std::string name;
  std::vector<SignalComponent> components;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::kEx1a;
  int M = 200;
  int trials = 1;
  std::uint64_t seed = 1;
  std::vector<int> ma_values;
  std::vector<int> p0_list;  // empty: every order 0..M-1 (ex1a/ex1b)
  std::vector<SignalComponent> components;
  std::vector<SignalSetting> settings;  // histograms only
  double pnn = 0.99;
  std::filesystem::path out_dir = ".";
  bool svg = false;

  [[nodiscard]] SparseSignalSpec signal() const { return SparseSignalSpec(M, components); }
};

inline std::vector<int> int_range(int first, int last, int step) {
  std::vector<int> v;
  for (int x = first; x <= last; x += step) v.push_back(x);
  return v;
}

inline std::vector<SignalComponent> example3_components() {
  return {{20, 1.0}, {54, 0.7}, {94, 0.5}, {162, 0.3}, {192, 0.2}};
}

inline std::vector<SignalComponent> example5_components() {
  return {{20, 2.5}, {124, 3.3}, {84, 2.6}, {162, 3.1}, {37, 2.7}, {44, 3.5}, {149, 2.3}, {189, 3.4}};
}

/// Histogram settings: one unit component, and four components with
/// amplitudes {1, 3, 4, 2}. Both sit in the middle of the order range.
inline std::vector<SignalSetting> default_histogram_settings() {
  return {{"mono", {{100, 1.0}}}, {"multi", {{50, 1.0}, {75, 3.0}, {100, 4.0}, {125, 2.0}}}};
}

/// Full-scale defaults for each campaign.
inline ExperimentConfig default_config(ExperimentId id) {
  ExperimentConfig c;
  c.id = id;
  switch (id) {
    case ExperimentId::kEx1a:
      c.M = 200;
      c.trials = 7000;
      c.ma_values = int_range(2, 200, 2);
      break;
    case ExperimentId::kEx1b:
      c.M = 400;
      c.trials = 7000;
      c.ma_values = int_range(4, 400, 4);
      break;
    case ExperimentId::kEx2:
      c.M = 400;
      c.trials = 5000;
      c.ma_values = int_range(10, 400, 10);
      c.p0_list = {1, 266, 390};
      break;
    case ExperimentId::kEx3:
      c.M = 200;
      c.trials = 3000;
      c.ma_values = int_range(1, 200, 1);
      c.components = example3_components();
      break;
    case ExperimentId::kEx4:
      c.M = 200;
      c.trials = 500;
      c.ma_values = {56, 108, 154, 176};
      c.components = example3_components();
      break;
    case ExperimentId::kEx5:
      c.M = 200;
      c.trials = 100;
      c.ma_values = {135};
      c.components = example5_components();
      break;
    case ExperimentId::kHistograms:
      c.M = 200;
      c.trials = 20000;
      c.ma_values = {120};
      c.settings = default_histogram_settings();
      break;
  }
  return c;
}

inline void validate(const ExperimentConfig& c) {
  hermcs::detail::require(c.M >= 2 && c.M <= kMaxOrder, "M must lie in [2, " + std::to_string(kMaxOrder) + "]");
  hermcs::detail::require(c.trials >= 1, "trial count must be at least 1");
  hermcs::detail::require(!c.ma_values.empty(), "at least one M_A value is required");
  for (int ma : c.ma_values) {
    hermcs::detail::require(ma >= 1 && ma <= c.M, "M_A value " + std::to_string(ma) + " outside [1, M]");
  }
  for (int p : c.p0_list) hermcs::detail::require(p >= 0 && p < c.M, "p0 " + std::to_string(p) + " outside [0, M)");
  hermcs::detail::require(c.pnn > 0.0 && c.pnn < 1.0, "pnn must lie in (0, 1)");
  switch (c.id) {
    case ExperimentId::kEx3:
    case ExperimentId::kEx4:
    case ExperimentId::kEx5:
      hermcs::detail::require(!c.components.empty(), "this experiment needs signal components");
      (void)c.signal();
      break;
    case ExperimentId::kEx2:
      hermcs::detail::require(!c.p0_list.empty(), "ex2 needs a p0 list");
      break;
    case ExperimentId::kHistograms:
      hermcs::detail::require(!c.settings.empty(), "histograms need at least one signal setting");
      hermcs::detail::require(c.ma_values.size() == 1 && c.ma_values.front() < c.M,
                      "histograms take a single M_A below M");
      for (const auto& s : c.settings) (void)SparseSignalSpec(c.M, s.components);
      break;
    default:
      break;
  }
}

namespace detail {

inline std::vector<SignalComponent> parse_components(const nlohmann::json& arr) {
  std::vector<SignalComponent> out;
  for (const auto& item : arr) out.push_back({item.at("p").get<int>(), item.at("A").get<double>()});
  return out;
}

}  // namespace detail

/// Overlays the JSON document onto `c`. Recognised keys:
///   M, components [{p, A}], mask {M_A, seed}, trials, seed,
///   ma_values [..], ma_range {min, max, step}, p0_list [..], pnn, out.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("experiment")) c.id = parse_experiment_id(j.at("experiment").get<std::string>());
    if (j.contains("M")) c.M = j.at("M").get<int>();
    if (j.contains("components")) {
      c.components = detail::parse_components(j.at("components"));
      if (c.id == ExperimentId::kHistograms) c.settings = {{"custom", c.components}};
    }
    if (j.contains("mask")) {
      const auto& m = j.at("mask");
      if (m.contains("M_A")) c.ma_values = {m.at("M_A").get<int>()};
      if (m.contains("seed")) c.seed = m.at("seed").get<std::uint64_t>();
    }
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ma_values")) c.ma_values = j.at("ma_values").get<std::vector<int>>();
    if (j.contains("ma_range")) {
      const auto& r = j.at("ma_range");
      const int step = r.value("step", 1);
      ::hermcs::detail::require(step >= 1, "ma_range step must be positive");
      c.ma_values = int_range(r.at("min").get<int>(), r.at("max").get<int>(), step);
    }
    if (j.contains("p0_list")) c.p0_list = j.at("p0_list").get<std::vector<int>>();
    if (j.contains("pnn")) c.pnn = j.at("pnn").get<double>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("invalid config: ") + e.what());
  }
}

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

/// Compact JSON echo of the configuration, used in CSV metadata lines.
inline std::string describe(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = std::string(to_string(c.id));
  j["M"] = c.M;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["ma_values"] = c.ma_values;
  if (!c.p0_list.empty()) j["p0_list"] = c.p0_list;
  auto comps = [](const std::vector<SignalComponent>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v) a.push_back({{"p", x.order}, {"A", x.amplitude}});
    return a;
  };
  if (!c.components.empty()) j["components"] = comps(c.components);
  if (c.id == ExperimentId::kHistograms) {
    for (const auto& s : c.settings) j["settings"][s.name] = comps(s.components);
  }
  j["pnn"] = c.pnn;
  return j.dump();
}

}  // namespace hermcs::harness
