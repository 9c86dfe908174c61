#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sfirg/alignment.hpp"
#include "sfirg/errors.hpp"
#include "sfirg/estimators.hpp"
#include "sfirg/graphs.hpp"
#include "sfirg/io.hpp"
#include "sfirg/weights.hpp"

// Experiment configuration files. Grammar:
//
//   # comment
//   seed = 42                 keys before the first section apply to all
//   [fig1a]                   one section per experiment
//   kind = alignment          alignment | normality
//   model = nr                nr | cl
//   dist = pareto:scale=2,alpha=1
//   n = 2^10..2^16            comma list of integers, 2^a, or 2^a..2^b
//   replicates = 300
//
// Remaining keys: estimators (hill,pickands,pwm), k (all estimators),
// k.hill / k.pickands / k.pwm, gamma_true, sampler (sort|renyi),
// generator (fast|naive), event_c, event_k, bins, hist_range (lo,hi), out.

namespace sfirg {

enum class ExperimentKind { Alignment, Normality };
enum class Sampler { Sort, Renyi };

inline const char* to_string(ExperimentKind k) { return k == ExperimentKind::Alignment ? "alignment" : "normality"; }
inline const char* to_string(Sampler s) { return s == Sampler::Sort ? "sort" : "renyi"; }
inline const char* to_string(Generator g) { return g == Generator::Fast ? "fast" : "naive"; }

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Alignment;
  Model model = Model::NorrosReittu;
  WeightDistribution dist = WeightDistribution::pareto(2.0, 1.0);
  std::vector<std::size_t> n_list;
  std::size_t replicates = 1;
  std::vector<Estimator> estimators;
  std::map<Estimator, std::vector<std::size_t>> k_lists;
  std::uint64_t master_seed = 1;
  std::optional<double> gamma_true;
  Sampler sampler = Sampler::Sort;
  Generator generator = Generator::Fast;
  double event_c = 1.0;                 // constant in admissible_k for the event checks
  std::optional<std::size_t> event_k;  // fixed k for the event checks instead
  std::size_t hist_bins = 40;
  double hist_lo = -4.0;
  double hist_hi = 4.0;
  std::string output_path;
};

namespace detail {

inline std::uint64_t parse_unsigned(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("invalid non-negative integer '" + std::string(s) + "' for " + std::string(what));
  return v;
}

inline std::uint64_t parse_size_token(std::string_view tok, std::string_view what) {
  if (tok.starts_with("2^")) {
    const auto e = parse_unsigned(tok.substr(2), what);
    if (e > 62) throw ParseError("exponent too large in '" + std::string(tok) + "'");
    return std::uint64_t{1} << e;
  }
  return parse_unsigned(tok, what);
}

// "1024, 2^11, 2^12..2^14" -> {1024, 2048, 4096, 8192, 16384}
inline std::vector<std::size_t> parse_size_list(std::string_view s, std::string_view what) {
  std::vector<std::size_t> out;
  for (const auto& raw : io::split(s, ',')) {
    const std::string tok = io::trim(raw);
    if (tok.empty()) throw ParseError("empty entry in list for " + std::string(what));
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_size_token(tok, what));
      continue;
    }
    const std::string a = tok.substr(0, dots), b = tok.substr(dots + 2);
    if (!a.starts_with("2^") || !b.starts_with("2^")) throw ParseError("ranges must be powers of two: " + tok);
    const auto lo = parse_unsigned(a.substr(2), what), hi = parse_unsigned(b.substr(2), what);
    if (lo > hi || hi > 62) throw ParseError("bad power-of-two range " + tok);
    for (auto e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
  }
  return out;
}

inline bool is_k_key(std::string_view key) { return key == "k" || key.starts_with("k."); }

}  // namespace detail

// Applies one key=value; throws ParseError on unknown keys or bad values.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_unsigned;
  if (key == "kind") {
    if (value == "alignment") cfg.kind = ExperimentKind::Alignment;
    else if (value == "normality") cfg.kind = ExperimentKind::Normality;
    else throw ParseError("unknown kind '" + value + "'");
  } else if (key == "model") {
    cfg.model = parse_model(value);
  } else if (key == "dist") {
    cfg.dist = WeightDistribution::parse(value);
  } else if (key == "n") {
    cfg.n_list = detail::parse_size_list(value, key);
  } else if (key == "replicates") {
    cfg.replicates = parse_unsigned(value, key);
  } else if (key == "seed") {
    cfg.master_seed = parse_unsigned(value, key);
  } else if (key == "gamma_true") {
    if (value.empty()) cfg.gamma_true.reset();
    else cfg.gamma_true = parse_double(value, key);
  } else if (key == "estimators") {
    cfg.estimators.clear();
    for (const auto& e : io::split(value, ',')) cfg.estimators.push_back(parse_estimator(io::trim(e)));
  } else if (key == "k") {
    const auto ks = detail::parse_size_list(value, key);
    for (Estimator e : {Estimator::Hill, Estimator::Pickands, Estimator::PWM}) cfg.k_lists[e] = ks;
  } else if (key.starts_with("k.")) {
    cfg.k_lists[parse_estimator(key.substr(2))] = detail::parse_size_list(value, key);
  } else if (key == "sampler") {
    if (value == "sort") cfg.sampler = Sampler::Sort;
    else if (value == "renyi") cfg.sampler = Sampler::Renyi;
    else throw ParseError("unknown sampler '" + value + "'");
  } else if (key == "generator") {
    if (value == "fast") cfg.generator = Generator::Fast;
    else if (value == "naive") cfg.generator = Generator::Naive;
    else throw ParseError("unknown generator '" + value + "'");
  } else if (key == "event_c") {
    cfg.event_c = parse_double(value, key);
  } else if (key == "event_k") {
    if (value.empty()) cfg.event_k.reset();
    else cfg.event_k = parse_unsigned(value, key);
  } else if (key == "bins") {
    cfg.hist_bins = parse_unsigned(value, key);
  } else if (key == "hist_range") {
    const auto parts = io::split(value, ',');
    if (parts.size() != 2) throw ParseError("hist_range expects lo,hi");
    cfg.hist_lo = parse_double(io::trim(parts[0]), key);
    cfg.hist_hi = parse_double(io::trim(parts[1]), key);
  } else if (key == "out") {
    cfg.output_path = value;
  } else {
    throw ParseError("unknown config key '" + key + "'");
  }
}

// "key=value" as given on the command line.
inline void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParseError("override must be key=value: " + std::string(assignment));
  apply_config_key(cfg, io::trim(assignment.substr(0, eq)), io::trim(assignment.substr(eq + 1)));
}

inline std::vector<ExperimentConfig> parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> globals;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = io::trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ParseError("line " + std::to_string(lineno) + ": bad section header");
      sections.push_back({io::trim(t.substr(1, t.size() - 2)), {}});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    auto kv = std::make_pair(io::trim(t.substr(0, eq)), io::trim(t.substr(eq + 1)));
    (sections.empty() ? globals : sections.back().second).push_back(std::move(kv));
  }
  if (sections.empty()) throw ParseError("config has no [experiment] sections");

  std::vector<ExperimentConfig> out;
  for (const auto& [name, keys] : sections) {
    ExperimentConfig cfg;
    cfg.name = name;
    try {
      for (const auto& [k, v] : globals) apply_config_key(cfg, k, v);
      for (const auto& [k, v] : keys) apply_config_key(cfg, k, v);
    } catch (const ParseError& e) {
      throw ParseError("[" + name + "] " + e.what());
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

// Throws ParseError for configs that cannot run; returns warnings for runs
// outside the theory's hypotheses.
inline std::vector<std::string> validate(const ExperimentConfig& cfg) {
  auto fail = [&](const std::string& msg) { throw ParseError("[" + cfg.name + "] " + msg); };
  if (cfg.n_list.empty()) fail("n list is empty");
  if (cfg.replicates < 1) fail("replicates must be >= 1");
  for (auto n : cfg.n_list) {
    if (n < 1) fail("n must be >= 1");
    if (n > std::numeric_limits<std::uint32_t>::max()) fail("n exceeds 2^32 - 1");
    if (cfg.generator == Generator::Naive && n > kNaiveNodeCap) fail("naive generator capped at 4096 nodes");
  }
  std::vector<std::string> warnings;
  if (cfg.model == Model::ChungLu && !(cfg.dist.alpha() > 2.0))
    warnings.push_back("Chung-Lu with alpha <= 2 is outside the alignment theory's hypotheses");

  if (cfg.kind == ExperimentKind::Alignment) {
    for (auto n : cfg.n_list) {
      if (n < 3) fail("alignment experiments need n >= 3");
      if (cfg.event_k && (*cfg.event_k < 1 || *cfg.event_k >= n)) fail("event_k must satisfy 1 <= k < n");
    }
    if (!(cfg.event_c > 0.0)) fail("event_c must be positive");
    return warnings;
  }

  if (!cfg.gamma_true) fail("normality experiments require gamma_true");
  if (!(*cfg.gamma_true > 0.0)) fail("gamma_true must be positive");
  if (cfg.estimators.empty()) fail("no estimators selected");
  if (cfg.hist_bins < 1 || !(cfg.hist_lo < cfg.hist_hi)) fail("bad histogram settings");
  const std::size_t n_min = *std::min_element(cfg.n_list.begin(), cfg.n_list.end());
  for (Estimator e : cfg.estimators) {
    const auto it = cfg.k_lists.find(e);
    if (it == cfg.k_lists.end() || it->second.empty()) fail(std::string("no k values for ") + to_string(e));
    for (auto k : it->second) {
      if (e == Estimator::Pickands ? (k < 1 || 4 * k > n_min) : (k < 2 || k > n_min))
        fail(std::string("k=") + std::to_string(k) + " invalid for " + to_string(e) + " at n=" + std::to_string(n_min));
    }
    if (e == Estimator::PWM && !(cfg.dist.alpha() > 2.0))
      warnings.push_back("PWM with alpha <= 2 is outside its normality theory (needs alpha > 2)");
    if (e == Estimator::PWM && *cfg.gamma_true >= 0.5) fail("PWM variance undefined for gamma_true >= 1/2");
  }
  return warnings;
}

// Fully resolved configuration, one key = value per line.
inline std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream s;
  auto list = [](const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
  };
  s << "[" << cfg.name << "]\n";
  s << "kind = " << to_string(cfg.kind) << "\n";
  s << "model = " << to_string(cfg.model) << "\n";
  s << "dist = " << cfg.dist.spec() << "\n";
  s << "n = " << list(cfg.n_list) << "\n";
  s << "replicates = " << cfg.replicates << "\n";
  s << "seed = " << cfg.master_seed << "\n";
  s << "sampler = " << to_string(cfg.sampler) << "\n";
  s << "generator = " << to_string(cfg.generator) << "\n";
  if (cfg.kind == ExperimentKind::Alignment) {
    if (cfg.event_k) s << "event_k = " << *cfg.event_k << "\n";
    else s << "event_c = " << io::fmt(cfg.event_c) << "\n";
  } else {
    s << "gamma_true = " << io::fmt(cfg.gamma_true) << "\n";
    std::string est;
    for (std::size_t i = 0; i < cfg.estimators.size(); ++i) est += (i ? "," : "") + std::string(to_string(cfg.estimators[i]));
    s << "estimators = " << est << "\n";
    for (Estimator e : cfg.estimators) s << "k." << to_string(e) << " = " << list(cfg.k_lists.at(e)) << "\n";
    s << "bins = " << cfg.hist_bins << "\n";
    s << "hist_range = " << io::fmt(cfg.hist_lo) << "," << io::fmt(cfg.hist_hi) << "\n";
  }
  if (!cfg.output_path.empty()) s << "out = " << cfg.output_path << "\n";
  return s.str();
}

}  // namespace sfirg
