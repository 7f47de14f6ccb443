#include "hprobit/config.hpp"

#include "hprobit/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <set>

namespace hprobit {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "seed", "model", "output", "threads",
      "data.path", "data.schema", "data.cutoff", "data.binomial",
      "schema.person_id", "schema.date", "schema.outcome", "schema.covariates", "schema.external_risk_group",
      "schema.missing", "schema.na_values",
      "chain.iterations", "chain.burn_in", "chain.thin", "chain.chains", "chain.store_random_effects",
      "chain.overdispersed_start",
      "gaussian.mu_variance", "gaussian.tau_variance", "gaussian.beta_variance",
      "discrete.components", "discrete.beta_variance", "discrete.conjugate_atoms", "discrete.person_count_weights",
      "binomial.components", "binomial.a", "binomial.b", "binomial.weight_prior", "binomial.max_components",
      "binomial.collapsed",
      "predict.max_draws", "predict.grid_points", "predict.grid_lower", "predict.grid_upper",
      "predict.interval_level",
      "analyze.schemes", "analyze.custom_thresholds", "analyze.clusters", "analyze.threshold_draws",
      "analyze.interval_threshold", "analyze.interval_sample", "analyze.flag_c", "analyze.flag_h",
      "analyze.density_bins",
      "simulate.p0", "simulate.taus", "simulate.n_points", "simulate.replicates", "simulate.level",
      "simulate.grid_points", "simulate.crossing_length", "simulate.crossing_max_n", "simulate.cohort",
      "simulate.low_signal", "simulate.high_signal", "simulate.noise_taus"};
  return keys;
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& entries) : entries_(entries) {}

  std::optional<std::string> get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  template <typename T>
  void number(const std::string& key, T& out) const {
    auto v = get(key);
    if (!v) return;
    out = parse_number<T>(key, *v);
  }

  void flag(const std::string& key, bool& out) const {
    auto v = get(key);
    if (!v) return;
    const auto s = boost::algorithm::to_lower_copy(*v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
      out = true;
    } else if (s == "false" || s == "0" || s == "no" || s == "off") {
      out = false;
    } else {
      throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, *v));
    }
  }

  std::optional<std::vector<std::string>> list(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *v, boost::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
      boost::algorithm::trim(p);
      if (!p.empty()) out.push_back(p);
    }
    return out;
  }

  template <typename T>
  void numbers(const std::string& key, std::vector<T>& out) const {
    auto items = list(key);
    if (!items) return;
    out.clear();
    for (const auto& s : *items) out.push_back(parse_number<T>(key, s));
  }

  template <typename T>
  static T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ConfigError(fmt::format("{}: cannot parse '{}'", key, text));
    return value;
  }

 private:
  const std::map<std::string, std::string>& entries_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

void require_exists(const std::string& key, const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw ConfigError(fmt::format("{}: path '{}' does not exist", key, p.string()));
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = fnv1a("");
  for (const auto& [key, value] : entries) {
    if (key == "threads" || key == "output") continue;
    h = fnv1a(key, h);
    h = fnv1a("=", h);
    h = fnv1a(value, h);
    h = fnv1a("\n", h);
  }
  return h;
}

RunConfig parse_run_config(std::map<std::string, std::string> entries, const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : entries) {
    if (!known_keys().count(key)) throw ConfigError(fmt::format("unknown configuration key '{}'", key));
  }
  RunConfig cfg;
  cfg.entries = std::move(entries);
  const Reader r(cfg.entries);

  auto seed = r.get("seed");
  if (!seed) throw ConfigError("a seed is required (set 'seed' in the config or pass --seed)");
  cfg.seed = Reader::parse_number<std::uint64_t>("seed", *seed);
  if (auto m = r.get("model")) cfg.model = model_tag_from_string(*m);
  cfg.output_dir = resolve(base_dir, r.get("output").value_or("out"));
  r.number("threads", cfg.threads);
  if (cfg.threads == 0) throw ConfigError("threads must be positive");

  if (auto p = r.get("data.path")) {
    cfg.data_path = resolve(base_dir, *p);
    require_exists("data.path", *cfg.data_path);
  }
  if (auto p = r.get("data.binomial")) {
    cfg.binomial_path = resolve(base_dir, *p);
    require_exists("data.binomial", *cfg.binomial_path);
  }
  if (auto c = r.get("data.cutoff")) cfg.cutoff = parse_date(*c);
  std::map<std::string, std::string> inline_schema;
  for (const auto& [key, value] : cfg.entries) {
    if (key.rfind("schema.", 0) == 0) inline_schema[key.substr(7)] = value;
  }
  if (auto s = r.get("data.schema")) {
    if (!inline_schema.empty()) throw ConfigError("give either data.schema or a [schema] section, not both");
    const auto path = resolve(base_dir, *s);
    require_exists("data.schema", path);
    cfg.schema = SchemaConfig::load(path);
  } else if (!inline_schema.empty()) {
    cfg.schema = SchemaConfig::parse(inline_schema);
  }

  if (cfg.model == ModelTag::discrete) cfg.chain = discrete_default_chain_config();
  r.number("chain.iterations", cfg.chain.iterations);
  r.number("chain.burn_in", cfg.chain.burn_in);
  r.number("chain.thin", cfg.chain.thin);
  r.number("chain.chains", cfg.chain.chains);
  r.flag("chain.store_random_effects", cfg.chain.store_random_effects);
  r.flag("chain.overdispersed_start", cfg.chain.overdispersed_start);
  cfg.chain.seed = cfg.seed;
  cfg.chain.threads = cfg.threads;
  cfg.chain.validate();

  r.number("gaussian.mu_variance", cfg.gaussian.mu_variance);
  r.number("gaussian.tau_variance", cfg.gaussian.tau_variance);
  r.number("gaussian.beta_variance", cfg.gaussian.beta_variance);
  cfg.gaussian.validate();

  r.number("discrete.components", cfg.discrete.components);
  r.number("discrete.beta_variance", cfg.discrete.beta_variance);
  r.flag("discrete.conjugate_atoms", cfg.discrete.conjugate_atoms);
  r.flag("discrete.person_count_weights", cfg.discrete.person_count_weights);
  cfg.discrete.validate();

  r.number("binomial.components", cfg.binomial.components);
  r.number("binomial.a", cfg.binomial.hyper.a);
  r.number("binomial.b", cfg.binomial.hyper.b);
  r.numbers("binomial.weight_prior", cfg.binomial.weight_prior);
  r.number("binomial.max_components", cfg.binomial.max_components);
  r.flag("binomial.collapsed", cfg.binomial.collapsed);

  r.number("predict.max_draws", cfg.predict.max_draws);
  r.number("predict.grid_points", cfg.predict.grid.points);
  r.number("predict.grid_lower", cfg.predict.grid.lower);
  r.number("predict.grid_upper", cfg.predict.grid.upper);
  r.number("predict.interval_level", cfg.predict.interval_level);
  cfg.predict.grid.validate();
  if (!(cfg.predict.interval_level > 0.0 && cfg.predict.interval_level < 1.0)) {
    throw ConfigError("predict.interval_level must lie in (0, 1)");
  }
  cfg.predict.seed = cfg.seed;
  cfg.predict.threads = cfg.threads;

  if (auto schemes = r.list("analyze.schemes")) {
    cfg.analyze.schemes.clear();
    for (const auto& s : *schemes) cfg.analyze.schemes.push_back(scheme_tag_from_string(s));
  }
  r.numbers("analyze.custom_thresholds", cfg.analyze.custom_thresholds);
  r.number("analyze.clusters", cfg.analyze.clusters);
  r.number("analyze.threshold_draws", cfg.analyze.threshold_draws);
  r.number("analyze.interval_threshold", cfg.analyze.interval_threshold);
  r.number("analyze.interval_sample", cfg.analyze.interval_sample);
  r.numbers("analyze.flag_c", cfg.analyze.flag_c);
  r.numbers("analyze.flag_h", cfg.analyze.flag_h);
  r.number("analyze.density_bins", cfg.analyze.density_bins);
  const bool wants_custom = std::find(cfg.analyze.schemes.begin(), cfg.analyze.schemes.end(), SchemeTag::custom) !=
                            cfg.analyze.schemes.end();
  if (wants_custom) {
    RiskGroupScheme custom{SchemeTag::custom, cfg.analyze.custom_thresholds};
    if (custom.thresholds.empty()) throw ConfigError("scheme 'custom' needs analyze.custom_thresholds");
    try {
      custom.validate();
    } catch (const DataError& e) {
      throw ConfigError(std::string("analyze.custom_thresholds: ") + e.what());
    }
  }
  if (cfg.analyze.clusters < 1) throw ConfigError("analyze.clusters must be positive");

  r.number("simulate.p0", cfg.simulate.p0);
  r.numbers("simulate.taus", cfg.simulate.taus);
  r.numbers("simulate.n_points", cfg.simulate.n_points);
  r.number("simulate.replicates", cfg.simulate.replicates);
  r.number("simulate.level", cfg.simulate.level);
  r.number("simulate.grid_points", cfg.simulate.grid.points);
  r.number("simulate.crossing_length", cfg.crossing_length);
  r.number("simulate.crossing_max_n", cfg.crossing_max_n);
  cfg.simulate.seed = cfg.seed;
  cfg.simulate.threads = cfg.threads;
  cfg.simulate.validate();
  r.number("simulate.cohort", cfg.signal_noise.cohort);
  r.numbers("simulate.low_signal", cfg.signal_noise.low_signal);
  r.numbers("simulate.high_signal", cfg.signal_noise.high_signal);
  r.numbers("simulate.noise_taus", cfg.signal_noise.taus);
  cfg.signal_noise.level = cfg.simulate.level;
  cfg.signal_noise.grid = cfg.simulate.grid;
  cfg.signal_noise.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::map<std::string, std::string> entries;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      entries[name] = boost::algorithm::trim_copy(node.data());
    } else {
      for (const auto& [key, leaf] : node) entries[name + "." + key] = boost::algorithm::trim_copy(leaf.data());
    }
  }
  for (const auto& [key, value] : overrides) entries[key] = value;
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_run_config(std::move(entries), base);
}

}  // namespace hprobit
