#include "hprobit/cli.hpp"

#include "hprobit/binomial_mixture.hpp"
#include "hprobit/config.hpp"
#include "hprobit/diagnostics.hpp"
#include "hprobit/errors.hpp"
#include "hprobit/gibbs_discrete.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "hprobit/risk.hpp"
#include "hprobit/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace hprobit {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

// Outputs of one command are written into a staging directory that replaces
// <output>/<command> only once everything succeeded.
class Staging {
 public:
  Staging(const fs::path& output_dir, const std::string& command) : final_(output_dir / command) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory {}: {}", output_dir.string(), ec.message()));
    staging_ = output_dir / fmt::format(".staging-{}", command);
    fs::remove_all(staging_, ec);
    fs::create_directories(staging_, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", staging_.string(), ec.message()));
  }

  ~Staging() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  fs::path file(const std::string& name) {
    names_.push_back(name);
    return staging_ / name;
  }

  void commit(Json manifest) {
    Json files = Json::array();
    std::vector<std::string> names = names_;
    std::sort(names.begin(), names.end());
    for (const auto& n : names) files.push_back({{"name", n}, {"fnv1a", hex64(fnv1a(read_file(staging_ / n)))}});
    manifest["files"] = files;
    write_text(staging_ / "manifest.json", manifest.dump(2) + "\n");
    std::error_code ec;
    fs::remove_all(final_, ec);
    fs::rename(staging_, final_, ec);
    if (ec) throw IoError(fmt::format("cannot move outputs into {}: {}", final_.string(), ec.message()));
    committed_ = true;
  }

  const fs::path& final_dir() const { return final_; }

 private:
  fs::path final_;
  fs::path staging_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.entries) {
    if (k == "threads" || k == "output") continue;
    j[k] = v;
  }
  return j;
}

Json manifest_for(const std::string& command, const RunConfig& cfg) {
  Json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["model"] = to_string(cfg.model);
  m["seed"] = cfg.seed;
  m["config_hash"] = hex64(cfg.hash());
  m["config"] = config_json(cfg);
  return m;
}

struct PreparedPanel {
  PanelDataset full;   // standardized with training parameters
  PanelDataset train;  // standardized
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> holdout_rows;
  StandardizationParams params;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::string> warnings;
};

PreparedPanel prepare_panel(const RunConfig& cfg, std::ostream& err) {
  if (!cfg.data_path) throw ConfigError("data.path is required for this command");
  if (!cfg.schema) throw ConfigError("a schema (data.schema or [schema]) is required for this command");
  auto ingest = ingest_csv(*cfg.data_path, *cfg.schema);
  PreparedPanel out;
  out.rows_read = ingest.rows_read;
  out.rows_dropped = ingest.rows_dropped;
  out.warnings = ingest.warnings;
  const PanelDataset& raw = ingest.dataset;
  if (raw.empty()) throw DataError("no usable rows in " + cfg.data_path->string());
  PanelDataset train_raw = raw;
  if (cfg.cutoff) train_raw = split_train_holdout(raw, *cfg.cutoff).first;
  auto train = standardize(train_raw);
  for (auto& w : train.warnings) out.warnings.push_back(w);
  out.params = train.params;
  out.train = std::move(train.dataset);
  out.full = standardize(raw, out.params).dataset;
  for (std::size_t r = 0; r < out.full.observations(); ++r) {
    const bool holdout = cfg.cutoff && out.full.dates()[r] > *cfg.cutoff;
    (holdout ? out.holdout_rows : out.train_rows).push_back(r);
  }
  if (!cfg.cutoff) out.holdout_rows = out.train_rows;
  for (const auto& w : out.warnings) err << "warning: " << w << '\n';
  return out;
}

void write_standardization(const PanelDataset& data, const StandardizationParams& params, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "covariate,mean,sd\n";
  for (std::size_t c = 0; c < params.mean.size(); ++c) {
    out << data.covariate_names()[c] << ',' << format_number(params.mean[c]) << ',' << format_number(params.sd[c])
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ProgressFn progress_printer(std::ostream& err, std::size_t iterations, bool quiet) {
  if (quiet) return {};
  auto mutex = std::make_shared<std::mutex>();
  const std::size_t step = std::max<std::size_t>(1, iterations / 10);
  return [&err, iterations, step, mutex](std::size_t chain, std::size_t it) {
    if (it % step != 0 && it != iterations) return;
    std::lock_guard lock(*mutex);
    err << fmt::format("chain {}: iteration {}/{}\n", chain + 1, it, iterations);
  };
}

void print_summary(std::ostream& out, const std::vector<ParameterSummary>& rows) {
  out << fmt::format("{:<14} {:>10} {:>10} {:>10} {:>10} {:>7} {:>9}\n", "parameter", "mean", "sd", "q2.5", "q97.5",
                     "rhat", "ess");
  for (const auto& s : rows) {
    out << fmt::format("{:<14} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f} {:>7.3f} {:>9.1f}\n", s.name, s.mean, s.sd,
                       s.q025, s.q975, s.rhat, s.ess);
  }
}

Json draws_sidecar(const RunConfig& cfg, const ChainDraws& draws) {
  Json j;
  j["model"] = to_string(draws.model);
  j["seed"] = cfg.seed;
  j["version"] = kVersion;
  j["iterations"] = cfg.chain.iterations;
  j["burn_in"] = cfg.chain.burn_in;
  j["thin"] = cfg.chain.thin;
  j["chains"] = cfg.chain.chains;
  j["columns"] = draws.columns;
  j["config"] = config_json(cfg);
  return j;
}

int cmd_fit(const RunConfig& cfg, bool quiet, std::ostream& out, std::ostream& err) {
  Staging stage(cfg.output_dir, "fit");
  auto progress = progress_printer(err, cfg.chain.iterations, quiet);
  Json sidecar;
  std::vector<ParameterSummary> summary;

  if (cfg.model == ModelTag::binomial_mixture) {
    if (!cfg.binomial_path) throw ConfigError("data.binomial is required for the binomial-mixture model");
    const auto data = read_binomial_csv(*cfg.binomial_path);
    const auto fit = fit_binomial_mixture(data, cfg.binomial, cfg.chain, progress);
    write_draws_csv(fit.draws, stage.file("draws.csv"));
    {
      std::ofstream f(stage.file("assignment_probabilities.csv"), std::ios::binary);
      f << "unit";
      for (Eigen::Index j = 0; j < fit.assignment_probabilities.cols(); ++j) f << ",component_" << j + 1;
      f << '\n';
      for (Eigen::Index i = 0; i < fit.assignment_probabilities.rows(); ++i) {
        f << i + 1;
        for (Eigen::Index j = 0; j < fit.assignment_probabilities.cols(); ++j) {
          f << ',' << format_number(fit.assignment_probabilities(i, j));
        }
        f << '\n';
      }
      if (!f) throw IoError("failed writing assignment probabilities");
    }
    summary = summarize(fit.draws, {"occupied"});
    sidecar = draws_sidecar(cfg, fit.draws);
    sidecar["observations"] = data.size();
    sidecar["beta_marginal_log_likelihood"] = beta_marginal_log_likelihood(data, cfg.binomial.hyper);
  } else {
    const auto panel = prepare_panel(cfg, err);
    write_standardization(panel.train, panel.params, stage.file("standardization.csv"));
    ChainDraws draws;
    std::vector<std::string> report;
    if (cfg.model == ModelTag::gaussian) {
      auto fit = run_chain(panel.train, cfg.gaussian, cfg.chain, progress);
      draws = std::move(fit.draws);
      report = gaussian_global_columns(panel.train.covariates());
    } else {
      auto fit = run_chain_discrete(panel.train, cfg.discrete, cfg.chain, progress);
      draws = std::move(fit.draws);
      for (std::size_t k = 0; k < panel.train.covariates(); ++k) report.push_back(fmt::format("beta_{}", k + 1));
      report.push_back("occupied");
      std::ofstream f(stage.file("occupancy.csv"), std::ios::binary);
      f << "occupied,draws,probability\n";
      for (const auto& [q, n] : fit.occupancy) {
        f << q << ',' << n << ',' << format_number(static_cast<double>(n) / static_cast<double>(draws.total_draws()))
          << '\n';
      }
      if (!f) throw IoError("failed writing occupancy table");
    }
    write_draws_csv(draws, stage.file("draws.csv"));
    summary = summarize(draws, report);
    sidecar = draws_sidecar(cfg, draws);
    sidecar["covariates"] = panel.train.covariate_names();
    sidecar["persons"] = panel.train.persons();
    sidecar["observations"] = panel.train.observations();
    sidecar["rows_read"] = panel.rows_read;
    sidecar["rows_dropped"] = panel.rows_dropped;
    sidecar["warnings"] = panel.warnings;
  }
  write_summary_csv(summary, stage.file("summary.csv"));
  write_text(stage.file("draws.json"), sidecar.dump(2) + "\n");
  print_summary(out, summary);
  stage.commit(manifest_for("fit", cfg));
  out << "wrote " << stage.final_dir().string() << '\n';
  return exit_ok;
}

ChainDraws load_fit_draws(const RunConfig& cfg, const std::optional<fs::path>& draws_path) {
  const fs::path path = draws_path ? *draws_path : cfg.output_dir / "fit" / "draws.csv";
  if (!fs::exists(path)) throw IoError("no draws at " + path.string() + "; run 'fit' first or pass --draws");
  const auto sidecar = path.parent_path() / "draws.json";
  if (fs::exists(sidecar)) {
    const auto j = Json::parse(read_file(sidecar), nullptr, false);
    if (!j.is_discarded() && j.contains("model") && j["model"].get<std::string>() != to_string(cfg.model)) {
      throw ConfigError(fmt::format("draws were produced by the {} model but the config selects {}",
                                    j["model"].get<std::string>(), to_string(cfg.model)));
    }
  }
  return read_draws_csv(path, cfg.model);
}

int cmd_predict(const RunConfig& cfg, const std::optional<fs::path>& draws_path, std::ostream& out, std::ostream& err) {
  if (cfg.model == ModelTag::binomial_mixture) throw ConfigError("predict needs a gaussian or discrete fit");
  const auto panel = prepare_panel(cfg, err);
  const auto draws = load_fit_draws(cfg, draws_path);
  Staging stage(cfg.output_dir, "predict");
  const auto globals = extract_global_draws(draws, panel.full.covariates(), cfg.predict.max_draws);
  const auto summary = predictive_samples(panel.full, panel.holdout_rows, globals, cfg.predict);
  write_predictive_csv(panel.full, summary, stage.file("predictive.csv"));
  stage.commit(manifest_for("predict", cfg));
  out << fmt::format("predicted {} occasions with {} draws\n", summary.size(), globals.size());
  out << "wrote " << stage.final_dir().string() << '\n';
  return exit_ok;
}

int cmd_analyze(const RunConfig& cfg, const std::optional<fs::path>& draws_path, std::ostream& out,
                std::ostream& err) {
  if (cfg.model == ModelTag::binomial_mixture) throw ConfigError("analyze needs a gaussian or discrete fit");
  const auto panel = prepare_panel(cfg, err);
  const auto draws = load_fit_draws(cfg, draws_path);
  Staging stage(cfg.output_dir, "analyze");
  const auto& opts = cfg.analyze;
  std::vector<std::string> warnings;

  const auto globals = extract_global_draws(draws, panel.full.covariates(), cfg.predict.max_draws);
  const auto summary = predictive_samples(panel.full, panel.holdout_rows, globals, cfg.predict);
  write_predictive_csv(panel.full, summary, stage.file("predictive.csv"));

  const auto threshold_globals = extract_global_draws(draws, panel.full.covariates(), opts.threshold_draws);
  std::vector<double> train_hat;
  auto train_estimates = [&]() -> const std::vector<double>& {
    if (train_hat.empty()) train_hat = expected_pstar(panel.full, panel.train_rows, threshold_globals, cfg.predict);
    return train_hat;
  };

  std::vector<RiskGroupScheme> schemes;
  for (auto tag : opts.schemes) {
    switch (tag) {
      case SchemeTag::psa_midpoint: {
        const auto rates = external_group_rates(panel.full, panel.holdout_rows);
        if (rates.empty()) {
          warnings.push_back("no external risk groups in the holdout; psa_midpoint skipped");
          continue;
        }
        schemes.push_back(thresholds_psa_midpoint(rates));
        break;
      }
      case SchemeTag::psa_sized: {
        const auto& hat = train_estimates();
        std::vector<double> values;
        std::vector<std::size_t> sizes;
        for (std::size_t s = 0; s < panel.train_rows.size(); ++s) {
          const auto g = panel.full.external_groups()[panel.train_rows[s]];
          if (!g) continue;
          values.push_back(hat[s]);
          if (static_cast<std::size_t>(*g) > sizes.size()) sizes.resize(static_cast<std::size_t>(*g), 0);
          ++sizes[static_cast<std::size_t>(*g - 1)];
        }
        if (values.empty()) {
          warnings.push_back("no external risk groups in the training data; psa_sized skipped");
          continue;
        }
        schemes.push_back(thresholds_equal_count(values, sizes));
        break;
      }
      case SchemeTag::clustered:
        schemes.push_back(thresholds_kmeans_1d(train_estimates(), opts.clusters));
        break;
      case SchemeTag::custom:
        schemes.push_back({SchemeTag::custom, opts.custom_thresholds});
        break;
    }
  }
  write_scheme_csv(schemes, stage.file("schemes.csv"));

  Json report;
  report["holdout_occasions"] = summary.size();
  report["draws"] = globals.size();
  report["schemes"] = Json::array();
  for (const auto& scheme : schemes) {
    const auto name = to_string(scheme.tag);
    const auto calibration = calibration_table(summary, scheme, summary.outcomes);
    write_calibration_csv(calibration, stage.file(fmt::format("calibration_{}.csv", name)));
    const auto wrong = wrong_bin_matrix(summary, scheme);
    write_wrong_bin_csv(wrong, stage.file(fmt::format("wrong_bin_{}.csv", name)));
    write_density_csv(group_densities(summary, scheme, opts.density_bins),
                      stage.file(fmt::format("density_{}.csv", name)));
    report["schemes"].push_back({{"scheme", name}, {"thresholds", scheme.thresholds}, {"assigned_mass", wrong.assigned_mass}});
    out << fmt::format("{:<13} P[P_ij in assigned bin] = {:.3f}\n", name, wrong.assigned_mass);
  }
  write_interval_table_csv(interval_length_table(summary), stage.file("interval_lengths.csv"));
  const auto sorted = sorted_intervals(summary, opts.interval_threshold, opts.interval_sample, cfg.seed);
  write_sorted_intervals_csv(panel.full, sorted, stage.file("sorted_intervals.csv"));
  const auto separated = std::count_if(sorted.begin(), sorted.end(), [](const auto& iv) { return iv.separated; });
  report["interval_threshold"] = opts.interval_threshold;
  report["separated_fraction"] = sorted.empty() ? 0.0 : static_cast<double>(separated) / static_cast<double>(sorted.size());
  write_flag_grid_csv(flag_grid(summary, opts.flag_c, opts.flag_h), stage.file("flag_grid.csv"));
  report["warnings"] = warnings;
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  write_text(stage.file("report.json"), report.dump(2) + "\n");
  stage.commit(manifest_for("analyze", cfg));
  out << "wrote " << stage.final_dir().string() << '\n';
  return exit_ok;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  Staging stage(cfg.output_dir, "simulate");
  const auto curve = interval_length_curve(cfg.simulate);
  write_curve_csv(curve, stage.file("curve.csv"));
  {
    std::ofstream f(stage.file("crossing.csv"), std::ios::binary);
    f << "tau,length,first_n\n";
    for (double tau : cfg.simulate.taus) {
      const auto n = first_crossing(cfg.simulate, tau, cfg.crossing_length, cfg.crossing_max_n);
      f << format_number(tau) << ',' << format_number(cfg.crossing_length) << ',' << n << '\n';
      out << fmt::format("tau {}: mean interval length first below {} at n = {}\n", tau, cfg.crossing_length,
                         n ? std::to_string(n) : std::string("never"));
    }
    if (!f) throw IoError("failed writing crossing table");
  }
  const auto sn = signal_noise_intervals(cfg.signal_noise);
  write_signal_noise_csv(sn, stage.file("signal_noise_intervals.csv"), stage.file("signal_noise_overlap.csv"));
  stage.commit(manifest_for("simulate", cfg));
  out << "wrote " << stage.final_dir().string() << '\n';
  return exit_ok;
}

int cmd_diagnose(const RunConfig& cfg, const std::optional<fs::path>& draws_path, std::ostream& out) {
  const auto draws = load_fit_draws(cfg, draws_path);
  Staging stage(cfg.output_dir, "diagnose");
  const auto summary = summarize(draws, draws.columns);
  write_summary_csv(summary, stage.file("diagnostics.csv"));
  std::vector<ParameterSummary> shown;
  double worst_rhat = 0.0, min_ess = std::numeric_limits<double>::infinity();
  for (const auto& s : summary) {
    if (s.name.rfind("theta_", 0) != 0 && s.name.rfind("z_", 0) != 0) shown.push_back(s);
    if (std::isfinite(s.rhat)) worst_rhat = std::max(worst_rhat, s.rhat);
    if (std::isfinite(s.ess)) min_ess = std::min(min_ess, s.ess);
  }
  print_summary(out, shown);
  out << fmt::format("max split R-hat {:.4f}, min ESS {:.1f} over {} columns\n", worst_rhat, min_ess, summary.size());
  stage.commit(manifest_for("diagnose", cfg));
  out << "wrote " << stage.final_dir().string() << '\n';
  return exit_ok;
}

std::string absolute_string(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical random-effects probit models: fitting, prediction and risk-group analysis", "hprobit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::string> output;
    std::optional<std::string> model;
    std::optional<std::string> data;
    std::optional<std::size_t> iterations, burn_in, thin, chains;
    std::optional<std::string> draws;
    std::vector<std::string> set;
    bool quiet = false;
  } opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config, "INI run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "random seed (overrides the config)");
    sub->add_option("--threads", opt.threads, "worker threads; never changes outputs");
    sub->add_option("-o,--output", opt.output, "output directory");
    sub->add_option("--model", opt.model, "gaussian | discrete | binomial-mixture");
    sub->add_option("--data", opt.data, "input CSV (overrides data.path)");
    sub->add_option("--set", opt.set, "override any config key, e.g. --set chain.iterations=500");
    sub->add_flag("-q,--quiet", opt.quiet, "suppress progress output");
  };
  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler and store posterior draws");
  common(fit);
  fit->add_option("--iterations", opt.iterations, "total iterations per chain");
  fit->add_option("--burn-in", opt.burn_in, "iterations discarded per chain");
  fit->add_option("--thin", opt.thin, "keep every k-th post burn-in iteration");
  fit->add_option("--chains", opt.chains, "independent chains");
  auto* predict = app.add_subcommand("predict", "posterior predictive P*_ij and P_ij for holdout occasions");
  common(predict);
  predict->add_option("--draws", opt.draws, "draws CSV (default <output>/fit/draws.csv)");
  auto* analyze = app.add_subcommand("analyze", "risk groups, calibration, wrong-bin, interval and flag exports");
  common(analyze);
  analyze->add_option("--draws", opt.draws, "draws CSV (default <output>/fit/draws.csv)");
  auto* simulate = app.add_subcommand("simulate", "interval length and signal/noise simulation studies");
  common(simulate);
  auto* diagnose = app.add_subcommand("diagnose", "split R-hat and ESS for every stored column");
  common(diagnose);
  diagnose->add_option("--draws", opt.draws, "draws CSV (default <output>/fit/draws.csv)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name() == "--help" ? "" : "");
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }

  try {
    std::map<std::string, std::string> overrides;
    for (const auto& kv : opt.set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (opt.seed) overrides["seed"] = std::to_string(*opt.seed);
    if (opt.threads) overrides["threads"] = std::to_string(*opt.threads);
    if (opt.output) overrides["output"] = absolute_string(*opt.output);
    if (opt.model) overrides["model"] = *opt.model;
    if (opt.data) overrides["data.path"] = absolute_string(*opt.data);
    if (opt.iterations) overrides["chain.iterations"] = std::to_string(*opt.iterations);
    if (opt.burn_in) overrides["chain.burn_in"] = std::to_string(*opt.burn_in);
    if (opt.thin) overrides["chain.thin"] = std::to_string(*opt.thin);
    if (opt.chains) overrides["chain.chains"] = std::to_string(*opt.chains);
    const auto cfg = load_run_config(opt.config, overrides);
    std::optional<fs::path> draws;
    if (opt.draws) draws = fs::absolute(*opt.draws);

    if (fit->parsed()) return cmd_fit(cfg, opt.quiet, out, err);
    if (predict->parsed()) return cmd_predict(cfg, draws, out, err);
    if (analyze->parsed()) return cmd_analyze(cfg, draws, out, err);
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (diagnose->parsed()) return cmd_diagnose(cfg, draws, out);
    return exit_config;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const SamplerError& e) {
    err << "sampler error: " << e.what() << '\n';
    return exit_sampler;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_internal;
  }
}

}  // namespace hprobit
