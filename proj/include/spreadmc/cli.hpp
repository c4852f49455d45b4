#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spreadmc/config.hpp"
#include "spreadmc/estimators.hpp"
#include "spreadmc/report.hpp"

namespace spreadmc::cli {

// Exit codes: 0 success, 2 config/validation error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace detail_cli {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<int> threads;
  std::optional<std::string> format;
  std::optional<std::string> out_path;
  std::optional<double> localize;
  std::optional<double> bump_delta;
  std::optional<double> bump_gamma;
  std::optional<double> bump_vega;
  std::optional<std::uint64_t> steps;
  std::optional<std::string> dump_path;
  bool antithetic = false;
  bool timings = false;
  std::vector<std::string> which;
  std::vector<std::string> methods;
};

inline Greek parse_greek(const std::string& name) {
  for (Greek g : kAllGreeks)
    if (name == to_string(g)) return g;
  throw ValidationError("UnknownGreek", "unknown greek \"" + name + "\"");
}

inline std::vector<Greek> parse_which(const std::vector<std::string>& names) {
  std::vector<Greek> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(std::begin(kAllGreeks), std::end(kAllGreeks));
      continue;
    }
    out.push_back(parse_greek(n));
  }
  return out;
}

inline EstimatorTag parse_method(const std::string& name) {
  if (name == "malliavin") return EstimatorTag::malliavin;
  if (name == "fd" || name == "finite_diff") return EstimatorTag::finite_diff;
  if (name == "localized") return EstimatorTag::localized;
  throw ValidationError("UnknownMethod", "unknown method \"" + name + "\"");
}

/// flag > file > default
inline RunSpec assemble_spec(const Config& cfg, const Flags& f) {
  RunSpec spec = make_run_spec(cfg);
  if (f.seed) spec.seed.master_seed = *f.seed;
  if (f.paths) spec.n_paths = *f.paths;
  if (f.threads) spec.n_threads = *f.threads;
  if (f.localize) spec.localization = LocalizationSpec{*f.localize};
  if (f.bump_delta) spec.fd_bumps.delta = *f.bump_delta;
  if (f.bump_gamma) spec.fd_bumps.gamma = *f.bump_gamma;
  if (f.bump_vega) spec.fd_bumps.vega = *f.bump_vega;
  if (f.antithetic) spec.antithetic = true;
  if (f.steps) {
    auto* sv = std::get_if<SvParams>(&spec.model);
    if (sv == nullptr)
      throw ValidationError("StepsRequireSvModel",
                            "--steps applies to the sv model only");
    sv->n_steps = static_cast<std::size_t>(*f.steps);
  }
  return validate(spec);
}

inline void emit(const std::string& text, const OutputSpec& output,
                 const Flags& f, std::ostream& out) {
  const std::optional<std::string>& path =
      f.out_path ? f.out_path : output.path;
  if (path) {
    std::ofstream file(*path, std::ios::binary);
    if (!file)
      throw ValidationError("OutputUnwritable",
                            "cannot open output file " + *path);
    file << text;
  } else {
    out << text;
  }
}

inline ReportFormat resolve_format(const OutputSpec& output, const Flags& f) {
  if (!f.format) return output.format;
  if (*f.format == "csv") return ReportFormat::csv;
  if (*f.format == "json") return ReportFormat::json;
  throw ValidationError("BadConfigValue", "format must be csv or json");
}

inline void maybe_dump(const RunSpec& spec, const Flags& f) {
  if (!f.dump_path) return;
  std::ofstream file(*f.dump_path, std::ios::binary);
  if (!file)
    throw ValidationError("OutputUnwritable",
                          "cannot open dump file " + *f.dump_path);
  dump_driver_summaries(spec, file);
}

inline std::int64_t ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

inline int cmd_price(const Config& cfg, const Flags& f, std::ostream& out) {
  const RunSpec spec = assemble_spec(cfg, f);
  maybe_dump(spec, f);
  const auto t0 = std::chrono::steady_clock::now();
  const GreekEstimate est = estimate_price(spec);
  ReportRow row;
  row.greek = "price";
  row.method = to_string(EstimatorTag::price);
  row.est = est;
  row.variance = est.std_err * est.std_err * static_cast<double>(est.n_paths);
  row.wall_ms = f.timings ? ms_since(t0) : 0;
  emit(render_report({row}, resolve_format(cfg.output, f), {}), cfg.output, f,
       out);
  return kExitOk;
}

inline int cmd_greeks(const Config& cfg, const Flags& f, std::ostream& out) {
  RunSpec spec = assemble_spec(cfg, f);
  const std::vector<Greek> greeks =
      parse_which(f.which.empty() ? std::vector<std::string>{"all"} : f.which);
  std::vector<EstimatorTag> methods;
  for (const auto& name :
       f.methods.empty() ? std::vector<std::string>{"malliavin", "fd"}
                         : f.methods)
    methods.push_back(parse_method(name));

  const bool wants_localized =
      std::find(methods.begin(), methods.end(), EstimatorTag::localized) !=
      methods.end();
  if (wants_localized && !spec.localization)
    spec.localization = LocalizationSpec{default_band_width(spec.market())};

  maybe_dump(spec, f);
  const auto oracle = detail::attach_oracle(spec);

  std::vector<ReportRow> rows;
  for (Greek g : greeks) {
    for (EstimatorTag method : methods) {
      const auto t0 = std::chrono::steady_clock::now();
      GreekEstimate est;
      switch (method) {
        case EstimatorTag::malliavin:
          est = estimate_greek_malliavin(spec, g);
          break;
        case EstimatorTag::localized:
          est = estimate_greek_localized(spec, g);
          break;
        case EstimatorTag::finite_diff:
          est = estimate_greek_fd(spec, g);
          break;
        case EstimatorTag::price:
          throw ValidationError("UnknownMethod",
                                "price is not a greek method");
      }
      ReportRow row;
      row.greek = to_string(g);
      row.method = to_string(method);
      row.est = est;
      row.variance =
          est.std_err * est.std_err * static_cast<double>(est.n_paths);
      row.wall_ms = f.timings ? ms_since(t0) : 0;
      if (oracle) row.oracle = oracle->greek(g);
      rows.push_back(std::move(row));
    }
  }
  ReportOptions opt;
  opt.oracle_column = oracle.has_value();
  emit(render_report(rows, resolve_format(cfg.output, f), opt), cfg.output, f,
       out);
  return kExitOk;
}

inline int cmd_compare(const Config& cfg, const Flags& f, std::ostream& out,
                       std::ostream& err) {
  const RunSpec spec = assemble_spec(cfg, f);
  maybe_dump(spec, f);
  const CompareReport report = compare_report(spec, f.timings);
  ReportOptions opt;
  opt.variance_ratio_column = true;
  opt.oracle_column = detail::attach_oracle(spec).has_value();
  emit(render_report(report.rows, resolve_format(cfg.output, f), opt,
                     &report.metadata),
       cfg.output, f, out);

  for (const auto& row : report.rows)
    if (row.variance_ratio)
      err << "variance ratio (localized/global) " << row.greek << ": "
          << *row.variance_ratio << "\n";
  if (report.metadata.sign_check_z_negative &&
      report.metadata.sign_check_z_positive)
    err << "localized delta1 direct-term sign check vs fd: |z|="
        << *report.metadata.sign_check_z_negative << " (adopted negative), |z|="
        << *report.metadata.sign_check_z_positive << " (flipped)\n";
  return kExitOk;
}

}  // namespace detail_cli

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Monte Carlo pricing and sensitivities for two-asset spread "
               "options"};
  app.require_subcommand(1);
  app.fallthrough();

  detail_cli::Flags flags;
  app.add_option("--config", flags.config_path, "JSON configuration file");
  app.add_option("--seed", flags.seed, "master seed (default 0, never wall-clock)");
  app.add_option("--paths", flags.paths, "Monte Carlo sample count");
  app.add_option("--threads", flags.threads,
                 "worker count (0 = available parallelism)");
  app.add_option("--format", flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", flags.out_path, "report output path");
  app.add_option("--localize", flags.localize, "localization half-width");
  app.add_option("--bump-delta", flags.bump_delta, "relative delta bump");
  app.add_option("--bump-gamma", flags.bump_gamma, "relative gamma bump");
  app.add_option("--bump-vega", flags.bump_vega, "relative vega bump");
  app.add_option("--steps", flags.steps, "Euler steps (sv model only)");
  app.add_option("--dump-paths", flags.dump_path,
                 "write per-path summaries to a binary file (debug)");
  app.add_flag("--antithetic", flags.antithetic, "antithetic pairing");
  app.add_flag("--timings", flags.timings,
               "fill wall_ms columns (reports are no longer byte-stable)");

  auto* price = app.add_subcommand("price", "price the spread option");
  auto* greeks = app.add_subcommand("greeks", "estimate selected greeks");
  greeks->add_option("--which", flags.which,
                     "comma list of greeks or \"all\"")
      ->delimiter(',');
  greeks->add_option("--methods", flags.methods,
                     "comma list of malliavin,fd,localized")
      ->delimiter(',');
  auto* compare = app.add_subcommand(
      "compare", "all estimators side by side on shared seeds");

  std::vector<const char*> argv;
  argv.push_back("spreadmc");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const Config cfg = flags.config_path.empty()
                           ? Config{}
                           : load_config(flags.config_path);
    if (price->parsed()) return detail_cli::cmd_price(cfg, flags, out);
    if (greeks->parsed()) return detail_cli::cmd_greeks(cfg, flags, out);
    if (compare->parsed()) return detail_cli::cmd_compare(cfg, flags, out, err);
    err << "no subcommand given\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "ConfigParseError: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace spreadmc::cli
