#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spreadmc/estimators.hpp"
#include "spreadmc/report.hpp"

namespace spreadmc {

/// Run-section values from a config file. Everything is optional; values win
/// over built-in defaults and lose to command-line flags.
struct RunOverrides {
  std::optional<std::uint64_t> n_paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> batch_size;
  std::optional<bool> antithetic;
  std::optional<double> localization_a;
  std::optional<double> bump_delta;
  std::optional<double> bump_gamma;
  std::optional<double> bump_vega;
};

struct OutputSpec {
  ReportFormat format = ReportFormat::csv;
  std::optional<std::string> path;
};

struct Config {
  ModelParams model = MarketParams{};
  RunOverrides run;
  OutputSpec output;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::string& section,
                                const std::vector<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ValidationError("UnknownConfigKey",
                            "unknown key \"" + it.key() + "\" in " + section);
  }
}

inline double as_double(const nlohmann::json& j, const std::string& key) {
  if (!j.at(key).is_number())
    throw ValidationError("BadConfigValue", key + " must be a number");
  return j.at(key).get<double>();
}

inline std::uint64_t as_uint(const nlohmann::json& j, const std::string& key) {
  if (!j.at(key).is_number_unsigned())
    throw ValidationError("BadConfigValue",
                          key + " must be a non-negative integer");
  return j.at(key).get<std::uint64_t>();
}

inline void read_market(const nlohmann::json& j, MarketParams& m) {
  reject_unknown_keys(j, "model section",
                      {"x1", "x2", "sigma1", "sigma2", "rho", "r", "q1", "q2",
                       "strike", "maturity", "kappa", "nu", "v0", "n_steps"});
  if (j.contains("x1")) m.x1 = as_double(j, "x1");
  if (j.contains("x2")) m.x2 = as_double(j, "x2");
  if (j.contains("sigma1")) m.sigma1 = as_double(j, "sigma1");
  if (j.contains("sigma2")) m.sigma2 = as_double(j, "sigma2");
  if (j.contains("rho")) m.rho = as_double(j, "rho");
  if (j.contains("r")) m.r = as_double(j, "r");
  if (j.contains("q1")) m.q1 = as_double(j, "q1");
  if (j.contains("q2")) m.q2 = as_double(j, "q2");
  if (j.contains("strike")) m.strike = as_double(j, "strike");
  if (j.contains("maturity")) m.maturity = as_double(j, "maturity");
}

}  // namespace detail

/// Parses the JSON configuration document. Exactly one model section ("gbm"
/// or "sv") must be present; unknown keys are rejected everywhere.
inline Config parse_config(const nlohmann::json& doc) {
  if (!doc.is_object())
    throw ValidationError("BadConfigValue", "config root must be an object");
  detail::reject_unknown_keys(doc, "config", {"gbm", "sv", "run", "output"});

  const bool has_gbm = doc.contains("gbm");
  const bool has_sv = doc.contains("sv");
  if (has_gbm == has_sv)
    throw ValidationError("BadModelSection",
                          "exactly one of \"gbm\" or \"sv\" must be present");

  Config cfg;
  if (has_gbm) {
    const auto& j = doc.at("gbm");
    for (const char* sv_only : {"kappa", "nu", "v0", "n_steps"})
      if (j.contains(sv_only))
        throw ValidationError("UnknownConfigKey",
                              std::string("key \"") + sv_only +
                                  "\" is not a gbm parameter");
    MarketParams m;
    detail::read_market(j, m);
    cfg.model = m;
  } else {
    const auto& j = doc.at("sv");
    SvParams p;
    detail::read_market(j, p.base);
    if (j.contains("kappa")) p.kappa = detail::as_double(j, "kappa");
    if (j.contains("nu")) p.nu = detail::as_double(j, "nu");
    if (j.contains("v0")) p.v0 = detail::as_double(j, "v0");
    if (j.contains("n_steps"))
      p.n_steps = static_cast<std::size_t>(detail::as_uint(j, "n_steps"));
    cfg.model = p;
  }

  if (doc.contains("run")) {
    const auto& j = doc.at("run");
    detail::reject_unknown_keys(j, "run section",
                                {"n_paths", "seed", "batch_size", "antithetic",
                                 "localization", "fd_bumps"});
    if (j.contains("n_paths")) cfg.run.n_paths = detail::as_uint(j, "n_paths");
    if (j.contains("seed")) cfg.run.seed = detail::as_uint(j, "seed");
    if (j.contains("batch_size"))
      cfg.run.batch_size =
          static_cast<std::uint32_t>(detail::as_uint(j, "batch_size"));
    if (j.contains("antithetic")) {
      if (!j.at("antithetic").is_boolean())
        throw ValidationError("BadConfigValue", "antithetic must be a bool");
      cfg.run.antithetic = j.at("antithetic").get<bool>();
    }
    if (j.contains("localization")) {
      const auto& l = j.at("localization");
      detail::reject_unknown_keys(l, "localization section", {"a"});
      cfg.run.localization_a = detail::as_double(l, "a");
    }
    if (j.contains("fd_bumps")) {
      const auto& b = j.at("fd_bumps");
      detail::reject_unknown_keys(b, "fd_bumps section",
                                  {"delta", "gamma", "vega"});
      if (b.contains("delta")) cfg.run.bump_delta = detail::as_double(b, "delta");
      if (b.contains("gamma")) cfg.run.bump_gamma = detail::as_double(b, "gamma");
      if (b.contains("vega")) cfg.run.bump_vega = detail::as_double(b, "vega");
    }
  }

  if (doc.contains("output")) {
    const auto& j = doc.at("output");
    detail::reject_unknown_keys(j, "output section", {"format", "path"});
    if (j.contains("format")) {
      const std::string f = j.at("format").get<std::string>();
      if (f == "csv")
        cfg.output.format = ReportFormat::csv;
      else if (f == "json")
        cfg.output.format = ReportFormat::json;
      else
        throw ValidationError("BadConfigValue",
                              "output format must be csv or json");
    }
    if (j.contains("path"))
      cfg.output.path = j.at("path").get<std::string>();
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("ConfigFileUnreadable",
                          "cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("ConfigParseError", e.what());
  }
  return parse_config(doc);
}

/// Builds the RunSpec with precedence flag > file > default. Flag values are
/// applied by the CLI layer after this call.
inline RunSpec make_run_spec(const Config& cfg) {
  RunSpec spec;
  spec.model = cfg.model;
  if (cfg.run.n_paths) spec.n_paths = *cfg.run.n_paths;
  if (cfg.run.seed) spec.seed.master_seed = *cfg.run.seed;
  if (cfg.run.batch_size) spec.seed.batch_size = *cfg.run.batch_size;
  if (cfg.run.antithetic) spec.antithetic = *cfg.run.antithetic;
  if (cfg.run.localization_a)
    spec.localization = LocalizationSpec{*cfg.run.localization_a};
  if (cfg.run.bump_delta) spec.fd_bumps.delta = *cfg.run.bump_delta;
  if (cfg.run.bump_gamma) spec.fd_bumps.gamma = *cfg.run.bump_gamma;
  if (cfg.run.bump_vega) spec.fd_bumps.vega = *cfg.run.bump_vega;
  return spec;
}

}  // namespace spreadmc
