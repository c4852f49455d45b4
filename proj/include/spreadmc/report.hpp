#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "spreadmc/estimators.hpp"

namespace spreadmc {

enum class ReportFormat { csv, json };

/// Column selection: price reports use the base schema, greeks reports attach
/// the oracle column when an analytic reference applies, compare reports add
/// the localized/global variance ratio.
struct ReportOptions {
  bool variance_ratio_column = false;
  bool oracle_column = false;
};

namespace detail {

/// Shortest round-trip decimal form, so equal doubles always print the same.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter representations
    for (int prec = 1; prec < 17; ++prec) {
      char t[32];
      std::snprintf(t, sizeof(t), "%.*g", prec, v);
      std::sscanf(t, "%lf", &back);
      if (back == v) return t;
    }
  }
  return buf;
}

}  // namespace detail

inline std::string to_csv(const std::vector<ReportRow>& rows,
                          const ReportOptions& opt = {}) {
  std::string out =
      "greek,method,estimate,std_err,ci_low,ci_high,variance,n_paths,wall_ms";
  if (opt.variance_ratio_column) out += ",variance_ratio";
  if (opt.oracle_column) out += ",oracle";
  out += '\n';
  for (const auto& row : rows) {
    out += row.greek;
    out += ',';
    out += row.method;
    out += ',';
    out += detail::format_double(row.est.value);
    out += ',';
    out += detail::format_double(row.est.std_err);
    out += ',';
    out += detail::format_double(row.est.ci_low);
    out += ',';
    out += detail::format_double(row.est.ci_high);
    out += ',';
    out += detail::format_double(row.variance);
    out += ',';
    out += std::to_string(row.est.n_paths);
    out += ',';
    out += std::to_string(row.wall_ms);
    if (opt.variance_ratio_column) {
      out += ',';
      if (row.variance_ratio)
        out += detail::format_double(*row.variance_ratio);
    }
    if (opt.oracle_column) {
      out += ',';
      if (row.oracle) out += detail::format_double(*row.oracle);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json rows_to_json(const std::vector<ReportRow>& rows,
                                           const ReportOptions& opt = {}) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["greek"] = row.greek;
    j["method"] = row.method;
    j["estimate"] = row.est.value;
    j["std_err"] = row.est.std_err;
    j["ci_low"] = row.est.ci_low;
    j["ci_high"] = row.est.ci_high;
    j["variance"] = row.variance;
    j["n_paths"] = row.est.n_paths;
    j["wall_ms"] = row.wall_ms;
    if (opt.variance_ratio_column)
      j["variance_ratio"] = row.variance_ratio
                                ? nlohmann::ordered_json(*row.variance_ratio)
                                : nlohmann::ordered_json(nullptr);
    if (opt.oracle_column)
      j["oracle"] = row.oracle ? nlohmann::ordered_json(*row.oracle)
                               : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::ordered_json metadata_to_json(const CompareMetadata& md) {
  nlohmann::ordered_json j;
  j["localized_direct_sign"] = md.localized_direct_sign;
  j["sign_check_z_negative"] =
      md.sign_check_z_negative ? nlohmann::ordered_json(*md.sign_check_z_negative)
                               : nlohmann::ordered_json(nullptr);
  j["sign_check_z_positive"] =
      md.sign_check_z_positive ? nlohmann::ordered_json(*md.sign_check_z_positive)
                               : nlohmann::ordered_json(nullptr);
  j["floor_hits"] = md.floor_hits;
  j["feller_warning"] = md.feller_warning;
  return j;
}

inline std::string render_report(const std::vector<ReportRow>& rows,
                                 ReportFormat format, const ReportOptions& opt,
                                 const CompareMetadata* metadata = nullptr) {
  if (format == ReportFormat::csv) return to_csv(rows, opt);
  nlohmann::ordered_json doc;
  doc["rows"] = rows_to_json(rows, opt);
  if (metadata != nullptr) doc["metadata"] = metadata_to_json(*metadata);
  return doc.dump(2) + "\n";
}

}  // namespace spreadmc
