#pragma once

#include <json.hpp>

#include <string>

namespace embkit {

/**
 * Serializable record of computed metrics. A thin wrapper over a JSON
 * object pinned to `schema_version: 1`; sections are nested objects keyed
 * by metric family ("alignment", "ranking", ...).
 */
class MetricReport {
public:
  MetricReport();
  static MetricReport from_json(nlohmann::json j);

  nlohmann::json& root() { return root_; }
  const nlohmann::json& root() const { return root_; }

  // Dotted-path setter: set("alignment.value", 0.4) creates the nesting.
  void set(const std::string& dotted_path, nlohmann::json value);
  const nlohmann::json* get(const std::string& dotted_path) const;

private:
  nlohmann::json root_;
};

// Serializes as pretty JSON. Non-finite numbers are rejected: a NaN in a
// report means an upstream computation went wrong, not something to persist.
void write_report(const MetricReport& report, const std::string& path);
MetricReport read_report(const std::string& path);

// Recursive merge, src values winning on conflicts.
void merge_report(MetricReport& dst, const MetricReport& src);

} // namespace embkit
