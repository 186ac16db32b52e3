#include "embkit/report.hpp"

#include "embkit/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace embkit {

using nlohmann::json;

MetricReport::MetricReport() { root_ = json{{"schema_version", 1}}; }

MetricReport MetricReport::from_json(json j) {
  if (!j.is_object()) throw ValidationError("report: root must be an object");
  if (!j.contains("schema_version"))
    throw ValidationError("report: missing schema_version");
  MetricReport r;
  r.root_ = std::move(j);
  return r;
}

namespace {

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream ss(dotted);
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ValidationError("report: empty path segment");
    parts.push_back(part);
  }
  if (parts.empty()) throw ValidationError("report: empty path");
  return parts;
}

void check_finite(const json& j, const std::string& where) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v))
      throw ValidationError("report: non-finite number at " + where);
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      check_finite(it.value(), where + "." + it.key());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      check_finite(j[i], where + "[" + std::to_string(i) + "]");
  }
}

} // namespace

void MetricReport::set(const std::string& dotted_path, json value) {
  json* node = &root_;
  for (const auto& part : split_path(dotted_path)) {
    if (node->is_null()) *node = json::object();
    if (!node->is_object())
      throw ValidationError("report: path collides with non-object");
    node = &(*node)[part];
  }
  *node = std::move(value);
}

const json* MetricReport::get(const std::string& dotted_path) const {
  const json* node = &root_;
  for (const auto& part : split_path(dotted_path)) {
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
  }
  return node;
}

void write_report(const MetricReport& report, const std::string& path) {
  check_finite(report.root(), "$");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << report.root().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

MetricReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return MetricReport::from_json(std::move(j));
}

namespace {
void merge_json(json& dst, const json& src) {
  if (!dst.is_object() || !src.is_object()) {
    dst = src;
    return;
  }
  for (auto it = src.begin(); it != src.end(); ++it) {
    if (dst.contains(it.key()))
      merge_json(dst[it.key()], it.value());
    else
      dst[it.key()] = it.value();
  }
}
} // namespace

void merge_report(MetricReport& dst, const MetricReport& src) {
  merge_json(dst.root(), src.root());
}

} // namespace embkit
