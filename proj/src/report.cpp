#include "edmik/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace edmik {

namespace {

using nlohmann::json;

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json error_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_error(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

std::string display_name(const TrialBatchResult& r) {
  return r.use_limits ? r.robot_name + "*" : r.robot_name;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "table") return ReportFormat::Table;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw InvalidArgument("unknown report format '" + s + "'");
}

std::string format_table(const TrialBatchResult& result) {
  char line[256];
  std::ostringstream out;
  std::snprintf(line, sizeof line, "%-20s %12s %20s\n", "Robot", "Success (%)", "Mean Runtime (ms)");
  out << line;
  std::snprintf(line, sizeof line, "%-20s %12s %20s\n", display_name(result).c_str(),
                fixed1(100.0 * result.success_rate).c_str(),
                fixed1(1000.0 * result.mean_runtime).c_str());
  out << line;
  return out.str();
}

std::string format_csv(const TrialBatchResult& result) {
  std::ostringstream out;
  out << "robot,use_limits,seed,success,position_error,orientation_error,limit_violation,"
         "iterations,final_cost,solver_status,failure_kind,wall_time_s\n";
  for (const auto& r : result.records) {
    out << result.robot_name << ',' << (result.use_limits ? 1 : 0) << ',' << r.seed << ','
        << (r.success ? 1 : 0) << ',' << exact(r.position_error) << ','
        << exact(r.orientation_error) << ',' << exact(r.limit_violation) << ',' << r.iterations
        << ',' << exact(r.final_cost) << ',' << r.solver_status << ','
        << to_string(r.failure_kind) << ',' << exact(r.wall_time) << '\n';
  }
  return out.str();
}

std::string format_json(const TrialBatchResult& result) {
  json doc;
  doc["robot"] = result.robot_name;
  doc["use_limits"] = result.use_limits;
  doc["base_seed"] = result.base_seed;
  doc["tol_pos"] = result.tol_pos;
  doc["tol_rot"] = result.tol_rot;
  doc["n_trials"] = result.n_trials;
  doc["success_rate"] = result.success_rate;
  doc["success_percent"] = fixed1(100.0 * result.success_rate);
  doc["mean_wall_time_ms"] = 1000.0 * result.mean_runtime;
  json records = json::array();
  for (const auto& r : result.records) {
    records.push_back({{"seed", r.seed},
                       {"success", r.success},
                       {"position_error", error_value(r.position_error)},
                       {"orientation_error", error_value(r.orientation_error)},
                       {"limit_violation", r.limit_violation},
                       {"iterations", r.iterations},
                       {"final_cost", r.final_cost},
                       {"solver_status", r.solver_status},
                       {"failure_kind", to_string(r.failure_kind)},
                       {"wall_time_s", r.wall_time}});
  }
  doc["records"] = records;
  return doc.dump(2) + "\n";
}

TrialBatchResult parse_json_report(const std::string& text) {
  try {
    const json doc = json::parse(text);
    TrialBatchResult r;
    r.robot_name = doc.at("robot").get<std::string>();
    r.use_limits = doc.at("use_limits").get<bool>();
    r.base_seed = doc.at("base_seed").get<std::uint64_t>();
    r.tol_pos = doc.at("tol_pos").get<double>();
    r.tol_rot = doc.at("tol_rot").get<double>();
    r.n_trials = doc.at("n_trials").get<int>();
    r.success_rate = doc.at("success_rate").get<double>();
    r.mean_runtime = doc.at("mean_wall_time_ms").get<double>() / 1000.0;
    for (const auto& j : doc.at("records")) {
      TrialRecord t;
      t.seed = j.at("seed").get<std::uint64_t>();
      t.success = j.at("success").get<bool>();
      t.position_error = read_error(j.at("position_error"));
      t.orientation_error = read_error(j.at("orientation_error"));
      t.limit_violation = j.at("limit_violation").get<double>();
      t.iterations = j.at("iterations").get<int>();
      t.final_cost = j.at("final_cost").get<double>();
      t.solver_status = j.at("solver_status").get<std::string>();
      t.failure_kind = failure_kind_from_string(j.at("failure_kind").get<std::string>());
      t.wall_time = j.at("wall_time_s").get<double>();
      r.records.push_back(std::move(t));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

void emit_report(const TrialBatchResult& result, ReportFormat format, const std::string& path,
                 std::ostream& out) {
  std::string text;
  switch (format) {
    case ReportFormat::Table: text = format_table(result); break;
    case ReportFormat::Csv: text = format_csv(result); break;
    case ReportFormat::Json: text = format_json(result); break;
  }
  if (path.empty() || path == "-") {
    out << text;
    if (!out) throw IoError("failed writing report");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  if (!file.flush()) throw IoError("failed writing '" + path + "'");
}

}  // namespace edmik
