#include "plc/metrics/report_io.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "plc/core/fileio.hpp"

namespace plc::metrics {

using nlohmann::json;

std::string reports_to_json(const std::vector<MetricsReport>& rows) {
  if (rows.empty()) throw std::invalid_argument("reports_to_json: no rows");
  json doc;
  doc["unit"] = unit_tag(rows.front().unit);
  if (rows.front().canvas) doc["canvas"] = {rows.front().canvas->height, rows.front().canvas->width};
  doc["instances"] = rows.front().instances.size();
  json out_rows = json::array();
  for (const auto& r : rows) {
    json row;
    row["method"] = r.method;
    row["smooth_l1"] = r.smooth_l1;
    row["l2"] = r.l2;
    row["chamfer"] = r.chamfer;
    if (r.has_iou()) row["lane_iou"] = {{"1", r.lane_iou[0]}, {"2", r.lane_iou[1]}, {"3", r.lane_iou[2]}};
    json per = json::array();
    for (const auto& m : r.instances) {
      json item{{"track_id", m.track_id}, {"smooth_l1", m.smooth_l1}, {"l2", m.l2}, {"chamfer", m.chamfer}};
      if (r.has_iou()) item["lane_iou"] = {m.lane_iou[0], m.lane_iou[1], m.lane_iou[2]};
      per.push_back(std::move(item));
    }
    row["per_instance"] = std::move(per);
    out_rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(out_rows);
  return doc.dump(2) + "\n";
}

std::vector<MetricsReport> reports_from_json(const std::string& text) {
  const json doc = json::parse(text);
  const Unit unit = unit_from_tag(doc.at("unit").get<std::string>());
  std::optional<Canvas> canvas;
  if (doc.contains("canvas")) canvas = Canvas{doc["canvas"].at(0).get<int>(), doc["canvas"].at(1).get<int>()};
  std::vector<MetricsReport> rows;
  for (const auto& row : doc.at("rows")) {
    MetricsReport r;
    r.method = row.at("method").get<std::string>();
    r.unit = unit;
    r.canvas = canvas;
    r.smooth_l1 = row.at("smooth_l1").get<double>();
    r.l2 = row.at("l2").get<double>();
    r.chamfer = row.at("chamfer").get<double>();
    if (row.contains("lane_iou")) {
      for (int k = 0; k < 3; ++k) r.lane_iou[k] = row["lane_iou"].at(std::to_string(k + 1)).get<double>();
    }
    for (const auto& item : row.at("per_instance")) {
      InstanceMetrics m;
      m.track_id = item.at("track_id").get<int>();
      m.smooth_l1 = item.at("smooth_l1").get<double>();
      m.l2 = item.at("l2").get<double>();
      m.chamfer = item.at("chamfer").get<double>();
      if (item.contains("lane_iou")) {
        for (int k = 0; k < 3; ++k) m.lane_iou[k] = item["lane_iou"].at(k).get<double>();
      }
      r.instances.push_back(m);
    }
    if (r.instances.size() != doc.at("instances").get<std::size_t>()) {
      throw std::invalid_argument("metrics report: instance count mismatch in row '" + r.method + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string reports_to_table(const std::vector<MetricsReport>& rows) {
  if (rows.empty()) return {};
  const std::string u = unit_tag(rows.front().unit);
  std::ostringstream os;
  char line[256];
  if (rows.front().canvas) {
    os << "canvas " << rows.front().canvas->height << "x" << rows.front().canvas->width << ", ";
  }
  os << rows.front().instances.size() << " lane instances\n";
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %14s %10s %10s\n", "method", "IoU-1p", "IoU-2ps",
                "IoU-3ps", ("smooth-L1(" + u + ")").c_str(), ("L2(" + u + ")").c_str(),
                ("CD(" + u + ")").c_str());
  os << line;
  for (const auto& r : rows) {
    if (r.has_iou()) {
      std::snprintf(line, sizeof line, "%-12s %7.1f%% %7.1f%% %7.1f%% %14.4f %10.4f %10.4f\n",
                    r.method.c_str(), 100 * r.lane_iou[0], 100 * r.lane_iou[1], 100 * r.lane_iou[2],
                    r.smooth_l1, r.l2, r.chamfer);
    } else {
      std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %14.4f %10.4f %10.4f\n", r.method.c_str(), "-",
                    "-", "-", r.smooth_l1, r.l2, r.chamfer);
    }
    os << line;
  }
  return os.str();
}

void write_reports(const std::filesystem::path& path, const std::vector<MetricsReport>& rows) {
  write_file_atomic(path, reports_to_json(rows));
}

std::vector<MetricsReport> read_reports(const std::filesystem::path& path) {
  try {
    return reports_from_json(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path, e.what());
  }
}

}  // namespace plc::metrics
