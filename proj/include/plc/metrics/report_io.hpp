#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plc/metrics/metrics.hpp"

namespace plc::metrics {

// A metrics file holds one or more report rows (e.g. "initial" and
// "corrected") evaluated on the same pairs. Layout, as JSON:
//   {"unit": "p", "canvas": [H, W], "instances": N,
//    "rows": [{"method", "smooth_l1", "l2", "chamfer", "lane_iou": {"1","2","3"},
//              "per_instance": [...]}, ...]}
std::string reports_to_json(const std::vector<MetricsReport>& rows);
std::vector<MetricsReport> reports_from_json(const std::string& text);

// Column layout: method | lane-IoU 1p 2ps 3ps | smooth-L1 | L2 | CD, with unit tags.
std::string reports_to_table(const std::vector<MetricsReport>& rows);

void write_reports(const std::filesystem::path& path, const std::vector<MetricsReport>& rows);
std::vector<MetricsReport> read_reports(const std::filesystem::path& path);

}  // namespace plc::metrics
