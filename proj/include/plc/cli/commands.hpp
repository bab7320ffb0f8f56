#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plc/core/types.hpp"
#include "plc/metrics/metrics.hpp"

namespace plc::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitRuntime = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maps the exception currently being handled to an exit code and prints it.
int report_exception();

// File names inside command output directories.
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kTrainLogFile = "train_log.tsv";
inline constexpr const char* kCorrectedDir = "corrected";
inline constexpr const char* kGlobalLanesFile = "global_lanes.json";
inline constexpr const char* kLocalMetricsFile = "metrics_local.json";
inline constexpr const char* kGlobalMetricsFile = "metrics_global.json";

struct SynthSummary {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};
SynthSummary cmd_synth(const std::optional<std::filesystem::path>& config_path, const std::filesystem::path& out_dir,
                       std::optional<std::uint64_t> seed);

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  int epochs = 0;
};
// Trains on <data>/train and writes <out>/model.ckpt and <out>/train_log.tsv.
TrainSummary cmd_train(const std::optional<std::filesystem::path>& config_path, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed, bool verbose = true);

// Tab-separated "epoch seg_loss offset_loss lr" with a header row.
struct TrainLogRow {
  int epoch = 0;
  double seg_loss = 0;
  double offset_loss = 0;
  double lr = 0;
};
std::vector<TrainLogRow> read_train_log(const std::filesystem::path& path);

struct EvalSummary {
  std::size_t samples = 0;
  std::size_t global_lanes = 0;
  std::vector<metrics::MetricsReport> local;   // "initial", "corrected"; empty if no ground truth
  std::vector<metrics::MetricsReport> global;
};
// Corrects every sample of <data>/<split>, writes <out>/corrected/<id>.json,
// merges them into <out>/global_lanes.json and evaluates both in network
// pixels and in meters against ground truth.
EvalSummary cmd_correct_merge_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
                                   const std::filesystem::path& out_dir, const std::string& split = "test");

// {"lanes": [{"track_id": t, "points": [[X, Y], ...]}, ...]}
void write_global_lanes(const std::filesystem::path& path, const std::vector<GlobalLane>& lanes);
std::vector<GlobalLane> read_global_lanes(const std::filesystem::path& path);

inline constexpr int kMarkerRadius = 2;
inline constexpr int kDefaultRenderPoints = 32;

// Colour assigned to a track id.
std::array<std::uint8_t, 3> track_color(int track_id);

struct Overlay {
  PointCloudImage image;
  int markers = 0;
};
// Initial lanes as diamonds, corrected as squares, ground truth as circles,
// all in their track colour; ground truth drawn last. Initial and ground-truth
// lanes are resampled to the point count of the corrected lane with the same
// track id (kDefaultRenderPoints if there is none).
Overlay render_overlay(const Sample& sample, const std::vector<LaneInstance>& corrected);

struct RenderSummary {
  std::size_t images = 0;
  int markers = 0;
};
// One <out>/<id>_overlay.ppm per sample of <data>/<split>. `lanes_dir` holds
// corrected-lane annotations; one naming an unknown sample is a data error.
RenderSummary cmd_render(const std::filesystem::path& data_dir, const std::optional<std::filesystem::path>& lanes_dir,
                         const std::filesystem::path& out_dir, const std::string& split = "test");

}  // namespace plc::cli
