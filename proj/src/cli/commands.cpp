#include "plc/cli/commands.hpp"

#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plc/core/config.hpp"
#include "plc/core/fileio.hpp"
#include "plc/core/log.hpp"
#include "plc/geo/geo.hpp"
#include "plc/metrics/report_io.hpp"
#include "plc/synth/dataset_io.hpp"
#include "plc/synth/synth.hpp"
#include "plc/train/checkpoint.hpp"
#include "plc/train/train.hpp"

namespace plc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int report_exception() {
  try {
    throw;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

namespace {

std::string read_config(const std::optional<fs::path>& path) {
  if (!path) return {};
  return read_file(*path);
}

std::vector<Sample> read_listed(const fs::path& dir, const std::vector<std::string>& ids) {
  std::vector<Sample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(synth::read_sample(dir, id));
  return out;
}

std::vector<std::string> split_ids(const fs::path& data_dir, const std::string& split) {
  const synth::Manifest m = synth::read_manifest(data_dir);
  if (split == "train") return m.train;
  if (split == "test") return m.test;
  throw UsageError("unknown split '" + split + "', expected train or test");
}

}  // namespace

SynthSummary cmd_synth(const std::optional<fs::path>& config_path, const fs::path& out_dir,
                       std::optional<std::uint64_t> seed) {
  synth::SynthParams params = synth::parse_synth_params(read_config(config_path));
  if (seed) params.seed = *seed;
  params.validate();
  const synth::Dataset data = synth::build_dataset(params);
  synth::write_dataset(out_dir, data, params);
  return {data.train.size(), data.test.size(), params.seed};
}

TrainSummary cmd_train(const std::optional<fs::path>& config_path, const fs::path& data_dir, const fs::path& out_dir,
                       std::optional<std::uint64_t> seed, bool verbose) {
  train::TrainConfig config = train::parse_train_config(read_config(config_path));
  if (seed) config.seed = *seed;
  config.validate();
  const synth::Manifest manifest = synth::read_manifest(data_dir);
  const std::vector<Sample> samples = read_listed(data_dir / "train", manifest.train);
  if (samples.empty()) throw DataError(data_dir / "train", "no training samples");

  std::vector<train::PreparedSample> prepared;
  for (const auto& s : samples) prepared.push_back(train::prepare_sample(s, config));
  const train::Checkpoint ckpt = train::train_prepared(config, prepared, [&](const train::EpochRecord& r) {
    if (verbose) {
      std::printf("epoch %d/%d  seg %.6f  offset %.6f  lr %s\n", r.epoch, config.epochs, r.seg_loss, r.offset_loss,
                  format_double(r.lr).c_str());
      std::fflush(stdout);
    }
  });

  std::string log = "epoch\tseg_loss\toffset_loss\tlr\n";
  for (const auto& r : ckpt.history) {
    log += std::to_string(r.epoch) + "\t" + format_double(r.seg_loss) + "\t" + format_double(r.offset_loss) + "\t" +
           format_double(r.lr) + "\n";
  }
  fs::create_directories(out_dir);
  TrainSummary summary{out_dir / kCheckpointFile, out_dir / kTrainLogFile, ckpt.epoch};
  train::save_checkpoint(summary.checkpoint, ckpt);
  write_file_atomic(summary.log, log);
  return summary;
}

std::vector<TrainLogRow> read_train_log(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "epoch\tseg_loss\toffset_loss\tlr") throw DataError(path, "bad log header");
  std::vector<TrainLogRow> rows;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string epoch, seg, off, lr;
    if (!(std::getline(fields, epoch, '\t') && std::getline(fields, seg, '\t') && std::getline(fields, off, '\t') &&
          std::getline(fields, lr))) {
      throw DataError(path, "malformed log row '" + line + "'");
    }
    try {
      rows.push_back({static_cast<int>(parse_int("epoch", epoch)), parse_double("seg_loss", seg),
                      parse_double("offset_loss", off), parse_double("lr", lr)});
    } catch (const ConfigError& e) {
      throw DataError(path, e.what());
    }
  }
  return rows;
}

void write_global_lanes(const fs::path& path, const std::vector<GlobalLane>& lanes) {
  json lanes_json = json::array();
  for (const auto& lane : lanes) {
    json pts = json::array();
    for (const auto& p : lane.points) pts.push_back({p.x, p.y});
    lanes_json.push_back({{"track_id", lane.track_id}, {"points", std::move(pts)}});
  }
  json doc;
  doc["lanes"] = std::move(lanes_json);
  write_file_atomic(path, doc.dump(1) + "\n");
}

std::vector<GlobalLane> read_global_lanes(const fs::path& path) {
  try {
    const json doc = json::parse(read_file(path));
    std::vector<GlobalLane> lanes;
    for (const auto& item : doc.at("lanes")) {
      GlobalLane lane;
      lane.track_id = item.at("track_id").get<int>();
      for (const auto& p : item.at("points")) lane.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      if (lane.points.size() != static_cast<std::size_t>(kGlobalLanePoints)) {
        throw DataError(path, "lane " + std::to_string(lane.track_id) + " does not have " +
                                  std::to_string(kGlobalLanePoints) + " points");
      }
      lanes.push_back(std::move(lane));
    }
    return lanes;
  } catch (const json::exception& e) {
    throw DataError(path, e.what());
  }
}

EvalSummary cmd_correct_merge_eval(const fs::path& checkpoint_path, const fs::path& data_dir, const fs::path& out_dir,
                                   const std::string& split) {
  const train::Checkpoint ckpt = train::load_checkpoint(checkpoint_path);
  const train::TrainConfig& config = ckpt.config;
  const std::vector<Sample> samples = read_listed(data_dir / split, split_ids(data_dir, split));
  fs::create_directories(out_dir / kCorrectedDir);

  std::vector<metrics::LanePair> local_initial, local_corrected;
  std::vector<geo::LaneFragment> initial_fragments, corrected_fragments, gt_fragments;
  for (const auto& sample : samples) {
    const train::PreparedSample prepared = train::prepare_sample(sample, config, false);
    const std::vector<LaneInstance> corrected_net = train::predict(ckpt.params, prepared);
    const double back_x = 1.0 / prepared.scale.sx, back_y = 1.0 / prepared.scale.sy;

    synth::Annotation out{sample.image_id, sample.image.anchor, {}};
    for (std::size_t i = 0; i < corrected_net.size(); ++i) {
      LaneInstance corrected{corrected_net[i].track_id, LaneRole::kCorrected,
                             train::scale_points(corrected_net[i].points, back_x, back_y)};
      LaneInstance initial{prepared.initial[i].track_id, LaneRole::kInitial,
                           train::scale_points(prepared.initial[i].points, back_x, back_y)};
      corrected_fragments.push_back({corrected, sample.image.anchor});
      initial_fragments.push_back({initial, sample.image.anchor});
      out.lanes.push_back(std::move(corrected));
    }
    synth::write_annotation(out_dir / kCorrectedDir / (sample.image_id + ".json"), out);

    if (sample.gt_lanes.empty()) {
      log::warn(sample.image_id + ": no ground truth, evaluation skipped");
      continue;
    }
    for (const auto& gt : sample.gt_lanes) {
      gt_fragments.push_back({gt, sample.image.anchor});
      std::size_t i = 0;
      while (i < prepared.initial.size() && prepared.initial[i].track_id != gt.track_id) ++i;
      if (i == prepared.initial.size()) {
        log::warn(sample.image_id + ": ground-truth lane " + std::to_string(gt.track_id) + " has no initial lane");
        continue;
      }
      const Polyline gt_net =
          train::resample_lane(train::scale_points(gt.points, prepared.scale.sx, prepared.scale.sy), config.M);
      local_initial.push_back({gt.track_id, prepared.initial[i].points, gt_net});
      local_corrected.push_back({gt.track_id, corrected_net[i].points, gt_net});
    }
  }

  EvalSummary summary;
  summary.samples = samples.size();
  const std::vector<GlobalLane> corrected_global = geo::merge_global(corrected_fragments);
  summary.global_lanes = corrected_global.size();
  write_global_lanes(out_dir / kGlobalLanesFile, corrected_global);

  if (local_initial.empty()) {
    log::warn("no ground truth in " + (data_dir / split).string() + ", metrics not written");
    return summary;
  }
  const metrics::Canvas canvas{config.net_height, config.net_width};
  summary.local = {metrics::evaluate(local_initial, metrics::Unit::kPixel, canvas, "initial"),
                   metrics::evaluate(local_corrected, metrics::Unit::kPixel, canvas, "corrected")};

  const std::vector<GlobalLane> initial_global = geo::merge_global(initial_fragments);
  const std::vector<GlobalLane> gt_global = geo::merge_global(gt_fragments);
  std::vector<metrics::LanePair> global_initial, global_corrected;
  for (const auto& gt : gt_global) {
    for (std::size_t i = 0; i < corrected_global.size(); ++i) {
      if (corrected_global[i].track_id != gt.track_id) continue;
      global_corrected.push_back({gt.track_id, corrected_global[i].points, gt.points});
    }
    for (const auto& init : initial_global) {
      if (init.track_id == gt.track_id) global_initial.push_back({gt.track_id, init.points, gt.points});
    }
  }
  if (!global_initial.empty() && !global_corrected.empty()) {
    summary.global = {metrics::evaluate(global_initial, metrics::Unit::kMeter, std::nullopt, "initial"),
                      metrics::evaluate(global_corrected, metrics::Unit::kMeter, std::nullopt, "corrected")};
  }
  metrics::write_reports(out_dir / kLocalMetricsFile, summary.local);
  if (!summary.global.empty()) metrics::write_reports(out_dir / kGlobalMetricsFile, summary.global);
  return summary;
}

}  // namespace plc::cli
