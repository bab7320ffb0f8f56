#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

#include "plc/cli/commands.hpp"
#include "plc/core/fileio.hpp"
#include "plc/metrics/report_io.hpp"
#include "plc/synth/dataset_io.hpp"
#include "plc/train/checkpoint.hpp"

using namespace plc;
using namespace plc::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "plc_cli_test";

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr
};

Outcome run(const std::string& args) {
  const fs::path log = kRoot / "last_run.txt";
  const std::string cmd = std::string(PLCNET_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(log);
  return r;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  return out;
}

void write_text(const fs::path& p, const std::string& text) { write_file_atomic(p, text); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    write_text(kRoot / "synth10.cfg", "n_regions = 10\nseed = 21\n");
    write_text(kRoot / "synth5.cfg", "n_regions = 5\nseed = 4\n");
    write_text(kRoot / "tiny.cfg", "epochs = 60\nlr_drop_epoch = 50\nnet_height = 32\nnet_width = 16\nM = 8\nP = 2\n");
    ASSERT_EQ(run("synth --config " + (kRoot / "synth5.cfg").string() + " --out " + data().string()).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(kRoot); }
  static fs::path data() { return kRoot / "data5"; }
};

}  // namespace

TEST_F(Cli, HelpAndUsage) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 1);
  const Outcome r = run("synth --out " + (kRoot / "x").string() + " --frobnicate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("frobnicate"), std::string::npos);
  EXPECT_FALSE(fs::exists(kRoot / "x"));
}

TEST_F(Cli, SynthSplitAndDeterminism) {
  const fs::path a = kRoot / "s10a", b = kRoot / "s10b";
  const std::string cfg = (kRoot / "synth10.cfg").string();
  ASSERT_EQ(run("synth --config " + cfg + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("synth --config " + cfg + " --out " + b.string()).code, 0);
  const synth::Manifest m = synth::read_manifest(a);
  EXPECT_EQ(m.train.size(), 6u);
  EXPECT_EQ(m.test.size(), 4u);
  EXPECT_EQ(m.seed, 21u);
  EXPECT_EQ(tree(a), tree(b));

  const fs::path c = kRoot / "s10c";
  ASSERT_EQ(run("synth --config " + cfg + " --seed 22 --out " + c.string()).code, 0);
  EXPECT_EQ(synth::read_manifest(c).seed, 22u);
  EXPECT_NE(tree(a), tree(c));
}

TEST_F(Cli, UnwritableOutputIsDataError) {
  write_text(kRoot / "plain_file", "x");
  const fs::path out = kRoot / "plain_file" / "sub";
  const Outcome r = run("synth --config " + (kRoot / "synth5.cfg").string() + " --out " + out.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(read_file(kRoot / "plain_file"), "x");
}

TEST_F(Cli, BadConfigKeyIsUsageError) {
  write_text(kRoot / "bad.cfg", "n_regions = 10\nlane_spaceing = 3\n");
  const Outcome r = run("synth --config " + (kRoot / "bad.cfg").string() + " --out " + (kRoot / "bad").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("lane_spaceing"), std::string::npos);
  EXPECT_FALSE(fs::exists(kRoot / "bad"));

  write_text(kRoot / "bad_train.cfg", "net_width = 20\n");
  const Outcome t = run("train --config " + (kRoot / "bad_train.cfg").string() + " --data " + data().string() + " --out " +
                    (kRoot / "bad_train").string());
  EXPECT_EQ(t.code, 1);
  EXPECT_NE(t.out.find("net_width"), std::string::npos);
}

TEST_F(Cli, TrainCorrectRender) {
  const fs::path model = kRoot / "model";
  ASSERT_EQ(run("train --quiet --config " + (kRoot / "tiny.cfg").string() + " --data " + data().string() + " --out " +
                model.string())
                .code,
            0);
  const auto rows = read_train_log(model / kTrainLogFile);
  ASSERT_EQ(rows.size(), 60u);
  for (int e = 1; e <= 60; ++e) {
    EXPECT_EQ(rows[e - 1].epoch, e);
    EXPECT_EQ(rows[e - 1].lr, e <= 50 ? 0.001 : 0.0001) << e;
  }
  const train::Checkpoint ckpt = train::load_checkpoint(model / kCheckpointFile);
  EXPECT_EQ(ckpt.epoch, 60);
  EXPECT_EQ(ckpt.config.M, 8);

  const fs::path out = kRoot / "eval";
  const Outcome c = run("correct --checkpoint " + (model / kCheckpointFile).string() + " --data " + data().string() +
                    " --out " + out.string());
  ASSERT_EQ(c.code, 0) << c.out;
  EXPECT_NE(c.out.find("corrected"), std::string::npos);

  const synth::Manifest m = synth::read_manifest(data());
  std::size_t lanes = 0;
  for (const auto& id : m.test) {
    const auto a = synth::read_annotation(out / kCorrectedDir / (id + ".json"));
    EXPECT_EQ(a.image_id, id);
    for (const auto& lane : a.lanes) {
      EXPECT_EQ(lane.role, LaneRole::kCorrected);
      EXPECT_EQ(lane.points.size(), 8u);
    }
    lanes += a.lanes.size();
  }
  EXPECT_GT(lanes, 0u);
  EXPECT_FALSE(read_global_lanes(out / kGlobalLanesFile).empty());
  for (const char* file : {kLocalMetricsFile, kGlobalMetricsFile}) {
    const auto reports = metrics::read_reports(out / file);
    ASSERT_EQ(reports.size(), 2u) << file;
    EXPECT_EQ(reports[0].method, "initial");
    EXPECT_EQ(reports[1].method, "corrected");
  }
  const auto local = metrics::read_reports(out / kLocalMetricsFile);
  ASSERT_TRUE(local[0].canvas.has_value());
  EXPECT_EQ(local[0].canvas->height, 32);
  EXPECT_EQ(local[0].canvas->width, 16);
  EXPECT_FALSE(metrics::read_reports(out / kGlobalMetricsFile)[0].has_iou());

  const fs::path overlays = kRoot / "overlays";
  const Outcome r = run("render --data " + data().string() + " --lanes " + (out / kCorrectedDir).string() + " --out " +
                    overlays.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("markers"), std::string::npos);
  for (const auto& id : m.test) {
    int h = 0, w = 0;
    std::vector<std::uint8_t> rgb;
    read_ppm(overlays / (id + "_overlay.ppm"), h, w, rgb);
    EXPECT_EQ(h, 320);
    EXPECT_EQ(w, 160);
  }
  const RenderSummary s = cmd_render(data(), out / kCorrectedDir, kRoot / "overlays2");
  EXPECT_EQ(s.images, m.test.size());
  EXPECT_EQ(s.markers, static_cast<int>(3 * 8 * lanes));
}

TEST_F(Cli, ZeroOffsetModelLeavesMetricsUnchanged) {
  train::Checkpoint ckpt;
  ckpt.config.net_height = 64;
  ckpt.config.net_width = 32;
  ckpt.config.M = 16;
  ckpt.params = model::init_params<float>(ckpt.config.P, 3);
  train::save_checkpoint(kRoot / "stub.ckpt", ckpt);
  const fs::path out = kRoot / "stub_eval";
  ASSERT_EQ(run("correct --checkpoint " + (kRoot / "stub.ckpt").string() + " --data " + data().string() + " --out " +
                out.string())
                .code,
            0);
  for (const char* file : {kLocalMetricsFile, kGlobalMetricsFile}) {
    const auto reports = metrics::read_reports(out / file);
    ASSERT_EQ(reports.size(), 2u);
    const auto &a = reports[0], &b = reports[1];
    EXPECT_NEAR(a.chamfer, b.chamfer, 1e-9) << file;
    EXPECT_NEAR(a.l2, b.l2, 1e-9) << file;
    EXPECT_NEAR(a.smooth_l1, b.smooth_l1, 1e-9) << file;
    for (int k = 0; k < 3; ++k) EXPECT_EQ(a.lane_iou[k], b.lane_iou[k]) << file;
    EXPECT_GT(a.chamfer, 0.0);
  }
}

TEST_F(Cli, MalformedSampleNamesFile) {
  const fs::path copy = kRoot / "broken";
  fs::copy(data(), copy, fs::copy_options::recursive);
  const std::string id = synth::read_manifest(copy).test.front();
  const fs::path bad = copy / "test" / (id + ".json");
  write_text(bad, "{\"image_id\": ");
  train::Checkpoint ckpt;
  ckpt.config.net_height = 32;
  ckpt.config.net_width = 16;
  ckpt.params = model::init_params<float>(ckpt.config.P, 3);
  train::save_checkpoint(kRoot / "stub2.ckpt", ckpt);
  const Outcome r = run("correct --checkpoint " + (kRoot / "stub2.ckpt").string() + " --data " + copy.string() +
                    " --out " + (kRoot / "broken_eval").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find(id + ".json"), std::string::npos) << r.out;

  const Outcome t = run("render --data " + copy.string() + " --out " + (kRoot / "broken_render").string());
  EXPECT_EQ(t.code, 2);

  const Outcome missing = run("correct --checkpoint " + (kRoot / "none.ckpt").string() + " --data " + data().string() +
                          " --out " + (kRoot / "x2").string());
  EXPECT_EQ(missing.code, 2);
}

TEST_F(Cli, RenderRejectsLanesForUnknownSample) {
  const fs::path lanes = kRoot / "foreign_lanes";
  fs::create_directories(lanes);
  synth::Annotation a;
  a.image_id = "region_9999";
  a.anchor = {0, 0, 320, 160, 0.1, 9999};
  a.lanes = {{1, LaneRole::kCorrected, {{1, 1}, {2, 2}}}};
  synth::write_annotation(lanes / "region_9999.json", a);
  EXPECT_EQ(run("render --data " + data().string() + " --lanes " + lanes.string() + " --out " +
                (kRoot / "foreign_render").string())
                .code,
            2);
}

TEST(Render, EmptySampleHasNoMarkers) {
  Sample s;
  s.image.height = 10;
  s.image.width = 12;
  s.image.rgb.assign(10 * 12 * 3, 7);
  const Overlay o = render_overlay(s, {});
  EXPECT_EQ(o.markers, 0);
  EXPECT_EQ(o.image.rgb, s.image.rgb);
}

TEST(Render, MarkerCountAndGroundTruthColour) {
  Sample s;
  s.image.height = 60;
  s.image.width = 40;
  s.image.rgb.assign(60 * 40 * 3, 0);
  const Polyline gt{{10, 5}, {12, 30}, {15, 55}};
  Polyline init = gt;
  for (auto& p : init) p.x += 6;
  s.gt_lanes = {{3, LaneRole::kGroundTruth, gt}};
  s.initial_lanes = {{3, LaneRole::kInitial, init}};
  const std::vector<LaneInstance> corrected{{3, LaneRole::kCorrected, train::resample_lane(gt, 10)}};
  const Overlay o = render_overlay(s, corrected);
  EXPECT_EQ(o.markers, 3 * 10);
  const auto colour = track_color(3);
  EXPECT_EQ(colour, (std::array<std::uint8_t, 3>{255, 255, 255}));
  for (const Point2& p : train::resample_lane(gt, 10)) {
    const int r = static_cast<int>(std::floor(p.y + 0.5)), c = static_cast<int>(std::floor(p.x + 0.5));
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(o.image.at(r, c, ch), colour[ch]);
  }
  // Diamonds of the initial lane lie 6 px to the right.
  const Point2 q = train::resample_lane(init, 10)[4];
  EXPECT_EQ(o.image.at(static_cast<int>(std::floor(q.y + 0.5)), static_cast<int>(std::floor(q.x + 0.5)), 0), 255);
}

TEST(Render, PaletteCycles) {
  std::set<std::array<std::uint8_t, 3>> colours;
  for (int id = 1; id <= 8; ++id) colours.insert(track_color(id));
  EXPECT_EQ(colours.size(), 8u);
  EXPECT_EQ(track_color(9), track_color(1));
  EXPECT_EQ(track_color(0), track_color(8));
}
