#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "plc/cli/commands.hpp"
#include "plc/metrics/report_io.hpp"

namespace fs = std::filesystem;
using namespace plc::cli;

namespace {

template <typename T>
std::optional<T> given(const CLI::Option* opt, const T& value) {
  return opt->count() ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plcnet: lane correction toolkit (synthesize, train, correct, render)"};
  app.require_subcommand(1);

  std::string config, data, out, checkpoint, lanes, split = "test";
  std::uint64_t seed = 0;
  bool quiet = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  auto* synth_config = synth->add_option("--config", config, "Scene config file (key = value)")->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Output dataset directory")->required();
  auto* synth_seed = synth->add_option("--seed", seed, "Override the config seed");

  auto* train = app.add_subcommand("train", "Train a model on <data>/train");
  auto* train_config = train->add_option("--config", config, "Training config file (key = value)")->check(CLI::ExistingFile);
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--out", out, "Output directory for model.ckpt and train_log.tsv")->required();
  auto* train_seed = train->add_option("--seed", seed, "Override the config seed");
  train->add_flag("--quiet", quiet, "No per-epoch progress");

  auto* correct = app.add_subcommand("correct", "Correct, merge and evaluate a dataset split");
  correct->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  correct->add_option("--data", data, "Dataset directory")->required();
  correct->add_option("--out", out, "Output directory")->required();
  correct->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));

  auto* render = app.add_subcommand("render", "Draw lane overlays for a dataset split");
  render->add_option("--data", data, "Dataset directory")->required();
  auto* render_lanes = render->add_option("--lanes", lanes, "Directory of corrected-lane files");
  render->add_option("--out", out, "Output directory")->required();
  render->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      const auto s = cmd_synth(given(synth_config, fs::path(config)), out, given(synth_seed, seed));
      std::printf("wrote %zu train / %zu test samples (seed %llu) to %s\n", s.n_train, s.n_test,
                  static_cast<unsigned long long>(s.seed), out.c_str());
    } else if (train->parsed()) {
      const auto s = cmd_train(given(train_config, fs::path(config)), data, out, given(train_seed, seed), !quiet);
      std::printf("trained %d epochs; checkpoint %s, log %s\n", s.epochs, s.checkpoint.c_str(), s.log.c_str());
    } else if (correct->parsed()) {
      const auto s = cmd_correct_merge_eval(checkpoint, data, out, split);
      std::printf("corrected %zu samples, merged %zu global lanes\n", s.samples, s.global_lanes);
      if (!s.local.empty()) std::printf("\nlocal (network pixels)\n%s", plc::metrics::reports_to_table(s.local).c_str());
      if (!s.global.empty()) std::printf("\nglobal (meters)\n%s", plc::metrics::reports_to_table(s.global).c_str());
    } else if (render->parsed()) {
      const auto s = cmd_render(data, given(render_lanes, fs::path(lanes)), out, split);
      std::printf("rendered %zu overlays with %d markers to %s\n", s.images, s.markers, out.c_str());
    }
  } catch (...) {
    return report_exception();
  }
  return kExitOk;
}
