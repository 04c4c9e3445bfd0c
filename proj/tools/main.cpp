#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tlunet/data/synthetic.hpp"
#include "tlunet/error.hpp"
#include "tlunet/io.hpp"
#include "tlunet/model/archive.hpp"
#include "tlunet/report/compare.hpp"
#include "tlunet/report/experiment.hpp"
#include "tlunet/report/overlay.hpp"
#include "tlunet/report/plot_data.hpp"

namespace fs = std::filesystem;
using namespace tlunet;

namespace {

// Flags shared by every command that builds an ExperimentConfig.
struct ConfigFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string data_root;
  std::string output_dir;
  std::string label;
  std::optional<double> fraction;
  std::string encoder;
  std::string init;
  std::string pretrained;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "experiment config file (key = value)");
    app->add_option("--set", sets, "override a config key, key=value (repeatable)");
    app->add_option("--data-root", data_root, "dataset root directory");
    app->add_option("-o,--output-dir", output_dir, "directory that holds run directories");
    app->add_option("-l,--label", label, "experiment label (run directory name)");
    app->add_option("--fraction", fraction, "fraction of the training split to use");
    app->add_option("--encoder", encoder, "resnet or densenet");
    app->add_option("--init", init, "random or pretrained");
    app->add_option("--pretrained", pretrained, "encoder weight archive for pretrained init");
  }

  report::ExperimentConfig resolve() const {
    report::ExperimentConfig cfg = config.empty() ? report::ExperimentConfig{} : report::ExperimentConfig::load(config);
    std::vector<std::string> all;
    if (!data_root.empty()) all.push_back("data_root=" + data_root);
    if (!output_dir.empty()) all.push_back("output_dir=" + output_dir);
    if (!label.empty()) all.push_back("label=" + label);
    if (fraction) all.push_back("data_fraction=" + format_real(*fraction, 10));
    if (!encoder.empty()) all.push_back("encoder=" + encoder);
    if (!init.empty()) all.push_back("init=" + init);
    if (!pretrained.empty()) all.push_back("pretrained=" + pretrained);
    all.insert(all.end(), sets.begin(), sets.end());
    cfg = report::with_overrides(cfg, all);
    if (const char* root = std::getenv(report::kDataRootEnv); root != nullptr && *root != '\0' && data_root.empty()) {
      cfg.data_root = root;
    }
    return cfg;
  }
};

void print_epoch(const train::EpochRecord& e) {
  fmt::print(stderr, "epoch {:>2}  train_loss {:.5f}  val_loss {:.5f}  val_dice {:.4f}  val_mla {:.4f}  ({:.1f} s)\n",
             e.epoch, e.train_loss, e.val_loss, e.val_dice, e.val_mla, e.seconds);
}

void print_report(const metrics::MetricReport& r) {
  fmt::print("images {}  mean_dice {}  mean_iou {}  mla {}  auc_macro {}  mean_loss {}\n", r.images.size(),
             format_real(r.mean_dice, 4), format_real(r.mean_iou, 4), format_real(r.mla, 4),
             format_real(r.auc_macro, 4), format_real(r.mean_loss, 5));
  for (const auto& w : r.warnings) fmt::print(stderr, "warning: {}\n", w);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"U-Net steel-defect segmentation and classification"};
  app.require_subcommand(1);

  ConfigFlags prepare_flags;
  auto* prepare = app.add_subcommand("prepare", "build the split manifest and normalization stats");
  prepare_flags.attach(prepare);

  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "run one experiment: train, evaluate on test, write reports");
  train_flags.attach(train_cmd);

  ConfigFlags grid_flags;
  std::string grid_resnet;
  std::string grid_densenet;
  auto* grid = app.add_subcommand("grid", "run {resnet, densenet} x {random, pretrained}");
  grid_flags.attach(grid);
  grid->add_option("--resnet-archive", grid_resnet, "encoder archive for resnet pretrained init");
  grid->add_option("--densenet-archive", grid_densenet, "encoder archive for densenet pretrained init");

  std::string eval_run;
  std::string eval_subset = "test";
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "re-evaluate a finished run's checkpoint");
  evaluate->add_option("run", eval_run, "run directory")->required();
  evaluate->add_option("--subset", eval_subset, "train, val or test");
  evaluate->add_option("--out", eval_out, "write per_image.csv and summary.json here");

  std::string predict_checkpoint;
  std::string predict_norm;
  std::string predict_image;
  bool predict_json = false;
  auto* predict = app.add_subcommand("predict", "predict masks (RLE) and class probabilities for one image");
  predict->add_option("--checkpoint", predict_checkpoint, "checkpoint directory")->required();
  predict->add_option("--norm", predict_norm, "norm_stats.txt of the run")->required();
  predict->add_option("image", predict_image, "image file")->required();
  predict->add_flag("--json", predict_json, "print JSON");

  std::string compare_a;
  std::string compare_b;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "per-image DICE differences between two runs (a - b)");
  compare->add_option("a", compare_a, "run directory a")->required();
  compare->add_option("b", compare_b, "run directory b")->required();
  compare->add_option("--out", compare_out, "output directory")->required();

  std::vector<std::string> report_runs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "plot data (box stats, ROC, convergence) from run directories");
  report_cmd->add_option("runs", report_runs, "run directories")->required();
  report_cmd->add_option("--out", report_out, "output directory")->required();

  std::string overlay_run;
  std::string overlay_image;
  std::string overlay_out;
  auto* overlay = app.add_subcommand("overlay", "render truth and predicted contours for one dataset image");
  overlay->add_option("run", overlay_run, "run directory")->required();
  overlay->add_option("--image", overlay_image, "image id")->required();
  overlay->add_option("--out", overlay_out, "output PNG")->required();

  data::SyntheticSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus (images/ and train.csv)");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", synth_spec.count, "number of images");
  synth->add_option("--height", synth_spec.height, "image height");
  synth->add_option("--width", synth_spec.width, "image width");
  synth->add_option("--seed", synth_spec.seed, "generator seed");
  synth->add_option("--defect-probability", synth_spec.defect_probability, "per-class defect probability");

  std::string export_checkpoint;
  std::string export_out;
  auto* export_cmd = app.add_subcommand("export-encoder", "write a checkpoint's encoder as a pretrained archive");
  export_cmd->add_option("checkpoint", export_checkpoint, "checkpoint directory")->required();
  export_cmd->add_option("--out", export_out, "archive path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      const auto cfg = prepare_flags.resolve();
      const auto data = report::prepare(cfg);
      report::write_prepared(cfg, data);
      fmt::print("train {}  val {}  test {}  -> {}\n", data.split.train.size(), data.split.val.size(),
                 data.split.test.size(), cfg.run_dir().string());
    } else if (*train_cmd) {
      const auto cfg = train_flags.resolve();
      const auto art = report::run_experiment(cfg, {print_epoch});
      fmt::print("best epoch {}\n", art.history.best_epoch);
      print_report(art.report);
    } else if (*grid) {
      report::GridOptions options;
      if (!grid_resnet.empty()) options.resnet_pretrained = grid_resnet;
      if (!grid_densenet.empty()) options.densenet_pretrained = grid_densenet;
      const auto runs = report::run_grid(grid_flags.resolve(), options, {print_epoch});
      for (const auto& r : runs) {
        fmt::print("{}: ", r.label);
        print_report(r.report);
      }
    } else if (*evaluate) {
      const auto rep = report::evaluate_run(eval_run, eval_subset);
      if (!eval_out.empty()) metrics::write_report(eval_out, rep);
      print_report(rep);
    } else if (*predict) {
      auto net = model::load_checkpoint(predict_checkpoint);
      const auto norm = data::read_norm_stats(predict_norm);
      const auto res = train::predict(*net, fs::path(predict_image), norm);
      if (predict_json) {
        nlohmann::ordered_json j;
        j["image"] = predict_image;
        for (std::size_t m = 0; m < res.rle.size(); ++m) {
          j["classes"].push_back({{"class", m + 1},
                                  {"probability", format_real(res.class_probs[m], 6)},
                                  {"label", res.labels[m]},
                                  {"rle", res.rle[m].str()}});
        }
        fmt::print("{}\n", j.dump(2));
      } else {
        for (std::size_t m = 0; m < res.rle.size(); ++m) {
          fmt::print("class {}  prob {}  label {}  rle {}\n", m + 1, format_real(res.class_probs[m], 6),
                     res.labels[m], res.rle[m].str());
        }
      }
    } else if (*compare) {
      const auto a = report::load_run(compare_a);
      const auto b = report::load_run(compare_b);
      const auto c = report::compare(a.report, b.report);
      report::write_comparison(compare_out, c, a.label, b.label);
      fmt::print("images {}  improved {}  mean_delta {}  relative_delta {}\n", c.images.size(),
                 format_real(c.improved_fraction, 4), format_real(c.mean_delta, 4), format_real(c.relative_delta, 4));
    } else if (*report_cmd) {
      std::vector<report::RunArtifacts> runs;
      for (const auto& dir : report_runs) runs.push_back(report::load_run(dir));
      report::emit_plot_data(report_out, runs);
      fmt::print("wrote plot data for {} run(s) to {}\n", runs.size(), report_out);
    } else if (*overlay) {
      const auto cfg = report::ExperimentConfig::load(fs::path(overlay_run) / "config.txt");
      const auto dataset = data::load_dataset(cfg.annotations_path(), cfg.images_path(), cfg.model.num_classes);
      const auto& rec = dataset.get(overlay_image);
      auto net = model::load_checkpoint(fs::path(overlay_run) / "checkpoint");
      const auto res = train::predict(*net, rec.pixels, data::read_norm_stats(fs::path(overlay_run) / "norm_stats.txt"));
      report::write_overlay(overlay_out, rec.pixels, rec.masks, res.masks);
    } else if (*synth) {
      data::write_corpus(synth_out, data::generate_synthetic_records(synth_spec));
      fmt::print("wrote {} images to {}\n", synth_spec.count, synth_out);
    } else if (*export_cmd) {
      auto net = model::load_checkpoint(export_checkpoint);
      model::write_archive(export_out, model::export_parameters(*net, model::ParamScope::kEncoder, "encoder."));
      fmt::print("wrote {}\n", export_out);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
