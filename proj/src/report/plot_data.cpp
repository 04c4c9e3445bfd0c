#include "tlunet/report/plot_data.hpp"

#include <fmt/format.h>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet::report {

namespace {

std::string stats_row(const RunArtifacts& r, const std::string& cls, const std::string& metric,
                      const metrics::SummaryStats& s) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.label, r.network, r.init,
                     format_real(r.fraction, 4), cls, metric, s.count, format_real(s.mean, 8),
                     format_real(s.median, 8), format_real(s.ci75_low, 8), format_real(s.ci75_high, 8),
                     format_real(s.ci95_low, 8), format_real(s.ci95_high, 8));
}

}  // namespace

std::string format_box_stats_csv(std::span<const RunArtifacts> runs) {
  std::string out = "label,network,init,fraction,class,metric,count,mean,median,ci75_low,ci75_high,ci95_low,ci95_high\n";
  for (const auto& r : runs) {
    std::vector<double> per_image;
    for (const auto& img : r.report.images) per_image.push_back(img.mean_dice());
    if (!per_image.empty()) out += stats_row(r, "all", "dice", metrics::aggregate(per_image));
    for (std::size_t m = 0; m < r.report.per_class.size(); ++m) {
      const auto& pc = r.report.per_class[m];
      const std::string cls = std::to_string(m + 1);
      out += stats_row(r, cls, "dice", pc.dice);
      out += stats_row(r, cls, "iou", pc.iou);
      if (pc.dice_present) out += stats_row(r, cls + "_present", "dice", *pc.dice_present);
      if (pc.iou_present) out += stats_row(r, cls + "_present", "iou", *pc.iou_present);
    }
  }
  return out;
}

std::string format_roc_csv(std::span<const RunArtifacts> runs) {
  std::string out = "label,class,fpr,tpr,threshold\n";
  for (const auto& r : runs) {
    for (int m = 0; m < r.report.classes; ++m) {
      std::vector<double> scores;
      std::vector<std::uint8_t> labels;
      for (const auto& img : r.report.images) {
        scores.push_back(img.class_probs[m]);
        labels.push_back(img.true_labels[m]);
      }
      std::vector<metrics::RocPoint> points;
      try {
        points = metrics::roc_curve(scores, labels);
      } catch (const metrics::UndefinedAucError&) {
        continue;
      }
      for (const auto& p : points) {
        out += fmt::format("{},{},{},{},{}\n", r.label, m + 1, format_real(p.fpr, 8), format_real(p.tpr, 8),
                           format_real(p.threshold, 8));
      }
    }
  }
  return out;
}

std::string format_convergence_csv(std::span<const RunArtifacts> runs) {
  std::string out = "label,epoch,train_loss,val_loss,val_dice,val_mla\n";
  for (const auto& r : runs) {
    for (const auto& e : r.history.epochs) {
      out += fmt::format("{},{},{},{},{},{}\n", r.label, e.epoch, format_real(e.train_loss, 8),
                         format_real(e.val_loss, 8), format_real(e.val_dice, 8), format_real(e.val_mla, 8));
    }
  }
  return out;
}

void emit_plot_data(const std::filesystem::path& dir, std::span<const RunArtifacts> runs) {
  if (runs.empty()) throw ValidationError("no runs to summarize");
  write_text_file(dir / "box_stats.csv", format_box_stats_csv(runs));
  write_text_file(dir / "roc.csv", format_roc_csv(runs));
  write_text_file(dir / "convergence.csv", format_convergence_csv(runs));
}

}  // namespace tlunet::report
