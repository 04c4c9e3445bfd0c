#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlunet/error.hpp"

namespace tlunet::metrics {

/// 2|X∩Y| / (|X|+|Y|); 1 when both masks are empty.
double dice(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);
/// |X∩Y| / |X∪Y|; 1 when both masks are empty.
double iou(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

/// Mean over images of the fraction of correct labels. Both inputs are
/// row-major images×classes.
double mla(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
           int classes);

class UndefinedAucError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half. Computed from mid-ranks.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  double threshold = 0;
};
/// ROC vertices from (0,0) to (1,1), one per distinct score.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Linear-interpolated percentile (q in [0,1]) of already sorted values.
double percentile_sorted(std::span<const double> sorted, double q);

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0;
  double median = 0;
  double ci75_low = 0;   // 12.5th percentile
  double ci75_high = 0;  // 87.5th percentile
  double ci95_low = 0;   // 2.5th percentile
  double ci95_high = 0;  // 97.5th percentile
};

/// Requires at least one value.
SummaryStats aggregate(std::span<const double> values);

/// Everything evaluation keeps about one image.
struct ImageOutcome {
  std::string image_id;
  std::vector<double> dice;
  std::vector<double> iou;
  std::vector<std::uint8_t> true_labels;
  std::vector<std::uint8_t> pred_labels;
  std::vector<double> class_probs;

  double mean_dice() const;
};

struct ClassAggregates {
  SummaryStats dice;
  SummaryStats iou;
  /// Over images whose ground-truth mask for the class is non-empty.
  std::optional<SummaryStats> dice_present;
  std::optional<SummaryStats> iou_present;
};

struct MetricReport {
  int classes = 0;
  std::vector<ImageOutcome> images;
  double mla = 0;
  /// nullopt where the class had a single label value in the evaluated set.
  std::vector<std::optional<double>> auc_per_class;
  double auc_macro = 0;  // NaN when no class AUC is defined
  double mean_dice = 0;  // over all image×class entries
  double mean_iou = 0;
  double mean_loss = 0;  // per image; filled by the evaluator
  std::vector<ClassAggregates> per_class;
  std::vector<std::string> warnings;
};

/// Derives MLA, AUCs and aggregates from per-image outcomes.
MetricReport summarize(std::vector<ImageOutcome> images, int classes);

/// Per-image CSV: image_id, then dice_m, iou_m, true_m, pred_m, prob_m for
/// each class m = 1..N.
std::string format_report_csv(const MetricReport& report);
/// Rebuilds a report (re-running summarize) from the per-image CSV.
MetricReport parse_report_csv(std::string_view text);

/// JSON summary of the aggregate fields.
std::string format_summary_json(const MetricReport& report);

void write_report(const std::filesystem::path& dir, const MetricReport& report);

}  // namespace tlunet::metrics
