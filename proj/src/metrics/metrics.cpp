#include "tlunet/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "tlunet/io.hpp"

namespace tlunet::metrics {

namespace {

struct Overlap {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t both = 0;
};

Overlap count_overlap(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size()) {
    throw ValidationError("mask size mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
  }
  Overlap o;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool a = x[i] != 0;
    const bool b = y[i] != 0;
    o.x += a;
    o.y += b;
    o.both += a && b;
  }
  return o;
}

}  // namespace

double dice(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  const Overlap o = count_overlap(x, y);
  if (o.x + o.y == 0) return 1.0;
  return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.x + o.y);
}

double iou(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  const Overlap o = count_overlap(x, y);
  const std::size_t uni = o.x + o.y - o.both;
  if (uni == 0) return 1.0;
  return static_cast<double>(o.both) / static_cast<double>(uni);
}

double mla(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
           int classes) {
  if (predicted.size() != truth.size()) throw ValidationError("label matrix shape mismatch");
  if (classes < 1 || truth.size() % classes != 0) {
    throw ValidationError("label matrix is not images x classes");
  }
  const std::size_t images = truth.size() / classes;
  if (images == 0) throw ValidationError("MLA over zero images");
  double total = 0;
  for (std::size_t i = 0; i < images; ++i) {
    int correct = 0;
    for (int m = 0; m < classes; ++m) {
      correct += (predicted[i * classes + m] != 0) == (truth[i * classes + m] != 0);
    }
    total += static_cast<double>(correct) / classes;
  }
  return total / static_cast<double>(images);
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedAucError("AUC undefined: labels contain a single class");
  }
  const double np = static_cast<double>(positives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const auto positives = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; }));
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw UndefinedAucError("ROC undefined: single class");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> points{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  double tp = 0;
  double fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    points.push_back({fp / negatives, tp / positives, s});
  }
  return points;
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

SummaryStats aggregate(std::span<const double> values) {
  if (values.empty()) throw ValidationError("aggregate needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.count = sorted.size();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.median = percentile_sorted(sorted, 0.5);
  s.ci75_low = percentile_sorted(sorted, 0.125);
  s.ci75_high = percentile_sorted(sorted, 0.875);
  s.ci95_low = percentile_sorted(sorted, 0.025);
  s.ci95_high = percentile_sorted(sorted, 0.975);
  return s;
}

double ImageOutcome::mean_dice() const {
  if (dice.empty()) return 0.0;
  return std::accumulate(dice.begin(), dice.end(), 0.0) / static_cast<double>(dice.size());
}

MetricReport summarize(std::vector<ImageOutcome> images, int classes) {
  if (images.empty()) throw ValidationError("cannot summarize zero images");
  MetricReport r;
  r.classes = classes;
  std::vector<std::uint8_t> truth;
  std::vector<std::uint8_t> pred;
  for (const auto& img : images) {
    if (static_cast<int>(img.dice.size()) != classes || static_cast<int>(img.iou.size()) != classes ||
        static_cast<int>(img.true_labels.size()) != classes ||
        static_cast<int>(img.pred_labels.size()) != classes ||
        static_cast<int>(img.class_probs.size()) != classes) {
      throw ValidationError("image outcome " + img.image_id + " has the wrong class count");
    }
    truth.insert(truth.end(), img.true_labels.begin(), img.true_labels.end());
    pred.insert(pred.end(), img.pred_labels.begin(), img.pred_labels.end());
  }
  r.mla = mla(pred, truth, classes);

  double auc_sum = 0;
  int auc_count = 0;
  double dice_sum = 0;
  double iou_sum = 0;
  for (int m = 0; m < classes; ++m) {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    std::vector<double> d;
    std::vector<double> j;
    std::vector<double> d_present;
    std::vector<double> j_present;
    for (const auto& img : images) {
      scores.push_back(img.class_probs[m]);
      labels.push_back(img.true_labels[m]);
      d.push_back(img.dice[m]);
      j.push_back(img.iou[m]);
      if (img.true_labels[m]) {
        d_present.push_back(img.dice[m]);
        j_present.push_back(img.iou[m]);
      }
    }
    try {
      const double a = auc(scores, labels);
      r.auc_per_class.push_back(a);
      auc_sum += a;
      ++auc_count;
    } catch (const UndefinedAucError&) {
      r.auc_per_class.push_back(std::nullopt);
      r.warnings.push_back(fmt::format("class {}: AUC undefined (single label value); excluded from macro average", m + 1));
    }
    ClassAggregates agg{aggregate(d), aggregate(j), std::nullopt, std::nullopt};
    if (!d_present.empty()) {
      agg.dice_present = aggregate(d_present);
      agg.iou_present = aggregate(j_present);
    }
    r.per_class.push_back(agg);
    dice_sum += std::accumulate(d.begin(), d.end(), 0.0);
    iou_sum += std::accumulate(j.begin(), j.end(), 0.0);
  }
  r.auc_macro = auc_count > 0 ? auc_sum / auc_count : std::numeric_limits<double>::quiet_NaN();
  const double entries = static_cast<double>(images.size()) * classes;
  r.mean_dice = dice_sum / entries;
  r.mean_iou = iou_sum / entries;
  r.images = std::move(images);
  return r;
}

std::string format_report_csv(const MetricReport& report) {
  std::string out = "image_id";
  for (int m = 1; m <= report.classes; ++m) {
    out += fmt::format(",dice_{0},iou_{0},true_{0},pred_{0},prob_{0}", m);
  }
  out += '\n';
  for (const auto& img : report.images) {
    out += img.image_id;
    for (int m = 0; m < report.classes; ++m) {
      out += fmt::format(",{},{},{},{},{}", format_real(img.dice[m]), format_real(img.iou[m]),
                         int{img.true_labels[m]}, int{img.pred_labels[m]},
                         format_real(img.class_probs[m], 9));
    }
    out += '\n';
  }
  return out;
}

MetricReport parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty report");
  int fields = 1;
  for (char c : line) fields += c == ',';
  if ((fields - 1) % 5 != 0 || fields < 6 || !line.starts_with("image_id")) {
    throw ParseError(1, "unexpected report header");
  }
  const int classes = (fields - 1) / 5;
  std::vector<ImageOutcome> images;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != fields) throw ParseError(line_no, "wrong field count");
    ImageOutcome img;
    img.image_id = cells[0];
    try {
      for (int m = 0; m < classes; ++m) {
        img.dice.push_back(std::stod(cells[1 + 5 * m]));
        img.iou.push_back(std::stod(cells[2 + 5 * m]));
        img.true_labels.push_back(static_cast<std::uint8_t>(std::stoi(cells[3 + 5 * m])));
        img.pred_labels.push_back(static_cast<std::uint8_t>(std::stoi(cells[4 + 5 * m])));
        img.class_probs.push_back(std::stod(cells[5 + 5 * m]));
      }
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "non-numeric report field");
    }
    images.push_back(std::move(img));
  }
  return summarize(std::move(images), classes);
}

namespace {

nlohmann::ordered_json stats_json(const SummaryStats& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["mean"] = format_real(s.mean);
  j["median"] = format_real(s.median);
  j["ci75"] = {format_real(s.ci75_low), format_real(s.ci75_high)};
  j["ci95"] = {format_real(s.ci95_low), format_real(s.ci95_high)};
  return j;
}

}  // namespace

std::string format_summary_json(const MetricReport& report) {
  // Reals are emitted as fixed-precision strings so output is byte-stable.
  nlohmann::ordered_json j;
  j["images"] = report.images.size();
  j["classes"] = report.classes;
  j["mla"] = format_real(report.mla);
  j["mean_dice"] = format_real(report.mean_dice);
  j["mean_iou"] = format_real(report.mean_iou);
  j["mean_loss"] = format_real(report.mean_loss);
  j["auc_macro"] = format_real(report.auc_macro);
  auto aucs = nlohmann::ordered_json::array();
  for (const auto& a : report.auc_per_class) {
    aucs.push_back(a ? nlohmann::ordered_json(format_real(*a)) : nlohmann::ordered_json(nullptr));
  }
  j["auc_per_class"] = aucs;
  auto classes = nlohmann::ordered_json::array();
  for (int m = 0; m < report.classes; ++m) {
    const auto& agg = report.per_class[m];
    nlohmann::ordered_json c;
    c["class"] = m + 1;
    c["dice"] = stats_json(agg.dice);
    c["iou"] = stats_json(agg.iou);
    c["dice_defect_present"] = agg.dice_present ? stats_json(*agg.dice_present) : nlohmann::ordered_json(nullptr);
    c["iou_defect_present"] = agg.iou_present ? stats_json(*agg.iou_present) : nlohmann::ordered_json(nullptr);
    classes.push_back(c);
  }
  j["per_class"] = classes;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const MetricReport& report) {
  write_text_file(dir / "per_image.csv", format_report_csv(report));
  write_text_file(dir / "summary.json", format_summary_json(report));
}

}  // namespace tlunet::metrics
