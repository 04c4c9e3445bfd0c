#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "tlunet/report/experiment.hpp"

namespace tlunet::report {

/// label,network,init,fraction,class,metric,count,mean,median,ci75_low,
/// ci75_high,ci95_low,ci95_high. class "all" is the per-image mean over
/// classes; "m_present" restricts class m to images where it occurs.
std::string format_box_stats_csv(std::span<const RunArtifacts> runs);
/// label,class,fpr,tpr,threshold. Classes with an undefined ROC are omitted.
std::string format_roc_csv(std::span<const RunArtifacts> runs);
/// label,epoch,train_loss,val_loss,val_dice,val_mla.
std::string format_convergence_csv(std::span<const RunArtifacts> runs);

/// Writes box_stats.csv, roc.csv and convergence.csv. Requires at least
/// one run.
void emit_plot_data(const std::filesystem::path& dir, std::span<const RunArtifacts> runs);

}  // namespace tlunet::report
