#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chainsurv/harness/config.hpp"
#include "chainsurv/io/cohort.hpp"
#include "chainsurv/metrics/kaplan_meier.hpp"
#include "chainsurv/metrics/log_rank.hpp"

namespace chainsurv::harness {

struct EpochLoss {
  double total = 0.0, surv = 0.0, rec = 0.0, mi = 0.0;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<double> bin_edges;
  double c_index = 0.0;
  // Test-set predictions, aligned with test_indices.
  std::vector<std::string> ids;
  std::vector<double> risk;
  std::vector<double> times;
  std::vector<int> censorship;
  std::vector<bool> high_risk;
  std::optional<metrics::KMCurve> km_high;
  std::optional<metrics::KMCurve> km_low;
  std::optional<metrics::LogRankResult> log_rank;
  std::vector<EpochLoss> epoch_loss;  // mean batch loss per epoch
  std::size_t mi_pairs = 0;           // pairs per batch in the last step
};

struct CvReport {
  RunConfig config;
  std::size_t d = 0;
  std::vector<FoldResult> folds;
  double mean_c_index = 0.0;
  double std_c_index = 0.0;  // sample standard deviation across folds
  std::size_t transformer_layers = 0;
  std::size_t hazard_bins = 0;
};

// Validates the cohort against the config layout and caps path_local chains
// at k_patches (seeded by config.seed).
io::Cohort prepare_cohort(const RunConfig& config, io::Cohort cohort);

// k-fold cross-validation. Bin edges come from each fold's training set.
// Deterministic in (config, cohort). Throws NumericFault naming the fold,
// epoch and step when the training loss is not finite.
CvReport run_cv(const RunConfig& config, const io::Cohort& cohort);

// Evaluates a set of (risk, time, censorship) predictions the way a fold is
// evaluated: C-index, median split, per-group KM and log-rank.
void evaluate_predictions(FoldResult& fold);

std::string report_json(const CvReport& report);
// report.json, fold_<i>.csv, km_fold_<i>.svg, bin_edges.json
void write_outputs(const CvReport& report, const std::filesystem::path& out_dir);

// Reads a fold_<i>.csv (id,risk,time,censorship).
FoldResult read_predictions(const std::filesystem::path& path);
std::string predictions_csv(const FoldResult& fold);

}  // namespace chainsurv::harness
