#include "chainsurv/harness/cross_validation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"
#include "chainsurv/harness/km_plot.hpp"
#include "chainsurv/harness/model.hpp"
#include "chainsurv/io/binning.hpp"
#include "chainsurv/io/folds.hpp"
#include "chainsurv/metrics/concordance.hpp"

namespace chainsurv::harness {

namespace {

enum Stream : std::uint64_t { kFolds = 1, kInit, kShuffle, kMi, kPatches };

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> order, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

FoldResult run_fold(const RunConfig& config, const io::Cohort& cohort, std::size_t d, const io::FoldSplit& split,
                    std::size_t fold, std::size_t& layers, std::size_t& bins) {
  FoldResult r;
  r.fold = fold;
  r.train_indices = split.train_indices(fold);
  r.test_indices = split.test_indices(fold);

  std::vector<double> train_times;
  std::vector<int> train_cens;
  for (std::size_t i : r.train_indices) {
    train_times.push_back(cohort.samples[i].label.time);
    train_cens.push_back(cohort.samples[i].label.censorship);
  }
  r.bin_edges = io::compute_bin_edges(train_times, train_cens, static_cast<int>(config.bins));

  std::vector<PreparedSample> prepared;
  prepared.reserve(cohort.size());
  for (const auto& s : cohort.samples) {
    PreparedSample p = prepare(s);
    p.label.time_bin = io::bin_for_time(r.bin_edges, p.label.time);
    prepared.push_back(std::move(p));
  }

  SurvivalModel model(config, d, core::derive_seed(config.seed, kInit, fold));
  layers = model.transformer_layers();
  bins = model.hazard_bins();
  const core::AdamWOptions adam{.lr = config.lr, .weight_decay = config.weight_decay};

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order = r.train_indices;
    core::Rng shuffle_rng(core::derive_seed(config.seed, kShuffle, fold, epoch));
    core::shuffle(std::span<std::size_t>(order), shuffle_rng);
    const auto batches = make_batches(std::move(order), config.batch_size);
    EpochLoss sum;
    for (std::size_t step = 0; step < batches.size(); ++step) {
      std::vector<const PreparedSample*> batch;
      for (std::size_t i : batches[step]) batch.push_back(&prepared[i]);
      model.parameters().zero_grad();
      const BatchLoss loss = model.batch_loss(batch, core::derive_seed(config.seed, kMi, fold, epoch, step));
      const double total = loss.total.item();
      if (!std::isfinite(total)) {
        throw NumericFault("training diverged: fold " + std::to_string(fold) + " epoch " + std::to_string(epoch) +
                           " step " + std::to_string(step) + " has non-finite loss (surv=" +
                           std::to_string(loss.surv) + ", rec=" + std::to_string(loss.rec) +
                           ", mi=" + std::to_string(loss.mi) + ")");
      }
      core::backward(loss.total);
      core::adamw_step(model.parameters().params(), adam);
      sum.total += total;
      sum.surv += loss.surv;
      sum.rec += loss.rec;
      sum.mi += loss.mi;
      r.mi_pairs = loss.mi_pairs;
    }
    const double n = static_cast<double>(batches.size());
    r.epoch_loss.push_back({sum.total / n, sum.surv / n, sum.rec / n, sum.mi / n});
    spdlog::info("fold {} epoch {}: loss {:.5f} (surv {:.5f}, rec {:.5f}, mi {:.5f})", fold, epoch + 1,
                 r.epoch_loss.back().total, r.epoch_loss.back().surv, r.epoch_loss.back().rec,
                 r.epoch_loss.back().mi);
  }

  for (std::size_t i : r.test_indices) {
    const PreparedSample& s = prepared[i];
    r.ids.push_back(s.id);
    r.risk.push_back(model.risk(s));
    r.times.push_back(s.label.time);
    r.censorship.push_back(s.label.censorship);
  }
  evaluate_predictions(r);
  spdlog::info("fold {}: test C-index {:.4f}", fold, r.c_index);
  return r;
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["cohort"] = c.cohort.string();
  j["prompts"] = c.prompts.string();
  j["text_embeddings"] = c.text_embeddings.string();
  j["d"] = c.d;
  j["d_text"] = c.d_text;
  j["n_gene"] = c.n_gene;
  j["n_meth"] = c.n_meth;
  j["k_patches"] = c.k_patches;
  j["lambda"] = c.lambda;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["folds"] = c.folds;
  j["bins"] = c.bins;
  j["seed"] = c.seed;
  j["use_adapter"] = c.ablation.use_adapter;
  j["use_amt"] = c.ablation.use_amt;
  j["use_mi"] = c.ablation.use_mi;
  j["vanilla_prompt_only"] = c.ablation.vanilla_prompt_only;
  auto enabled = nlohmann::ordered_json::array();
  for (io::Modality m : io::kCanonicalOrder) {
    if (c.ablation.enabled_modalities[io::index_of(m)]) enabled.push_back(std::string(io::to_string(m)));
  }
  j["enabled_modalities"] = enabled;
  j["loss.eq1_literal"] = c.eq1_literal;
  return j;
}

}  // namespace

io::Cohort prepare_cohort(const RunConfig& config, io::Cohort cohort) {
  if (cohort.size() == 0) throw ValidationError("empty cohort");
  const io::ChainLayout layout{config.n_gene, config.n_meth};
  for (const auto& s : cohort.samples) io::validate_sample(s, layout, cohort.dim);
  if (config.d != 0 && config.d != cohort.dim) {
    throw ValidationError("config d=" + std::to_string(config.d) + " but cohort tokens have dim " +
                          std::to_string(cohort.dim));
  }
  io::cap_local_patches(cohort, config.k_patches, core::derive_seed(config.seed, kPatches));
  return cohort;
}

CvReport run_cv(const RunConfig& config, const io::Cohort& raw_cohort) {
  validate(config);
  const io::Cohort cohort = prepare_cohort(config, raw_cohort);
  CvReport report;
  report.config = config;
  report.d = cohort.dim;
  const io::FoldSplit split = io::kfold_split(cohort.size(), config.folds, core::derive_seed(config.seed, kFolds));
  for (std::size_t f = 0; f < config.folds; ++f) {
    report.folds.push_back(run_fold(config, cohort, cohort.dim, split, f, report.transformer_layers, report.hazard_bins));
  }
  double mean = 0.0;
  for (const auto& f : report.folds) mean += f.c_index;
  mean /= static_cast<double>(report.folds.size());
  double var = 0.0;
  for (const auto& f : report.folds) var += (f.c_index - mean) * (f.c_index - mean);
  report.mean_c_index = mean;
  report.std_c_index = std::sqrt(var / static_cast<double>(report.folds.size() - 1));
  return report;
}

void evaluate_predictions(FoldResult& r) {
  r.c_index = metrics::c_index(r.risk, r.times, r.censorship);
  r.high_risk = metrics::median_split(r.risk);
  std::vector<double> th, tl;
  std::vector<int> ch, cl;
  for (std::size_t i = 0; i < r.risk.size(); ++i) {
    (r.high_risk[i] ? th : tl).push_back(r.times[i]);
    (r.high_risk[i] ? ch : cl).push_back(r.censorship[i]);
  }
  r.km_high.reset();
  r.km_low.reset();
  r.log_rank.reset();
  if (!th.empty()) r.km_high = metrics::km_estimate(th, ch);
  if (!tl.empty()) r.km_low = metrics::km_estimate(tl, cl);
  if (th.empty() || tl.empty()) {
    spdlog::warn("fold {}: median split left a group empty; no log-rank test", r.fold);
    return;
  }
  try {
    r.log_rank = metrics::log_rank(th, ch, tl, cl);
  } catch (const ValidationError& e) {
    spdlog::warn("fold {}: {}", r.fold, e.what());
  }
}

std::string report_json(const CvReport& report) {
  nlohmann::ordered_json j;
  auto per_fold = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) per_fold.push_back(f.c_index);
  j["c_index"] = {{"mean", report.mean_c_index}, {"std", report.std_c_index}, {"per_fold", per_fold}};
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) {
    nlohmann::ordered_json fj;
    fj["fold"] = f.fold;
    fj["train_size"] = f.train_indices.size();
    fj["test_size"] = f.test_indices.size();
    fj["c_index"] = f.c_index;
    std::size_t high = 0;
    for (bool h : f.high_risk) high += h;
    fj["n_high_risk"] = high;
    fj["n_low_risk"] = f.high_risk.size() - high;
    if (f.log_rank) {
      fj["log_rank"] = {{"statistic", f.log_rank->statistic}, {"p_value", f.log_rank->p_value}, {"dof", 1}};
    } else {
      fj["log_rank"] = nullptr;
    }
    fj["bin_edges"] = f.bin_edges;
    if (!f.epoch_loss.empty()) {
      const auto& first = f.epoch_loss.front();
      const auto& last = f.epoch_loss.back();
      fj["train_loss"] = {{"first_epoch", {{"total", first.total}, {"surv", first.surv}, {"rec", first.rec}, {"mi", first.mi}}},
                          {"last_epoch", {{"total", last.total}, {"surv", last.surv}, {"rec", last.rec}, {"mi", last.mi}}}};
    }
    fj["mi_pairs"] = f.mi_pairs;
    folds.push_back(fj);
  }
  j["folds"] = folds;
  j["model"] = {{"d", report.d},
                {"transformer_layers", report.transformer_layers},
                {"hazard_bins", report.hazard_bins}};
  j["config"] = config_json(report.config);
  return j.dump(2) + "\n";
}

std::string predictions_csv(const FoldResult& fold) {
  std::ostringstream os;
  os << std::setprecision(17) << "id,risk,time,censorship\n";
  for (std::size_t i = 0; i < fold.ids.size(); ++i) {
    os << fold.ids[i] << ',' << fold.risk[i] << ',' << fold.times[i] << ',' << fold.censorship[i] << '\n';
  }
  return os.str();
}

FoldResult read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open predictions file " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,risk,time,censorship") {
    throw ValidationError(path.string() + ": expected header 'id,risk,time,censorship'");
  }
  FoldResult r;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string id, risk, time, cens;
    if (!std::getline(row, id, ',') || !std::getline(row, risk, ',') || !std::getline(row, time, ',') ||
        !std::getline(row, cens)) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      r.ids.push_back(id);
      r.risk.push_back(std::stod(risk));
      r.times.push_back(std::stod(time));
      const int c = std::stoi(cens);
      if (c != 0 && c != 1) throw std::invalid_argument("censorship");
      r.censorship.push_back(c);
    } catch (const std::logic_error&) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) + ": malformed value");
    }
  }
  if (r.ids.empty()) throw ValidationError(path.string() + ": no predictions");
  return r;
}

void write_outputs(const CvReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << text;
  };
  write(out_dir / "report.json", report_json(report));
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) {
    edges.push_back({{"fold", f.fold}, {"edges", f.bin_edges}});
    write(out_dir / ("fold_" + std::to_string(f.fold) + ".csv"), predictions_csv(f));
    if (f.km_high && f.km_low) {
      emit_km_svg(*f.km_high, *f.km_low, f.log_rank ? std::optional<double>(f.log_rank->p_value) : std::nullopt,
                  out_dir / ("km_fold_" + std::to_string(f.fold) + ".svg"), "Fold " + std::to_string(f.fold));
    }
  }
  write(out_dir / "bin_edges.json", edges.dump(2) + "\n");
}

}  // namespace chainsurv::harness
