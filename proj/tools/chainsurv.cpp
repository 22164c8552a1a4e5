#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/tensor.hpp"
#include "chainsurv/harness/config.hpp"
#include "chainsurv/harness/cross_validation.hpp"
#include "chainsurv/harness/gradcheck_cmd.hpp"
#include "chainsurv/harness/km_plot.hpp"
#include "chainsurv/io/cohort.hpp"
#include "chainsurv/synth/generator.hpp"

namespace fs = std::filesystem;
using namespace chainsurv;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2, kNumeric = 3, kThreshold = 4 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> lambda;
  std::optional<std::size_t> epochs;
  std::vector<std::string> ablations;
  std::optional<std::size_t> folds;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--lambda", f.lambda, "weight of the mutual-information term");
  cmd->add_option("--epochs", f.epochs, "training epochs per fold");
  cmd->add_option("--ablation", f.ablations, "ablation preset(s)")->delimiter(',');
  cmd->add_option("--folds", f.folds, "number of cross-validation folds");
  cmd->add_option("--set", f.sets, "extra config override KEY=VALUE (repeatable)");
  cmd->add_flag("--quiet", f.quiet, "only print warnings and results");
}

harness::RunConfig resolve_config(const CommonFlags& f, const std::string& cohort) {
  harness::RunConfig c = f.config.empty() ? harness::RunConfig{} : harness::load_config(f.config);
  if (!cohort.empty()) c.cohort = cohort;
  if (f.seed) c.seed = *f.seed;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.folds) c.folds = *f.folds;
  for (const auto& a : f.ablations) harness::apply_ablation(c, a);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects KEY=VALUE, got '" + kv + "'");
    harness::set_option(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  harness::validate(c);
  return c;
}

void print_fold(const harness::FoldResult& f) {
  std::printf("fold %zu  C-index %.4f  log-rank p %s\n", f.fold, f.c_index,
              f.log_rank ? harness::format_p_value(f.log_rank->p_value).c_str() : "n/a");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainsurv: multimodal discrete-time survival prediction"};
  app.require_subcommand(1);

  // synth
  CommonFlags synth_flags;
  synth::SynthSpec spec;
  std::string informativeness;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort with a known latent risk");
  synth_cmd->add_option("--out", synth_flags.out, "output directory")->required();
  synth_cmd->add_option("--seed", synth_flags.seed, "random seed");
  synth_cmd->add_option("--n", spec.n, "number of patients");
  synth_cmd->add_option("--d", spec.d, "token dimension");
  synth_cmd->add_option("--n-gene", spec.n_gene, "gene chain length");
  synth_cmd->add_option("--n-meth", spec.n_meth, "methylation chain length");
  synth_cmd->add_option("--k-patches", spec.k_patches, "maximum local patch count");
  synth_cmd->add_option("--signal", spec.signal_strength, "log hazard ratio per unit of latent risk");
  synth_cmd->add_option("--censor-rate", spec.censor_rate, "expected censored fraction");
  synth_cmd->add_option("--noise", spec.noise_std, "feature noise standard deviation");
  synth_cmd->add_option("--informativeness", spec.informativeness, "4 weights: gene,meth,path_local,path_global")
      ->delimiter(',')
      ->expected(4);
  synth_cmd->add_option("--cancer", spec.cancer_type, "cancer type label");
  synth_cmd->add_flag("--quiet", synth_flags.quiet);

  // train
  CommonFlags train_flags;
  std::string cohort;
  auto* train_cmd = app.add_subcommand("train", "k-fold cross-validated training and evaluation");
  add_common(train_cmd, train_flags);
  train_cmd->add_option("--cohort", cohort, "cohort manifest.csv");
  train_cmd->add_option("--out", train_flags.out, "output directory")->required();

  // eval
  std::vector<std::string> prediction_files;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "score saved fold predictions (id,risk,time,censorship)");
  eval_cmd->add_option("predictions", prediction_files, "fold_<i>.csv files")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "directory for KM curve CSVs");

  // km-plot
  std::string plot_in, plot_out, plot_title;
  auto* plot_cmd = app.add_subcommand("km-plot", "median-split Kaplan-Meier SVG from a predictions file");
  plot_cmd->add_option("--input", plot_in, "fold_<i>.csv")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "output .svg")->required();
  plot_cmd->add_option("--title", plot_title, "plot title");

  // gradcheck
  harness::GradcheckOptions gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full objective on a toy model");
  gc_cmd->add_option("--seed", gc.seed, "random seed");
  gc_cmd->add_flag("--corrupt-gradient", gc.corrupt_gradient, "perturb one analytic gradient (negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      spdlog::set_level(synth_flags.quiet ? spdlog::level::warn : spdlog::level::info);
      if (synth_flags.seed) spec.seed = *synth_flags.seed;
      const auto synth = synth::generate_cohort(spec);
      const fs::path out(synth_flags.out);
      const fs::path manifest = io::save_cohort(synth.cohort, out);
      synth::write_oracle_csv(synth, out / "oracle.csv");
      std::printf("wrote %zu patients to %s (oracle risks in %s)\n", synth.cohort.size(), manifest.string().c_str(),
                  (out / "oracle.csv").string().c_str());
      return kOk;
    }
    if (*train_cmd) {
      spdlog::set_level(train_flags.quiet ? spdlog::level::warn : spdlog::level::info);
      const harness::RunConfig config = resolve_config(train_flags, cohort);
      if (config.cohort.empty()) throw ValidationError("no cohort given (--cohort or 'cohort =' in the config)");
      core::set_finite_checks(true);
      const io::Cohort data = io::load_cohort(config.cohort, {config.n_gene, config.n_meth});
      const harness::CvReport report = harness::run_cv(config, data);
      harness::write_outputs(report, train_flags.out);
      for (const auto& f : report.folds) print_fold(f);
      std::printf("mean C-index %.4f +- %.4f over %zu folds\n", report.mean_c_index, report.std_c_index,
                  report.folds.size());
      return kOk;
    }
    if (*eval_cmd) {
      double sum = 0.0;
      for (std::size_t i = 0; i < prediction_files.size(); ++i) {
        harness::FoldResult f = harness::read_predictions(prediction_files[i]);
        f.fold = i;
        harness::evaluate_predictions(f);
        std::printf("%s: ", prediction_files[i].c_str());
        print_fold(f);
        sum += f.c_index;
        if (!eval_out.empty()) {
          fs::create_directories(eval_out);
          const std::string stem = fs::path(prediction_files[i]).stem().string();
          if (f.km_high) metrics::write_km_csv(*f.km_high, fs::path(eval_out) / (stem + "_km_high.csv"));
          if (f.km_low) metrics::write_km_csv(*f.km_low, fs::path(eval_out) / (stem + "_km_low.csv"));
        }
      }
      std::printf("mean C-index %.4f over %zu file(s)\n", sum / static_cast<double>(prediction_files.size()),
                  prediction_files.size());
      return kOk;
    }
    if (*plot_cmd) {
      harness::FoldResult f = harness::read_predictions(plot_in);
      harness::evaluate_predictions(f);
      if (!f.km_high || !f.km_low) throw ValidationError("median split left a group empty; nothing to plot");
      harness::emit_km_svg(*f.km_high, *f.km_low,
                           f.log_rank ? std::optional<double>(f.log_rank->p_value) : std::nullopt, plot_out,
                           plot_title);
      std::printf("wrote %s (log-rank p %s)\n", plot_out.c_str(),
                  f.log_rank ? harness::format_p_value(f.log_rank->p_value).c_str() : "n/a");
      return kOk;
    }
    if (*gc_cmd) {
      const harness::GradcheckOutcome r = harness::run_gradcheck(gc);
      std::printf("max relative error %.3e over %zu coordinates (L=%zu, batch %zu, %.1fs)\n",
                  r.report.max_relative_error, r.report.coordinates, r.sequence_length, r.batch_size, r.seconds);
      std::printf("worst: %s[%zu] analytic %.9e numeric %.9e\n", r.worst_parameter.c_str(), r.report.worst_index,
                  r.report.worst_analytic, r.report.worst_numeric);
      std::printf("%s (threshold %.0e)\n", r.passed ? "PASS" : "FAIL", gc.threshold);
      return r.passed ? kOk : kThreshold;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const NumericFault& e) {
    std::fprintf(stderr, "numeric fault: %s\n", e.what());
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
