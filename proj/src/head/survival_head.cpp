#include "chainsurv/head/survival_head.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/ops.hpp"

namespace chainsurv::head {

namespace {

constexpr double kLogFloor = 1e-12;

void check_bin(const io::SurvivalLabel& label) {
  if (label.time_bin < 0 || label.time_bin >= static_cast<int>(kBins)) {
    throw ContractViolation("surv_nll: time_bin " + std::to_string(label.time_bin) + " not assigned or out of range");
  }
  if (label.censorship != 0 && label.censorship != 1) throw ContractViolation("surv_nll: censorship must be 0 or 1");
}

}  // namespace

IntraProjector::IntraProjector(core::ParameterStore& store, std::size_t d, core::Rng& rng)
    : d_(d), proj_(core::make_linear(store, "head.intra", io::kModalityCount * d, d, rng)) {}

core::Tensor IntraProjector::forward(const std::array<core::Tensor, io::kModalityCount>& raw_chains) const {
  std::vector<core::Tensor> pooled;
  for (std::size_t m = 0; m < io::kModalityCount; ++m) {
    const core::Tensor& c = raw_chains[m];
    if (!c.defined() || c.rank() != 2 || c.cols() != d_) {
      throw ContractViolation("intra_forward: " + std::string(io::to_string(static_cast<io::Modality>(m))) +
                              " chain must be [n, " + std::to_string(d_) + "]");
    }
    pooled.push_back(core::mean_rows(c));
  }
  return proj_(core::concat_last_axis(pooled));
}

InterProjector::InterProjector(core::ParameterStore& store, std::size_t d, core::Rng& rng)
    : proj_(core::make_linear(store, "head.inter", d, d, rng)) {}

core::Tensor InterProjector::forward(const core::Tensor& recon) const { return proj_(core::mean_rows(recon)); }

core::Tensor InterProjector::forward(const amt::AmtOutput& out, const amt::InterleavedSequence& seq) const {
  std::vector<std::size_t> real;
  for (std::size_t i = 0; i < seq.length(); ++i) {
    if (seq.pad_mask[i]) real.push_back(i);
  }
  if (real.empty()) throw ContractViolation("inter_forward: every slot is padding");
  if (real.size() == out.recon.rows()) return forward(out.recon);
  return forward(core::embedding_lookup(out.recon, real));
}

HazardClassifier::HazardClassifier(core::ParameterStore& store, std::size_t fused_width, core::Rng& rng)
    : width_(fused_width), fc_(core::make_linear(store, "head.classifier", fused_width, kBins, rng)) {}

HazardOutput HazardClassifier::forward(const core::Tensor& intra, const core::Tensor& inter) const {
  return forward(core::concat_last_axis({intra, inter}));
}

HazardOutput HazardClassifier::forward(const core::Tensor& fused) const {
  if (fused.rank() != 2 || fused.rows() != 1 || fused.cols() != width_) {
    throw ContractViolation("hazards: fused token must be [1, " + std::to_string(width_) + "], got " +
                            core::shape_string(fused.shape()));
  }
  return hazards_from_logits(fc_(fused));
}

std::array<double, kBins> survival_curve(std::span<const double> hazards) {
  if (hazards.size() != kBins) throw ContractViolation("survival_curve: expected 4 hazards");
  std::array<double, kBins> s{};
  double running = 1.0;
  for (std::size_t t = 0; t < kBins; ++t) {
    running *= 1.0 - hazards[t];
    s[t] = running;
  }
  return s;
}

HazardOutput hazards_from_logits(const core::Tensor& logits) {
  if (logits.numel() != kBins) throw ContractViolation("hazards: expected 4 logits");
  HazardOutput h;
  h.logits = logits;
  h.hazards = core::sigmoid(logits);
  h.survival = survival_curve(h.hazards.data());
  return h;
}

double surv_nll(std::span<const double> hazards, const io::SurvivalLabel& label) {
  check_bin(label);
  const auto s = survival_curve(hazards);
  const auto bin = static_cast<std::size_t>(label.time_bin);
  if (label.censorship == 1) return -std::log(std::max(s[bin], kLogFloor));
  const double s_prev = bin == 0 ? 1.0 : s[bin - 1];
  return -std::log(std::max(s_prev, kLogFloor)) - std::log(std::max(hazards[bin], kLogFloor));
}

core::Tensor surv_nll(const core::Tensor& logits, const io::SurvivalLabel& label, NllForm form) {
  check_bin(label);
  if (logits.rank() != 2 || logits.rows() != 1 || logits.cols() != kBins) {
    throw ContractViolation("surv_nll: logits must be [1, 4], got " + core::shape_string(logits.shape()));
  }
  const auto bin = static_cast<std::size_t>(label.time_bin);
  // log(1 - sigmoid(x)) = log sigmoid(-x)
  const core::Tensor log_survive = core::log_sigmoid(core::scale(logits, -1.0));
  if (label.censorship == 1) return core::scale(core::sum(core::slice_cols(log_survive, 0, bin + 1)), -1.0);
  if (form == NllForm::censored_term_only) return core::scale(core::sum(logits), 0.0);
  core::Tensor log_lik = core::sum(core::log_sigmoid(core::slice_cols(logits, bin, 1)));
  if (bin > 0) log_lik = core::add(log_lik, core::sum(core::slice_cols(log_survive, 0, bin)));
  return core::scale(log_lik, -1.0);
}

double risk_score(std::span<const double> survival) {
  double total = 0.0;
  for (double s : survival) total += s;
  return -total;
}

double risk_score(const HazardOutput& h) { return risk_score(h.survival); }

double total_loss(double surv, double rec, double mi, double lambda) {
  if (lambda < 0.0) throw ContractViolation("total_loss: lambda must be >= 0");
  return surv + rec + lambda * mi;
}

core::Tensor total_loss(const core::Tensor& surv, const core::Tensor& rec, const core::Tensor& mi, double lambda) {
  if (lambda < 0.0) throw ContractViolation("total_loss: lambda must be >= 0");
  return core::add(core::add(surv, rec), core::scale(mi, lambda));
}

}  // namespace chainsurv::head
