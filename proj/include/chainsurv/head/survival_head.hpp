#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "chainsurv/amt/decoder.hpp"
#include "chainsurv/core/nn.hpp"
#include "chainsurv/io/cohort.hpp"

namespace chainsurv::head {

inline constexpr std::size_t kBins = 4;
inline constexpr double kDefaultLambda = 0.3;

// Mean-pools each raw chain, concatenates the four pooled vectors (4d) and
// projects to d. The bias starts (and, with no gradient, stays) at zero.
class IntraProjector {
 public:
  IntraProjector(core::ParameterStore& store, std::size_t d, core::Rng& rng);
  core::Tensor forward(const std::array<core::Tensor, io::kModalityCount>& raw_chains) const;

 private:
  std::size_t d_;
  core::Linear proj_;
};

// Mean-pools the decoder reconstruction over non-pad slots and projects d -> d.
class InterProjector {
 public:
  InterProjector(core::ParameterStore& store, std::size_t d, core::Rng& rng);
  core::Tensor forward(const amt::AmtOutput& out, const amt::InterleavedSequence& seq) const;
  core::Tensor forward(const core::Tensor& recon) const;

 private:
  core::Linear proj_;
};

struct HazardOutput {
  core::Tensor logits;    // [1, bins]
  core::Tensor hazards;   // sigmoid(logits)
  std::array<double, kBins> survival{};  // running product of (1 - hazard)
};

// Linear fused -> bins on the fused [intra || inter] token (2d wide; d when
// the inter branch is ablated).
class HazardClassifier {
 public:
  HazardClassifier(core::ParameterStore& store, std::size_t fused_width, core::Rng& rng);
  HazardOutput forward(const core::Tensor& intra, const core::Tensor& inter) const;
  HazardOutput forward(const core::Tensor& fused) const;
  std::size_t fused_width() const { return width_; }
  std::size_t bins() const { return fc_.out_features(); }

 private:
  std::size_t width_;
  core::Linear fc_;
};

HazardOutput hazards_from_logits(const core::Tensor& logits);
std::array<double, kBins> survival_curve(std::span<const double> hazards);

// Discrete-time negative log-likelihood, censorship 1 = censored:
//   censored:   -log S(bin)
//   uncensored: -log S(bin - 1) - log f(bin),  S(-1) = 1
// Scalar form clamps log arguments at 1e-12.
double surv_nll(std::span<const double> hazards, const io::SurvivalLabel& label);

enum class NllForm { full, censored_term_only };

// Differentiable form on logits, via log sigmoid so it stays finite for any
// finite logit. censored_term_only keeps only -c log S(bin), so uncensored
// samples contribute 0.
core::Tensor surv_nll(const core::Tensor& logits, const io::SurvivalLabel& label, NllForm form = NllForm::full);

// -sum_t S(t); higher means worse prognosis.
double risk_score(std::span<const double> survival);
double risk_score(const HazardOutput& h);

double total_loss(double surv, double rec, double mi, double lambda = kDefaultLambda);
core::Tensor total_loss(const core::Tensor& surv, const core::Tensor& rec, const core::Tensor& mi,
                        double lambda = kDefaultLambda);

}  // namespace chainsurv::head
