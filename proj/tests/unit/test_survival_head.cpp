#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/gradcheck.hpp"
#include "chainsurv/core/ops.hpp"
#include "chainsurv/head/survival_head.hpp"

using namespace chainsurv;
using namespace chainsurv::head;

namespace {

core::Tensor random_tokens(std::size_t n, std::size_t d, core::Rng& rng) {
  std::vector<double> v(n * d);
  for (double& x : v) x = rng.normal();
  return core::Tensor::from({n, d}, v);
}

io::SurvivalLabel label(int bin, int censored) { return {1.0, censored, bin}; }

core::Tensor logits_of(std::vector<double> v) { return core::Tensor::from({1, 4}, std::move(v)); }

}  // namespace

TEST(Hazards, ZeroLogitsGivePowersOfHalf) {
  const HazardOutput h = hazards_from_logits(logits_of({0, 0, 0, 0}));
  for (double f : h.hazards.data()) EXPECT_EQ(f, 0.5);
  EXPECT_EQ(h.survival[0], 0.5);
  EXPECT_EQ(h.survival[1], 0.25);
  EXPECT_EQ(h.survival[2], 0.125);
  EXPECT_EQ(h.survival[3], 0.0625);
}

TEST(Hazards, VeryNegativeLogitsGiveSurvivalOne) {
  const HazardOutput h = hazards_from_logits(logits_of({-800, -800, -800, -800}));
  for (double s : h.survival) EXPECT_EQ(s, 1.0);
}

TEST(Hazards, SurvivalIsRunningProductAndNonIncreasing) {
  core::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> l(4);
    for (double& x : l) x = 4.0 * rng.normal();
    const HazardOutput h = hazards_from_logits(logits_of(l));
    double running = 1.0;
    for (std::size_t t = 0; t < 4; ++t) {
      running *= 1.0 - h.hazards.data()[t];
      EXPECT_EQ(h.survival[t], running);
      if (t > 0) {
        EXPECT_LE(h.survival[t], h.survival[t - 1]);
      }
      EXPECT_GE(h.survival[t], 0.0);
      EXPECT_LE(h.survival[t], 1.0);
    }
  }
}

TEST(SurvNll, SpecExamples) {
  EXPECT_EQ(surv_nll(std::vector<double>{0, 0, 0, 0}, label(2, 1)), 0.0);
  EXPECT_EQ(surv_nll(std::vector<double>{1, 0.3, 0.3, 0.3}, label(0, 0)), 0.0);
  EXPECT_NEAR(surv_nll(std::vector<double>{0.5, 0.5, 0.2, 0.2}, label(1, 1)), 1.3862943611198906, 1e-12);
}

TEST(SurvNll, ClampsLogArguments) {
  const double v = surv_nll(std::vector<double>{0, 0, 0, 0}, label(1, 0));
  EXPECT_NEAR(v, -std::log(1e-12), 1e-9);
}

TEST(SurvNll, TensorFormMatchesScalarFormAndIsNonNegative) {
  core::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> l(4);
    for (double& x : l) x = 3.0 * rng.normal();
    const auto lab = label(static_cast<int>(rng.below(4)), static_cast<int>(rng.below(2)));
    const auto t = logits_of(l);
    const double tensor_nll = surv_nll(t, lab).item();
    const double scalar_nll = surv_nll(hazards_from_logits(t).hazards.data(), lab);
    EXPECT_NEAR(tensor_nll, scalar_nll, 1e-9 * (1.0 + scalar_nll));
    EXPECT_GE(tensor_nll, 0.0);
  }
}

TEST(SurvNll, TensorFormStaysFiniteForExtremeLogits) {
  const auto t = logits_of({-1000, 1000, -1000, 1000});
  EXPECT_TRUE(std::isfinite(surv_nll(t, label(3, 0)).item()));
  EXPECT_TRUE(std::isfinite(surv_nll(t, label(3, 1)).item()));
}

TEST(SurvNll, CensoredTermOnlyReproducesPrintedFormula) {
  core::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> l(4);
    for (double& x : l) x = 2.0 * rng.normal();
    const int bin = static_cast<int>(rng.below(4));
    const auto t = logits_of(l);
    const auto h = hazards_from_logits(t);
    const double printed = -std::log(h.survival[static_cast<std::size_t>(bin)]);
    EXPECT_NEAR(surv_nll(t, label(bin, 1), NllForm::censored_term_only).item(), printed, 1e-9);
    EXPECT_EQ(surv_nll(t, label(bin, 0), NllForm::censored_term_only).item(), 0.0);
  }
}

TEST(SurvNll, GradientMatchesFiniteDifferences) {
  core::Rng rng(4);
  for (int bin = 0; bin < 4; ++bin) {
    for (int c = 0; c < 2; ++c) {
      core::Tensor l = core::Tensor::from({1, 4}, {rng.normal(), rng.normal(), rng.normal(), rng.normal()}, true);
      const double err = core::grad_check([&](const core::Tensor& p) { return surv_nll(p, label(bin, c)); }, l, 1e-5);
      EXPECT_LT(err, 1e-6) << "bin " << bin << " c " << c;
    }
  }
}

TEST(SurvNll, UnassignedBinIsContractViolation) {
  EXPECT_THROW(surv_nll(std::vector<double>{0.1, 0.1, 0.1, 0.1}, label(-1, 0)), ContractViolation);
  EXPECT_THROW(surv_nll(logits_of({0, 0, 0, 0}), label(4, 0)), ContractViolation);
}

TEST(RiskScore, Extremes) {
  EXPECT_EQ(risk_score(survival_curve(std::vector<double>{0, 0, 0, 0})), -4.0);
  EXPECT_EQ(risk_score(survival_curve(std::vector<double>{1, 1, 1, 1})), 0.0);
}

TEST(RiskScore, MonotoneInEveryHazard) {
  const std::vector<double> grid{0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  for (double a : grid) {
    for (double b : grid) {
      for (double c : grid) {
        std::vector<double> f{a, b, c, 0.4};
        for (std::size_t j = 0; j < 4; ++j) {
          auto g = f;
          g[j] = std::min(0.999, g[j] + 0.05);
          EXPECT_LT(risk_score(survival_curve(f)), risk_score(survival_curve(g)));
        }
      }
    }
  }
}

TEST(TotalLoss, Examples) {
  EXPECT_NEAR(total_loss(1, 1, 1, 0.3), 2.3, 1e-15);
  EXPECT_EQ(total_loss(1.5, 0.25, 7.0, 0.0), 1.75);
  EXPECT_EQ(total_loss(0, 0, 0), 0.0);
  EXPECT_NEAR(total_loss(core::Tensor::scalar(1), core::Tensor::scalar(1), core::Tensor::scalar(1)).item(), 2.3,
              1e-15);
  EXPECT_THROW(total_loss(1, 1, 1, -0.1), ContractViolation);
}

TEST(IntraProjectorTest, ZeroChainsGiveZeroToken) {
  core::ParameterStore store;
  core::Rng rng(5);
  IntraProjector intra(store, 8, rng);
  std::array<core::Tensor, 4> chains{core::Tensor::zeros({6, 8}), core::Tensor::zeros({8, 8}),
                                     core::Tensor::zeros({3, 8}), core::Tensor::zeros({1, 8})};
  const auto tok = intra.forward(chains);
  EXPECT_EQ(tok.shape(), (core::Shape{1, 8}));
  for (double v : tok.data()) EXPECT_EQ(v, 0.0);
}

TEST(IntraProjectorTest, DeterministicAndDimChecked) {
  core::ParameterStore store;
  core::Rng rng(6);
  IntraProjector intra(store, 8, rng);
  std::array<core::Tensor, 4> chains{random_tokens(6, 8, rng), random_tokens(8, 8, rng), random_tokens(3, 8, rng),
                                     random_tokens(1, 8, rng)};
  const auto a = intra.forward(chains);
  const auto b = intra.forward(chains);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  chains[2] = random_tokens(3, 7, rng);
  EXPECT_THROW(intra.forward(chains), ContractViolation);
}

TEST(IntraProjectorTest, GradientMatchesFiniteDifferences) {
  core::ParameterStore store;
  core::Rng rng(7);
  IntraProjector intra(store, 8, rng);
  HazardClassifier cls(store, 8, rng);
  for (auto& p : store.params()) {
    for (double& v : p.tensor.mutable_data()) v += 0.05 * rng.normal();
  }
  std::array<core::Tensor, 4> chains{random_tokens(6, 8, rng), random_tokens(8, 8, rng), random_tokens(3, 8, rng),
                                     random_tokens(1, 8, rng)};
  auto f = [&] { return surv_nll(cls.forward(intra.forward(chains)).logits, label(2, 0)); };
  auto tensors = store.tensors();
  EXPECT_LT(core::grad_check(f, tensors, 1e-5).max_relative_error, 1e-3);
}

TEST(InterProjectorTest, ZeroReconGivesZeroTokenForAnyLength) {
  core::ParameterStore store;
  core::Rng rng(8);
  InterProjector inter(store, 8, rng);
  for (std::size_t L : {1u, 5u, 31u}) {
    const auto tok = inter.forward(core::Tensor::zeros({L, 8}));
    EXPECT_EQ(tok.shape(), (core::Shape{1, 8}));
    for (double v : tok.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(InterProjectorTest, GradientReachesDecoder) {
  core::ParameterStore store;
  core::Rng rng(9);
  amt::AmtDecoder decoder(store, {.d = 8, .max_length = 12}, rng);
  InterProjector inter(store, 8, rng);
  IntraProjector intra(store, 8, rng);
  HazardClassifier cls(store, 16, rng);
  const std::vector<amt::ChainTokens> chains{{io::Modality::gene, random_tokens(3, 8, rng)},
                                             {io::Modality::meth, random_tokens(4, 8, rng)},
                                             {io::Modality::path_local, random_tokens(2, 8, rng)},
                                             {io::Modality::path_global, random_tokens(1, 8, rng)}};
  const auto seq = amt::interleave(chains, decoder.start_token());
  const auto out = decoder.forward(seq);
  std::array<core::Tensor, 4> raw{chains[0].tokens, chains[1].tokens, chains[2].tokens, chains[3].tokens};
  const auto h = cls.forward(intra.forward(raw), inter.forward(out, seq));
  core::backward(surv_nll(h.logits, label(1, 0)));
  for (const auto& p : store.params()) {
    if (!p.name.starts_with("amt.layer1.mlp.fc2.w") && p.name != "amt.start") continue;
    double norm = 0.0;
    for (double g : p.tensor.grad()) norm += std::abs(g);
    EXPECT_GT(norm, 0.0) << p.name;
  }
}

TEST(HazardClassifierTest, FusedShapeChecked) {
  core::ParameterStore store;
  core::Rng rng(10);
  HazardClassifier cls(store, 16, rng);
  EXPECT_EQ(cls.bins(), 4u);
  EXPECT_THROW(cls.forward(core::Tensor::zeros({1, 15})), ContractViolation);
  const auto h = cls.forward(core::Tensor::zeros({1, 8}), core::Tensor::zeros({1, 8}));
  EXPECT_EQ(h.logits.shape(), (core::Shape{1, 4}));
}
