#include <gtest/gtest.h>

#include <cmath>

#include "chainsurv/amt/decoder.hpp"
#include "chainsurv/amt/mutual_info.hpp"
#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/gradcheck.hpp"
#include "chainsurv/core/ops.hpp"
#include "test_support.hpp"

using namespace chainsurv;
using namespace chainsurv::amt;
using io::Modality;

namespace {

core::Tensor random_tokens(std::size_t n, std::size_t d, core::Rng& rng, bool grad = false) {
  std::vector<double> v(n * d);
  for (double& x : v) x = rng.normal();
  return core::Tensor::from({n, d}, v, grad);
}

std::vector<ChainTokens> four_chains(std::size_t d, core::Rng& rng, std::size_t ng = 6, std::size_t nm = 8,
                                     std::size_t nl = 16, bool grad = false) {
  return {{Modality::gene, random_tokens(ng, d, rng, grad)},
          {Modality::meth, random_tokens(nm, d, rng, grad)},
          {Modality::path_local, random_tokens(nl, d, rng, grad)},
          {Modality::path_global, random_tokens(1, d, rng, grad)}};
}

std::vector<double> row(const core::Tensor& t, std::size_t r) {
  return {t.data().begin() + static_cast<std::ptrdiff_t>(r * t.cols()),
          t.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols())};
}

void zero_all(core::ParameterStore& store) {
  for (auto& p : store.params()) std::fill(p.tensor.mutable_data().begin(), p.tensor.mutable_data().end(), 0.0);
}

void jitter(core::ParameterStore& store, core::Rng& rng, double s) {
  for (auto& p : store.params()) {
    for (double& v : p.tensor.mutable_data()) v += s * rng.normal();
  }
}

}  // namespace

TEST(Interleave, RoundRobinSkipsExhaustedChains) {
  const auto a = core::Tensor::from({2, 1}, {11, 12});
  const auto b = core::Tensor::from({3, 1}, {21, 22, 23});
  const auto start = core::Tensor::from({1, 1}, {0});
  // Given out of order on purpose: canonical order still puts gene first.
  const auto seq = interleave({{Modality::meth, b}, {Modality::gene, a}}, start);
  const std::vector<double> expected{0, 11, 21, 12, 22, 23};
  EXPECT_EQ(std::vector<double>(seq.tokens.data().begin(), seq.tokens.data().end()), expected);
  const std::vector<SlotRef> map{{Modality::gene, 0}, {Modality::meth, 0}, {Modality::gene, 1},
                                 {Modality::meth, 1}, {Modality::meth, 2}};
  EXPECT_EQ(seq.index_map, map);
  EXPECT_EQ(seq.pad_mask, std::vector<bool>(5, true));
}

TEST(Interleave, FullLayoutLength) {
  core::Rng rng(1);
  const auto seq = interleave(four_chains(4, rng), random_tokens(1, 4, rng));
  EXPECT_EQ(seq.length(), 31u);
  EXPECT_EQ(seq.tokens.rows(), 32u);
}

TEST(Interleave, DeinterleaveIsIdentity) {
  core::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto chains = four_chains(3, rng, 1 + rng.below(7), 1 + rng.below(9), 1 + rng.below(17));
    const auto seq = interleave(chains, random_tokens(1, 3, rng));
    const PerChain back = deinterleave(core::slice_rows(seq.tokens, 1, seq.length()), seq);
    for (const auto& c : chains) {
      const auto& got = back[io::index_of(c.modality)];
      ASSERT_TRUE(got.defined());
      EXPECT_EQ(got.shape(), c.tokens.shape());
      EXPECT_TRUE(std::equal(got.data().begin(), got.data().end(), c.tokens.data().begin()));
    }
  }
}

TEST(Interleave, Errors) {
  core::Rng rng(3);
  EXPECT_THROW(interleave({}, random_tokens(1, 2, rng)), ContractViolation);
  EXPECT_THROW(interleave({{Modality::gene, core::Tensor{}}}, random_tokens(1, 2, rng)), ValidationError);
  EXPECT_THROW(interleave({{Modality::gene, random_tokens(2, 3, rng)}}, random_tokens(1, 2, rng)),
               ContractViolation);
  EXPECT_THROW(interleave({{Modality::gene, random_tokens(2, 2, rng)}, {Modality::gene, random_tokens(2, 2, rng)}},
                          random_tokens(1, 2, rng)),
               ContractViolation);
}

TEST(Decoder, CausalInvarianceIsExact) {
  core::ParameterStore store;
  core::Rng rng(4);
  AmtDecoder decoder(store, {.d = 8, .heads = 4, .layers = 2, .mlp_ratio = 2, .max_length = 32}, rng);
  auto chains = four_chains(8, rng, 3, 4, 3);
  const auto base = decoder.forward(interleave(chains, decoder.start_token()));
  const std::size_t L = base.recon.rows();
  ASSERT_EQ(L, 11u);
  const auto seq = interleave(chains, decoder.start_token());
  for (std::size_t j = 0; j < L; ++j) {
    auto edited = chains;
    const SlotRef ref = seq.index_map[j];
    for (auto& c : edited) {
      if (c.modality != ref.modality) continue;
      std::vector<double> v(c.tokens.data().begin(), c.tokens.data().end());
      for (std::size_t k = 0; k < 8; ++k) v[ref.position * 8 + k] += 3.0 + static_cast<double>(k);
      c.tokens = core::Tensor::from(c.tokens.shape(), v);
    }
    const auto out = decoder.forward(interleave(edited, decoder.start_token()));
    for (std::size_t i = 0; i <= j; ++i) EXPECT_EQ(row(out.recon, i), row(base.recon, i)) << "slot " << j << " row " << i;
    if (j + 1 < L) {
      EXPECT_NE(row(out.recon, j + 1), row(base.recon, j + 1));
    }
  }
}

TEST(Decoder, SingleSlotPredictsFromStartOnly) {
  core::ParameterStore store;
  core::Rng rng(5);
  AmtDecoder decoder(store, {.d = 8, .max_length = 8}, rng);
  const auto a = decoder.forward(interleave({{Modality::gene, random_tokens(1, 8, rng)}}, decoder.start_token()));
  const auto b = decoder.forward(interleave({{Modality::gene, random_tokens(1, 8, rng)}}, decoder.start_token()));
  EXPECT_EQ(a.recon.rows(), 1u);
  EXPECT_EQ(row(a.recon, 0), row(b.recon, 0));
}

TEST(Decoder, PerChainReconMatchesSourceLengths) {
  core::ParameterStore store;
  core::Rng rng(6);
  AmtDecoder decoder(store, {.d = 8, .max_length = 40}, rng);
  const auto chains = four_chains(8, rng);
  const auto out = decoder.forward(interleave(chains, decoder.start_token()));
  for (const auto& c : chains) EXPECT_EQ(out.per_chain_recon[io::index_of(c.modality)].rows(), c.tokens.rows());
}

TEST(Decoder, RejectsOverlongSequencesAndBadHeads) {
  core::ParameterStore store;
  core::Rng rng(7);
  AmtDecoder decoder(store, {.d = 8, .max_length = 4}, rng);
  EXPECT_THROW(decoder.forward(interleave({{Modality::gene, random_tokens(5, 8, rng)}}, decoder.start_token())),
               ContractViolation);
  core::ParameterStore other;
  EXPECT_THROW(AmtDecoder(other, {.d = 6, .heads = 4}, rng), ContractViolation);
}

TEST(Decoder, GradientOfReconLossMatchesFiniteDifferences) {
  core::ParameterStore store;
  core::Rng rng(8);
  AmtDecoder decoder(store, {.d = 8, .max_length = 4}, rng);
  jitter(store, rng, 0.05);
  const std::vector<ChainTokens> chains{{Modality::gene, random_tokens(2, 8, rng, true)},
                                        {Modality::meth, random_tokens(2, 8, rng, true)}};
  auto f = [&] {
    const auto seq = interleave(chains, decoder.start_token());
    return recon_loss(decoder.forward(seq), seq);
  };
  auto tensors = store.tensors();
  for (const auto& c : chains) tensors.push_back(c.tokens);
  const auto report = core::grad_check(f, tensors, 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-3) << report.worst_tensor << "[" << report.worst_index << "]";
}

TEST(ReconLoss, ZeroAndConstantOffset) {
  const auto seq = interleave({{Modality::gene, core::Tensor::from({2, 2}, {1, 2, 3, 4})}},
                              core::Tensor::from({1, 2}, {0, 0}));
  AmtOutput out;
  out.recon = core::Tensor::from({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(recon_loss(out, seq).item(), 0.0);
  out.recon = core::Tensor::from({2, 2}, {2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(recon_loss(out, seq).item(), 1.0);
}

TEST(ReconLoss, MatchesHandSum) {
  core::Rng rng(9);
  const auto tokens = random_tokens(2, 3, rng);
  const auto seq = interleave({{Modality::meth, tokens}}, random_tokens(1, 3, rng));
  AmtOutput out;
  out.recon = random_tokens(2, 3, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double e = out.recon.data()[i] - tokens.data()[i];
    s += e * e;
  }
  EXPECT_NEAR(recon_loss(out, seq).item(), s / 6.0, 1e-14);
}

TEST(ReconLoss, IgnoresPadSlots) {
  auto seq = interleave({{Modality::gene, core::Tensor::from({2, 1}, {1, 2})}}, core::Tensor::from({1, 1}, {0}));
  seq.pad_mask[1] = false;
  AmtOutput out;
  out.recon = core::Tensor::from({2, 1}, {1, 100});
  EXPECT_EQ(recon_loss(out, seq).item(), 0.0);
}

TEST(MiLoss, ConstantCriticGivesLogTwoOverSixPairs) {
  core::ParameterStore store;
  core::Rng rng(10);
  MiEstimator critic(store, 4, rng);
  zero_all(store);
  std::vector<PerChain> batch;
  for (int s = 0; s < 3; ++s) {
    const auto seq = interleave(four_chains(4, rng, 6, 8, 5), random_tokens(1, 4, rng));
    batch.push_back(deinterleave(core::slice_rows(seq.tokens, 1, seq.length()), seq));
  }
  const MiLoss mi = mi_loss(batch, critic, 1);
  EXPECT_EQ(mi.pairs_computed, 6u);
  EXPECT_EQ(mi.pairs_skipped, 0u);
  EXPECT_NEAR(mi.loss.item(), std::log(2.0), 1e-12);
}

TEST(MiLoss, WideMarginDrivesLossToZero) {
  // Critic = -50 |x1[0] - x2[0]| via the two GELU units (x1 - x2, x2 - x1):
  // aligned identical tokens score 0, mismatched ones far below.
  core::ParameterStore store;
  core::Rng rng(11);
  const std::size_t d = 2;
  MiEstimator critic(store, d, rng);
  auto w = store.params()[0].tensor.mutable_data();  // [2d, d]
  std::fill(w.begin(), w.end(), 0.0);
  w[0 * d + 0] = 1.0;
  w[0 * d + 1] = -1.0;
  w[d * d + 0] = -1.0;
  w[d * d + 1] = 1.0;
  std::fill(store.params()[1].tensor.mutable_data().begin(), store.params()[1].tensor.mutable_data().end(), 0.0);
  std::fill(store.params()[2].tensor.mutable_data().begin(), store.params()[2].tensor.mutable_data().end(), -50.0);
  // Chains whose aligned tokens are large and mismatched ones small.
  auto chain = [](std::vector<double> v) { return core::Tensor::from({v.size() / 2, 2}, v); };
  PerChain s;
  s[0] = chain({10, 10, 0, 0});
  s[1] = chain({10, 10, 0, 0});
  const MiLoss mi = mi_loss({s}, critic, 2);
  EXPECT_EQ(mi.pairs_computed, 1u);
  EXPECT_LT(mi.loss.item(), 1e-6);
  EXPECT_GT(mi.loss.item(), 0.0);
}

TEST(MiLoss, SingleSampleBatchSkipsGlobalPairs) {
  core::ParameterStore store;
  core::Rng rng(12);
  MiEstimator critic(store, 4, rng);
  const auto seq = interleave(four_chains(4, rng, 6, 8, 5), random_tokens(1, 4, rng));
  const MiLoss mi = mi_loss({deinterleave(core::slice_rows(seq.tokens, 1, seq.length()), seq)}, critic, 3);
  EXPECT_EQ(mi.pairs_computed, 3u);
  EXPECT_EQ(mi.pairs_skipped, 3u);
  EXPECT_GT(mi.loss.item(), 0.0);
}

TEST(MiLoss, PositiveDeterministicAndSeedDependent) {
  core::ParameterStore store;
  core::Rng rng(13);
  MiEstimator critic(store, 4, rng);
  std::vector<PerChain> batch;
  for (int s = 0; s < 4; ++s) {
    const auto seq = interleave(four_chains(4, rng, 6, 8, 1 + rng.below(8)), random_tokens(1, 4, rng));
    batch.push_back(deinterleave(core::slice_rows(seq.tokens, 1, seq.length()), seq));
  }
  const double a = mi_loss(batch, critic, 5).loss.item();
  EXPECT_GT(a, 0.0);
  EXPECT_EQ(a, mi_loss(batch, critic, 5).loss.item());
  EXPECT_NE(a, mi_loss(batch, critic, 6).loss.item());
}

TEST(MiLoss, ReconPlusMiGradientMatchesFiniteDifferences) {
  core::ParameterStore store;
  core::Rng rng(14);
  AmtDecoder decoder(store, {.d = 8, .max_length = 12}, rng);
  MiEstimator critic(store, 8, rng);
  jitter(store, rng, 0.05);
  std::vector<std::vector<ChainTokens>> samples;
  for (int s = 0; s < 2; ++s) samples.push_back(four_chains(8, rng, 3, 4, 2));
  auto f = [&] {
    std::vector<PerChain> recon;
    core::Tensor rec;
    for (const auto& chains : samples) {
      const auto seq = interleave(chains, decoder.start_token());
      const auto out = decoder.forward(seq);
      const auto r = recon_loss(out, seq);
      rec = rec.defined() ? core::add(rec, r) : r;
      recon.push_back(out.per_chain_recon);
    }
    return core::add(core::scale(rec, 0.5), core::scale(mi_loss(recon, critic, 7).loss, 0.3));
  };
  auto tensors = store.tensors();
  const auto report = core::grad_check(f, tensors, 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-3) << report.worst_tensor << "[" << report.worst_index << "]";
}
