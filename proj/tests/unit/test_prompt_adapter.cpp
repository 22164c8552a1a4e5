#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/gradcheck.hpp"
#include "chainsurv/core/ops.hpp"
#include "chainsurv/io/feature_file.hpp"
#include "chainsurv/prompt/adapter.hpp"
#include "chainsurv/prompt/prompt.hpp"
#include "test_support.hpp"

using namespace chainsurv;
using namespace chainsurv::prompt;
using chainsurv::io::Modality;

namespace {

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST(BuildPrompt, GeneHasVanillaPrefixAndGenomicsSuffix) {
  const PromptSpec p = build_prompt(Modality::gene, "BRCA");
  EXPECT_TRUE(p.text.starts_with("An H&E stained image of BRCA")) << p.text;
  EXPECT_NE(p.text.find("genomics"), std::string::npos) << p.text;
  EXPECT_EQ(p.cancer_type, "BRCA");
}

TEST(BuildPrompt, PathGlobalCarriesTumorBoundaries) {
  const PromptSpec p = build_prompt(Modality::path_global, "KIRC");
  EXPECT_TRUE(contains(p.detail_terms, "Tumor Boundaries"));
  EXPECT_NE(p.text.find("Tumor Boundaries"), std::string::npos);
}

TEST(BuildPrompt, PathLocalCarriesIntercellularBridges) {
  const PromptSpec p = build_prompt(Modality::path_local, "KIRC");
  EXPECT_TRUE(contains(p.detail_terms, "Intercellular Bridges"));
}

TEST(BuildPrompt, MethHasMethylationSuffix) {
  const PromptSpec p = build_prompt(Modality::meth, "COAD");
  EXPECT_NE(p.text.find("methylation"), std::string::npos);
}

TEST(BuildPrompt, EveryModalityStartsWithVanillaTemplate) {
  for (Modality m : io::kCanonicalOrder) {
    const PromptSpec p = build_prompt(m, "LUAD");
    EXPECT_TRUE(p.text.starts_with("An H&E stained image of LUAD.")) << p.text;
    EXPECT_EQ(p.text.find('{'), std::string::npos) << "unexpanded placeholder in " << p.text;
  }
}

TEST(BuildPrompt, VanillaOnlyDropsDetail) {
  const PromptSpec p = PromptLibrary::defaults().build(Modality::path_global, "BRCA", true);
  EXPECT_EQ(p.text, "An H&E stained image of BRCA.");
}

TEST(BuildPrompt, EmptyCancerTypeRejected) {
  EXPECT_THROW(build_prompt(Modality::gene, ""), ContractViolation);
}

TEST(PromptLibraryTest, ShippedTemplateFileMatchesBuiltIns) {
  const PromptLibrary file = PromptLibrary::load(std::string(CHAINSURV_DATA_DIR) + "/prompts.txt");
  const PromptLibrary builtin = PromptLibrary::defaults();
  for (Modality m : io::kCanonicalOrder) {
    EXPECT_EQ(file.build(m, "BRCA").text, builtin.build(m, "BRCA").text);
    EXPECT_EQ(file.at(m).detail_terms, builtin.at(m).detail_terms);
  }
}

TEST(PromptLibraryTest, UserTemplatesAreValidated) {
  const std::string ok =
      "gene | genomics | An H&E stained image of {cancer}. custom {terms}\n"
      "meth | methylation | An H&E stained image of {cancer}.\n"
      "path_local | a; b | An H&E stained image of {cancer}. {terms}\n"
      "path_global | c | An H&E stained image of {cancer}. {terms}\n";
  const PromptLibrary lib = PromptLibrary::parse(ok);
  EXPECT_EQ(lib.build(Modality::path_local, "X").text, "An H&E stained image of X. a, b");

  std::string bad_prefix = ok;
  bad_prefix.replace(bad_prefix.find("An H&E"), 6, "A");
  EXPECT_THROW(PromptLibrary::parse(bad_prefix), ValidationError);

  EXPECT_THROW(PromptLibrary::parse("gene | g | An H&E stained image of {cancer}.\n"), ValidationError);
  EXPECT_THROW(PromptLibrary::parse("path_local | | An H&E stained image of {cancer}.\n"), ValidationError);
  EXPECT_THROW(PromptLibrary::parse("scalp | x | An H&E stained image of {cancer}.\n"), ValidationError);
}

TEST(TextEmbedStub, DeterministicAndUnitNorm) {
  const auto a = text_embed_stub("An H&E stained image of BRCA.", 32, 7);
  const auto b = text_embed_stub("An H&E stained image of BRCA.", 32, 7);
  EXPECT_EQ(a.vector, b.vector);
  EXPECT_EQ(a.source, EmbeddingSource::stub);
  EXPECT_NEAR(l2(a.vector), 1.0, 1e-9);
}

TEST(TextEmbedStub, CaseAndPunctuationInsensitive) {
  EXPECT_EQ(text_embed_stub("Tumor, Boundaries!", 16, 1).vector, text_embed_stub("tumor boundaries", 16, 1).vector);
}

TEST(TextEmbedStub, SeedChangesVector) {
  EXPECT_NE(text_embed_stub("genomics", 16, 1).vector, text_embed_stub("genomics", 16, 2).vector);
}

TEST(TextEmbedStub, OneWordDifferencesGiveDistinctVectors) {
  std::set<std::vector<double>> seen;
  for (int i = 0; i < 100; ++i) {
    const std::string text = "An H&E stained image of BRCA with marker" + std::to_string(i);
    const auto e = text_embed_stub(text, 16, 3);
    EXPECT_NEAR(l2(e.vector), 1.0, 1e-9);
    seen.insert(e.vector);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(TextEmbedStub, Errors) {
  EXPECT_THROW(text_embed_stub("", 16, 0), ValidationError);
  EXPECT_THROW(text_embed_stub(" ,;! ", 16, 0), ValidationError);
  EXPECT_THROW(text_embed_stub("genomics", 7, 0), ContractViolation);
}

TEST(TextEmbedFile, LoadsAndNormalizes) {
  chainsurv::testing::TempDir dir("textemb");
  io::ModalityChain row{1, 8, {3, 0, 0, 4, 0, 0, 0, 0}};
  io::write_f32t(dir.path() / "e.f32t", row);
  const auto e = load_text_embedding(dir.path() / "e.f32t");
  EXPECT_EQ(e.source, EmbeddingSource::file);
  EXPECT_NEAR(e.vector[0], 0.6, 1e-12);
  EXPECT_NEAR(e.vector[3], 0.8, 1e-12);
}

TEST(Adapter, PreservesTokenCountAndDim) {
  core::ParameterStore store;
  core::Rng rng(1);
  const std::size_t d = 8;
  const auto guidance = text_embed_stub(build_prompt(Modality::gene, "BRCA").text, d, 0);
  for (Modality m : io::kCanonicalOrder) {
    ModalityAdapter adapter(store, m, d, d, rng);
    for (std::size_t n : {1u, 6u, 16u}) {
      const auto raw = io::as_tensor(chainsurv::testing::random_chain(n, d, rng));
      const core::Tensor out = adapter.forward(raw, guidance);
      EXPECT_EQ(out.rows(), n);
      EXPECT_EQ(out.cols(), d);
    }
  }
}

TEST(Adapter, ModalitiesNeverShareParameters) {
  core::ParameterStore store;
  core::Rng rng(2);
  for (Modality m : io::kCanonicalOrder) ModalityAdapter(store, m, 8, 8, rng);
  std::set<std::string> prefixes;
  for (const auto& name : store.names()) {
    const auto first = name.find('.');
    const auto second = name.find('.', first + 1);
    prefixes.insert(name.substr(0, second));
  }
  EXPECT_EQ(prefixes.size(), 4u);
  EXPECT_EQ(store.names().size(), 16u);
  // Constructing an adapter for a modality twice collides on names.
  EXPECT_THROW(ModalityAdapter(store, Modality::gene, 8, 8, rng), ContractViolation);
}

TEST(Adapter, ZeroWeightsGiveZeroOutput) {
  core::ParameterStore store;
  core::Rng rng(3);
  ModalityAdapter adapter(store, Modality::meth, 8, 8, rng);
  for (auto& p : store.params()) std::fill(p.tensor.mutable_data().begin(), p.tensor.mutable_data().end(), 0.0);
  const auto raw = io::as_tensor(chainsurv::testing::random_chain(8, 8, rng));
  const core::Tensor out = adapter.forward(raw, text_embed_stub("methylation", 8, 0));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Adapter, PromptTextChangesOutput) {
  core::ParameterStore store;
  core::Rng rng(4);
  ModalityAdapter adapter(store, Modality::path_local, 8, 8, rng);
  const auto raw = io::as_tensor(chainsurv::testing::random_chain(5, 8, rng));
  const auto lib = PromptLibrary::defaults();
  const auto full = adapter.forward(raw, text_embed_stub(lib.build(Modality::path_local, "BRCA").text, 8, 0));
  const auto vanilla =
      adapter.forward(raw, text_embed_stub(lib.build(Modality::path_local, "BRCA", true).text, 8, 0));
  double diff = 0.0;
  for (std::size_t i = 0; i < full.numel(); ++i) diff += std::abs(full.data()[i] - vanilla.data()[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(Adapter, DimMismatchIsContractViolation) {
  core::ParameterStore store;
  core::Rng rng(5);
  ModalityAdapter adapter(store, Modality::gene, 8, 8, rng);
  const auto wrong = io::as_tensor(chainsurv::testing::random_chain(3, 6, rng));
  EXPECT_THROW(adapter.forward(wrong, text_embed_stub("genomics", 8, 0)), ContractViolation);
  const auto raw = io::as_tensor(chainsurv::testing::random_chain(3, 8, rng));
  EXPECT_THROW(adapter.forward(raw, text_embed_stub("genomics", 16, 0)), ContractViolation);
}

TEST(Adapter, GradientMatchesFiniteDifferences) {
  core::ParameterStore store;
  core::Rng rng(6);
  ModalityAdapter adapter(store, Modality::gene, 8, 8, rng);
  for (auto& p : store.params()) {
    for (double& v : p.tensor.mutable_data()) v += 0.05 * rng.normal();
  }
  const auto raw = io::as_tensor(chainsurv::testing::random_chain(6, 8, rng));
  const auto guidance = text_embed_stub(build_prompt(Modality::gene, "BRCA").text, 8, 0);
  auto f = [&] { return core::mean(core::sigmoid(adapter.forward(raw, guidance))); };
  auto tensors = store.tensors();
  const auto report = core::grad_check(f, tensors, 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-3) << report.worst_tensor << "[" << report.worst_index << "]";
}

TEST(ChainProjectionTest, MapsToSameShape) {
  core::ParameterStore store;
  core::Rng rng(7);
  ChainProjection proj(store, Modality::gene, 8, rng);
  const auto raw = io::as_tensor(chainsurv::testing::random_chain(6, 8, rng));
  const auto out = proj.forward(raw);
  EXPECT_EQ(out.rows(), 6u);
  EXPECT_EQ(out.cols(), 8u);
  EXPECT_EQ(store.names().front(), "projection.gene.w");
}
