#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chainsurv/io/modality.hpp"

namespace chainsurv::io {

// censorship == 1 means censored: no event observed, `time` is a lower bound.
struct SurvivalLabel {
  double time = 0.0;
  int censorship = 0;
  int time_bin = -1;  // assigned by assign_time_bins
};

struct CohortSample {
  std::string id;
  std::string cancer_type;
  std::array<ModalityChain, kModalityCount> chains;
  SurvivalLabel label;

  const ModalityChain& chain(Modality m) const { return chains[index_of(m)]; }
  ModalityChain& chain(Modality m) { return chains[index_of(m)]; }
};

// Expected chain lengths; path_local is variable (>= 1) and path_global is 1.
struct ChainLayout {
  std::size_t n_gene = 6;
  std::size_t n_meth = 8;
};

struct Cohort {
  std::vector<CohortSample> samples;
  std::size_t dim = 0;
  std::vector<double> bin_edges;  // empty until assign_time_bins

  std::size_t size() const { return samples.size(); }
};

// Throws ValidationError naming the sample id on any invariant violation.
void validate_sample(const CohortSample& sample, const ChainLayout& layout, std::size_t dim);

// Manifest CSV header:
//   id,cancer_type,time,censorship,gene_file,meth_file,path_local_file,path_global_file
// Feature paths are resolved relative to the manifest's directory.
Cohort load_cohort(const std::filesystem::path& manifest_path, const ChainLayout& layout = {});

// Writes <dir>/manifest.csv and <dir>/features/<id>_<modality>.f32t.
// Returns the manifest path.
std::filesystem::path save_cohort(const Cohort& cohort, const std::filesystem::path& dir);

// Keeps at most `max_tokens` rows, chosen uniformly without replacement and
// kept in their original order. Deterministic in `seed`.
ModalityChain subsample_tokens(const ModalityChain& chain, std::size_t max_tokens, std::uint64_t seed);

// Applies subsample_tokens to every path_local chain, seeding per sample id.
void cap_local_patches(Cohort& cohort, std::size_t max_tokens, std::uint64_t seed);

}  // namespace chainsurv::io
