#include "chainsurv/io/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/rng.hpp"
#include "chainsurv/io/feature_file.hpp"

namespace chainsurv::io {

namespace {

constexpr const char* kManifestHeader =
    "id,cancer_type,time,censorship,gene_file,meth_file,path_local_file,path_global_file";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& text, const std::string& what, const std::string& id) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("sample '" + id + "': cannot parse " + what + " '" + text + "'");
  }
}

}  // namespace

void validate_sample(const CohortSample& s, const ChainLayout& layout, std::size_t dim) {
  auto fail = [&](const std::string& why) { throw ValidationError("sample '" + s.id + "': " + why); };
  if (s.id.empty()) throw ValidationError("sample with empty id");
  if (!(s.label.time > 0.0) || !std::isfinite(s.label.time)) fail("survival time must be positive");
  if (s.label.censorship != 0 && s.label.censorship != 1) fail("censorship must be 0 or 1");
  const std::array<std::size_t, kModalityCount> expected = {layout.n_gene, layout.n_meth, 0, 1};
  for (Modality m : kCanonicalOrder) {
    const ModalityChain& c = s.chain(m);
    const std::string name(to_string(m));
    if (c.n_tokens == 0) fail(name + " chain is empty");
    if (m != Modality::path_local && c.n_tokens != expected[index_of(m)]) {
      fail(name + " chain has " + std::to_string(c.n_tokens) + " tokens, expected " +
           std::to_string(expected[index_of(m)]));
    }
    if (c.dim != dim) fail(name + " token dim " + std::to_string(c.dim) + " != cohort dim " + std::to_string(dim));
    if (c.values.size() != c.n_tokens * c.dim) fail(name + " chain payload size mismatch");
    for (double v : c.values) {
      if (!std::isfinite(v)) fail(name + " chain contains non-finite values");
    }
  }
}

Cohort load_cohort(const std::filesystem::path& manifest_path, const ChainLayout& layout) {
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError("cannot open manifest " + manifest_path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != kManifestHeader) {
    throw ValidationError("manifest header must be: " + std::string(kManifestHeader));
  }
  const auto base = manifest_path.parent_path();
  Cohort cohort;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 8) throw ValidationError("manifest row with " + std::to_string(f.size()) + " fields: " + line);
    for (auto& x : f) x = trim(x);
    CohortSample s;
    s.id = f[0];
    s.cancer_type = f[1];
    s.label.time = parse_double(f[2], "time", s.id);
    const double c = parse_double(f[3], "censorship", s.id);
    if (c != 0.0 && c != 1.0) throw ValidationError("sample '" + s.id + "': censorship must be 0 or 1");
    s.label.censorship = static_cast<int>(c);
    for (Modality m : kCanonicalOrder) {
      const auto path = base / f[4 + index_of(m)];
      try {
        s.chain(m) = read_f32t(path);
      } catch (const ValidationError& e) {
        throw ValidationError("sample '" + s.id + "': " + e.what());
      }
    }
    if (cohort.samples.empty()) cohort.dim = s.chain(Modality::gene).dim;
    validate_sample(s, layout, cohort.dim);
    cohort.samples.push_back(std::move(s));
  }
  if (cohort.samples.empty()) throw ValidationError("empty cohort");
  return cohort;
}

std::filesystem::path save_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "features");
  const auto manifest = dir / "manifest.csv";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + manifest.string());
  out << kManifestHeader << '\n';
  for (const CohortSample& s : cohort.samples) {
    std::array<std::string, kModalityCount> rel;
    for (Modality m : kCanonicalOrder) {
      rel[index_of(m)] = "features/" + s.id + "_" + std::string(to_string(m)) + ".f32t";
      write_f32t(dir / rel[index_of(m)], s.chain(m));
    }
    // max_digits10 keeps the time bit-exact through text.
    std::ostringstream time;
    time.precision(17);
    time << s.label.time;
    out << s.id << ',' << s.cancer_type << ',' << time.str() << ',' << s.label.censorship;
    for (const auto& r : rel) out << ',' << r;
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing " + manifest.string());
  return manifest;
}

ModalityChain subsample_tokens(const ModalityChain& chain, std::size_t max_tokens, std::uint64_t seed) {
  if (max_tokens == 0) throw ContractViolation("subsample_tokens: max_tokens must be positive");
  if (chain.n_tokens <= max_tokens) return chain;
  std::vector<std::size_t> idx(chain.n_tokens);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  core::Rng rng(seed);
  core::shuffle(std::span<std::size_t>(idx), rng);
  idx.resize(max_tokens);
  std::sort(idx.begin(), idx.end());
  ModalityChain out;
  out.n_tokens = max_tokens;
  out.dim = chain.dim;
  out.values.reserve(max_tokens * chain.dim);
  for (std::size_t i : idx) {
    auto t = chain.token(i);
    out.values.insert(out.values.end(), t.begin(), t.end());
  }
  return out;
}

void cap_local_patches(Cohort& cohort, std::size_t max_tokens, std::uint64_t seed) {
  for (CohortSample& s : cohort.samples) {
    auto& local = s.chain(Modality::path_local);
    local = subsample_tokens(local, max_tokens, core::derive_seed(seed, core::stable_hash(s.id)));
  }
}

}  // namespace chainsurv::io
