#include "chainsurv/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/head/survival_head.hpp"

namespace chainsurv::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto part = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!part.empty()) out.push_back(part);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("config: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("config: '" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

void set_option(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string v = trim(raw);
  if (key == "cohort") c.cohort = v;
  else if (key == "prompts") c.prompts = v;
  else if (key == "text_embeddings") c.text_embeddings = v;
  else if (key == "d") c.d = parse_size(key, v);
  else if (key == "d_text") c.d_text = parse_size(key, v);
  else if (key == "n_gene") c.n_gene = parse_size(key, v);
  else if (key == "n_meth") c.n_meth = parse_size(key, v);
  else if (key == "k_patches") c.k_patches = parse_size(key, v);
  else if (key == "lambda") c.lambda = parse_double(key, v);
  else if (key == "lr") c.lr = parse_double(key, v);
  else if (key == "weight_decay") c.weight_decay = parse_double(key, v);
  else if (key == "epochs") c.epochs = parse_size(key, v);
  else if (key == "batch_size") c.batch_size = parse_size(key, v);
  else if (key == "folds") c.folds = parse_size(key, v);
  else if (key == "bins") c.bins = parse_size(key, v);
  else if (key == "seed") c.seed = parse_size(key, v);
  else if (key == "use_adapter") c.ablation.use_adapter = parse_bool(key, v);
  else if (key == "use_amt") c.ablation.use_amt = parse_bool(key, v);
  else if (key == "use_mi") c.ablation.use_mi = parse_bool(key, v);
  else if (key == "vanilla_prompt_only") c.ablation.vanilla_prompt_only = parse_bool(key, v);
  else if (key == "loss.eq1_literal") c.eq1_literal = parse_bool(key, v);
  else if (key == "enabled_modalities") {
    c.ablation.enabled_modalities.fill(false);
    for (const auto& name : split_list(v)) c.ablation.enabled_modalities[io::index_of(io::modality_from_string(name))] = true;
  } else if (key == "ablation") {
    for (const auto& name : split_list(v)) apply_ablation(c, name);
  } else {
    throw ValidationError("config: unknown key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_option(c, trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  for (auto* p : {&c.cohort, &c.prompts, &c.text_embeddings}) {
    if (!p->empty() && p->is_relative() && !base_dir.empty()) *p = base_dir / *p;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::vector<std::string> ablation_names() {
  return {"only_intra", "basic",   "no_adapter",    "no_mi",          "vanilla_prompt",
          "no_gene",    "no_meth", "no_path_local", "no_path_global", "eq1_literal"};
}

void apply_ablation(RunConfig& c, std::string_view name) {
  auto& a = c.ablation;
  if (name == "only_intra") a.use_amt = false;
  else if (name == "basic") {
    a.enabled_modalities = {false, false, true, true};
  } else if (name == "no_adapter") a.use_adapter = false;
  else if (name == "no_mi") a.use_mi = false;
  else if (name == "vanilla_prompt") a.vanilla_prompt_only = true;
  else if (name == "eq1_literal") c.eq1_literal = true;
  else if (name.starts_with("no_")) {
    const io::Modality m = io::modality_from_string(name.substr(3));
    a.enabled_modalities[io::index_of(m)] = false;
  } else {
    throw ValidationError("unknown ablation '" + std::string(name) + "'");
  }
}

void validate(const RunConfig& c) {
  if (c.lambda < 0.0) throw ValidationError("config: lambda must be >= 0");
  if (!(c.lr >= 0.0) || !(c.weight_decay >= 0.0)) throw ValidationError("config: lr and weight_decay must be >= 0");
  if (c.batch_size < 2) throw ValidationError("config: batch_size must be >= 2");
  if (c.folds < 2) throw ValidationError("config: folds must be >= 2");
  if (c.bins != head::kBins) throw ValidationError("config: the hazard head has exactly 4 bins");
  if (c.n_gene == 0 || c.n_meth == 0 || c.k_patches == 0) throw ValidationError("config: chain lengths must be > 0");
  if (c.d_text != 0 && c.d_text < 8) throw ValidationError("config: d_text must be >= 8");
  std::size_t enabled = 0;
  for (bool e : c.ablation.enabled_modalities) enabled += e;
  if (c.ablation.use_amt && enabled == 0) throw ValidationError("config: the inter branch needs at least one chain");
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "cohort = " << c.cohort.string() << '\n';
  if (!c.prompts.empty()) os << "prompts = " << c.prompts.string() << '\n';
  if (!c.text_embeddings.empty()) os << "text_embeddings = " << c.text_embeddings.string() << '\n';
  os << "d = " << c.d << '\n'
     << "d_text = " << c.d_text << '\n'
     << "n_gene = " << c.n_gene << '\n'
     << "n_meth = " << c.n_meth << '\n'
     << "k_patches = " << c.k_patches << '\n'
     << "lambda = " << c.lambda << '\n'
     << "lr = " << c.lr << '\n'
     << "weight_decay = " << c.weight_decay << '\n'
     << "epochs = " << c.epochs << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "folds = " << c.folds << '\n'
     << "bins = " << c.bins << '\n'
     << "seed = " << c.seed << '\n'
     << "use_adapter = " << bool_text(c.ablation.use_adapter) << '\n'
     << "use_amt = " << bool_text(c.ablation.use_amt) << '\n'
     << "use_mi = " << bool_text(c.ablation.use_mi) << '\n'
     << "vanilla_prompt_only = " << bool_text(c.ablation.vanilla_prompt_only) << '\n'
     << "enabled_modalities = ";
  bool first = true;
  for (io::Modality m : io::kCanonicalOrder) {
    if (!c.ablation.enabled_modalities[io::index_of(m)]) continue;
    os << (first ? "" : ",") << io::to_string(m);
    first = false;
  }
  os << '\n' << "loss.eq1_literal = " << bool_text(c.eq1_literal) << '\n';
  return os.str();
}

}  // namespace chainsurv::harness
