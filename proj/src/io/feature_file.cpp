#include "chainsurv/io/feature_file.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::io {

namespace {

constexpr std::array<char, 4> kMagic = {'F', '3', '2', 'T'};

std::uint32_t decode_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void encode_u32(std::uint32_t v, unsigned char* b) {
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

}  // namespace

ModalityChain read_f32t(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("missing feature file " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw ValidationError("bad magic bytes in " + path.string());
  unsigned char header[8];
  in.read(reinterpret_cast<char*>(header), 8);
  if (!in) throw ValidationError("truncated header in " + path.string());
  ModalityChain chain;
  chain.n_tokens = decode_u32(header);
  chain.dim = decode_u32(header + 4);
  if (chain.n_tokens == 0 || chain.dim == 0) throw ValidationError("empty feature matrix in " + path.string());
  const std::size_t count = chain.n_tokens * chain.dim;
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw ValidationError("truncated payload in " + path.string());
  chain.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    chain.values[i] = static_cast<double>(std::bit_cast<float>(decode_u32(raw.data() + 4 * i)));
  }
  return chain;
}

void write_f32t(const std::filesystem::path& path, const ModalityChain& chain) {
  if (chain.values.size() != chain.n_tokens * chain.dim) {
    throw ContractViolation("write_f32t: values do not match n_tokens x dim");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(kMagic.data(), 4);
  unsigned char header[8];
  encode_u32(static_cast<std::uint32_t>(chain.n_tokens), header);
  encode_u32(static_cast<std::uint32_t>(chain.dim), header + 4);
  out.write(reinterpret_cast<const char*>(header), 8);
  std::vector<unsigned char> raw(chain.values.size() * 4);
  for (std::size_t i = 0; i < chain.values.size(); ++i) {
    encode_u32(std::bit_cast<std::uint32_t>(static_cast<float>(chain.values[i])), raw.data() + 4 * i);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace chainsurv::io
