#pragma once

#include <filesystem>

#include "chainsurv/io/modality.hpp"

namespace chainsurv::io {

// ".f32t" feature matrix: little-endian, magic "F32T", u32 n_tokens, u32 dim,
// then n_tokens*dim float32 row-major. Values widen to double on read and
// narrow back on write, so a read/write round trip is bit-exact for data that
// originated as float32.
ModalityChain read_f32t(const std::filesystem::path& path);
void write_f32t(const std::filesystem::path& path, const ModalityChain& chain);

}  // namespace chainsurv::io
