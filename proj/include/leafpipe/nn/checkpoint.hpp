#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "leafpipe/nn/network.hpp"

namespace leafpipe::nn {

// Binary layout, all integers little-endian:
//   "LPNN"                          magic
//   u16 version                     kCheckpointVersion
//   u32 C, u32 H, u32 W, u32 K      input geometry and class count
//   u32 L, then L x {u8 kind, u32 out, u32 kernel, u32 stride, u32 pad}
//   u32 N, then N x {u16 len, bytes}   class names (N == K or 0)
//   per parametric layer, in order: u32 count, count x f32 weights,
//                                   u32 count, count x f32 biases
// No trailing bytes.

inline constexpr std::uint16_t kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
  Network<T> network;
  std::vector<std::string> class_names;
};

/// 64-bit networks are narrowed to f32 on save.
template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path,
                     const std::vector<std::string>& class_names = {});

/// Throws DataError: "not a checkpoint" (bad magic), "unsupported checkpoint
/// version", "truncated ..." (short read), "parameter count mismatch",
/// "trailing data", or an invalid layer table.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Network<T>& net,
                                            const std::vector<std::string>& class_names);
template <typename T>
Checkpoint<T> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace leafpipe::nn
