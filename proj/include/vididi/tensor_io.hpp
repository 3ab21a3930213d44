#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vididi/params.hpp"
#include "vididi/video_tensor.hpp"

namespace vididi {

/// Binary tensor container:
///   "VDDI" | version u32 | count u32 |
///   per tensor: name_len u32, name bytes, rank u32, dims u64[rank], f32[prod(dims)]
/// All integers and floats little-endian; payload row-major.
inline constexpr std::uint32_t kTensorFileVersion = 1;

struct StoredTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<float> data;

  friend bool operator==(const StoredTensor&, const StoredTensor&) = default;
};

std::vector<std::uint8_t> encode_tensors(const std::vector<StoredTensor>& tensors);
std::vector<StoredTensor> decode_tensors(const std::vector<std::uint8_t>& bytes);

void write_tensor_file(const std::filesystem::path& path, const std::vector<StoredTensor>& tensors);
std::vector<StoredTensor> read_tensor_file(const std::filesystem::path& path);

std::vector<StoredTensor> to_stored(const ParamSet& params, const std::string& prefix = "");
/// Rebuilds tensors whose names start with `prefix` (prefix stripped).
ParamSet params_from_stored(const std::vector<StoredTensor>& tensors,
                            const std::string& prefix = "");

StoredTensor video_to_stored(const VideoTensor& video, const std::string& name = "video");
VideoTensor video_from_stored(const StoredTensor& tensor);

}  // namespace vididi
