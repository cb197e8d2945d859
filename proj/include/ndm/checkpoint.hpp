#pragma once

#include <string>

#include <json.hpp>

#include "ndm/tensor.hpp"

namespace ndm {

/// On-disk layout:
///
///   bytes 0..7    magic "NDMCKPT1"
///   bytes 8..15   manifest length M, uint64 little-endian
///   next M bytes  JSON manifest: {"meta": {...}, "params": [{"name", "shape",
///                 "offset", "count"}...], "blob_bytes": B}
///   next B bytes  parameter values, float32 little-endian, in manifest order
///
/// Offsets are byte offsets into the blob. Parameters are written in name
/// order, and the manifest is dumped with sorted keys, so load followed by
/// save reproduces the file exactly.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  ParameterStore<float> params;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ndm
