#include "ndm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ndm {
namespace {

constexpr char kMagic[8] = {'N', 'D', 'M', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json manifest;
  manifest["meta"] = ckpt.meta;
  nlohmann::json plist = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, p] : ckpt.params.entries()) {
    plist.push_back({{"name", name}, {"shape", p.value.shape}, {"offset", offset}, {"count", p.size()}});
    offset += p.size() * sizeof(float);
  }
  manifest["params"] = plist;
  manifest["blob_bytes"] = offset;
  const std::string text = manifest.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& [name, p] : ckpt.params.entries()) {
    const auto* bytes = reinterpret_cast<const char*>(p.value.data.data());
    out.append(bytes, p.size() * sizeof(float));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  const std::uint64_t mlen = get_u64(bytes, 8);
  if (16 + mlen > bytes.size()) throw std::runtime_error("truncated checkpoint manifest");
  const auto manifest = nlohmann::json::parse(bytes.substr(16, mlen));
  const std::size_t blob = 16 + mlen;
  const std::uint64_t blob_bytes = manifest.at("blob_bytes").get<std::uint64_t>();
  if (blob + blob_bytes != bytes.size()) throw std::runtime_error("checkpoint blob size mismatch");

  Checkpoint ckpt;
  ckpt.meta = manifest.at("meta");
  for (const auto& entry : manifest.at("params")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto off = entry.at("offset").get<std::uint64_t>();
    const auto count = entry.at("count").get<std::uint64_t>();
    auto& p = ckpt.params.add_zero(name, shape);
    if (p.size() != count) throw std::runtime_error("shape/count mismatch for " + name);
    if (off + count * sizeof(float) > blob_bytes) throw std::runtime_error("parameter outside blob: " + name);
    std::memcpy(p.value.data.data(), bytes.data() + blob + off, count * sizeof(float));
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path);
  const std::string bytes = serialize_checkpoint(ckpt);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace ndm
