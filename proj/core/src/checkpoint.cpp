// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace {

constexpr char kMagic[8] = {'D', 'G', 'C', 'K', 'P', 'T', '1', '\n'};

std::string dtype_name(torch::Dtype d) {
  switch (d) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    case torch::kInt32: return "int32";
    case torch::kUInt8: return "uint8";
    default: throw DataError("unsupported checkpoint dtype");
  }
}

torch::Dtype dtype_from_name(const std::string& s) {
  if (s == "float32") return torch::kFloat32;
  if (s == "float64") return torch::kFloat64;
  if (s == "int64") return torch::kInt64;
  if (s == "int32") return torch::kInt32;
  if (s == "uint8") return torch::kUInt8;
  throw DataError("unknown checkpoint dtype: " + s);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format"] = kCheckpointFormat;
  header["meta"] = ckpt.meta;
  auto table = nlohmann::json::array();

  uint64_t offset = 0;
  std::vector<std::pair<const torch::Tensor*, uint64_t>> blobs;
  for (const auto& [name, tensor] : ckpt.tensors) {  // std::map: sorted, stable layout
    auto contiguous = tensor.detach().contiguous();
    uint64_t bytes = static_cast<uint64_t>(contiguous.numel() * contiguous.element_size());
    nlohmann::json entry;
    entry["name"] = name;
    entry["dtype"] = dtype_name(contiguous.scalar_type());
    entry["shape"] = std::vector<int64_t>(contiguous.sizes().begin(), contiguous.sizes().end());
    entry["offset"] = offset;
    entry["bytes"] = bytes;
    table.push_back(entry);
    offset += bytes;
  }
  header["tensors"] = table;
  std::string header_str = header.dump();

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    uint64_t hlen = header_str.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
      auto contiguous = tensor.detach().contiguous();
      out.write(static_cast<const char*>(contiguous.data_ptr()),
                static_cast<std::streamsize>(contiguous.numel() * contiguous.element_size()));
    }
    if (!out) throw DataError("checkpoint write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("not a checkpoint file: " + path.string());
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string header_str(hlen, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw DataError("truncated checkpoint header: " + path.string());

  nlohmann::json header = nlohmann::json::parse(header_str);
  if (header.at("format").get<std::string>() != kCheckpointFormat)
    throw DataError("unsupported checkpoint format tag");

  Checkpoint ckpt;
  ckpt.meta = header.at("meta");
  const std::streampos data_start = in.tellg();
  for (const auto& entry : header.at("tensors")) {
    std::string name = entry.at("name").get<std::string>();
    auto shape = entry.at("shape").get<std::vector<int64_t>>();
    auto dtype = dtype_from_name(entry.at("dtype").get<std::string>());
    uint64_t offset = entry.at("offset").get<uint64_t>();
    uint64_t bytes = entry.at("bytes").get<uint64_t>();
    auto tensor = torch::empty(shape, torch::TensorOptions().dtype(dtype));
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    in.read(static_cast<char*>(tensor.data_ptr()), static_cast<std::streamsize>(bytes));
    if (!in) throw DataError("truncated checkpoint tensor: " + name);
    ckpt.tensors.emplace(std::move(name), std::move(tensor));
  }
  return ckpt;
}

}  // namespace drivegen
