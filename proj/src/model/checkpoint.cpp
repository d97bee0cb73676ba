// Copyright 2026 The mupt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "mupt/model/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mupt/core/error.hpp"

namespace mupt {

namespace {

constexpr char kMagic[8] = {'M', 'U', 'P', 'T', 'C', 'K', 'P', 'T'};
constexpr std::size_t kPrefix = 16;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

[[noreturn]] void corrupt(std::size_t offset, const std::string& what) {
  throw FormatError("corrupted checkpoint at byte " + std::to_string(offset) + ": " + what);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  validate_params(ckpt.params, ckpt.config);
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  ckpt.params.for_each([&](std::string_view name, const Tensor& t) {
    const std::uint64_t nbytes = t.size() * sizeof(double);
    index.push_back({{"name", std::string(name)},
                     {"group", std::string(to_string(classify_param(name)))},
                     {"shape", t.shape()},
                     {"dtype", "f64-le"},
                     {"offset", offset},
                     {"nbytes", nbytes}});
    offset += nbytes;
  });
  nlohmann::json header{{"format", "mupt-checkpoint"},
                        {"format_version", kCheckpointVersion},
                        {"config", to_json(ckpt.config)},
                        {"extra", ckpt.extra},
                        {"tensors", index}};
  const std::string hdr = header.dump();

  std::string out(kMagic, kMagic + 8);
  put_u64(out, hdr.size());
  out += hdr;
  out.reserve(out.size() + offset);
  ckpt.params.for_each([&](std::string_view, const Tensor& t) {
    for (double d : t.values()) put_f64(out, d);
  });

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open checkpoint for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < kPrefix) corrupt(bytes.size(), "file shorter than the 16-byte prefix");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) corrupt(0, "bad magic");
  const std::uint64_t hlen = get_u64(raw + 8);
  if (hlen > bytes.size() - kPrefix) corrupt(8, "header length " + std::to_string(hlen) + " exceeds file size");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kPrefix, bytes.begin() + static_cast<std::ptrdiff_t>(kPrefix + hlen));
  } catch (const nlohmann::json::parse_error& e) {
    corrupt(kPrefix + (e.byte > 0 ? e.byte - 1 : 0), std::string("header is not valid JSON: ") + e.what());
  }

  if (!header.contains("format_version") || !header["format_version"].is_number_integer()) {
    corrupt(kPrefix, "header has no format_version");
  }
  const int version = header["format_version"].get<int>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint format_version " + std::to_string(version) + " (this build reads " +
                      std::to_string(kCheckpointVersion) + ")");
  }

  Checkpoint ckpt;
  try {
    ckpt.config = pt_config_from_json(header.at("config"));
    if (header.contains("extra")) ckpt.extra = header["extra"];
  } catch (const nlohmann::json::exception& e) {
    corrupt(kPrefix, std::string("bad config: ") + e.what());
  }

  const std::size_t payload = kPrefix + hlen;
  std::uint64_t expected_offset = 0;
  const auto& index = header.at("tensors");
  if (!index.is_array() || index.size() != ModelParams::kNames.size()) corrupt(kPrefix, "tensor index incomplete");
  for (const auto& entry : index) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<Shape>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
    if (entry.at("dtype").get<std::string>() != "f64-le") corrupt(kPrefix, "tensor " + name + " has unknown dtype");
    if (parse_param_group(entry.at("group").get<std::string>()) != classify_param(name)) {
      corrupt(kPrefix, "tensor " + name + " carries the wrong group tag");
    }
    if (offset != expected_offset || nbytes != shape_size(shape) * sizeof(double)) {
      corrupt(payload + offset, "tensor " + name + " index is inconsistent");
    }
    if (payload + offset + nbytes > bytes.size()) {
      corrupt(bytes.size(), "truncated payload: tensor " + name + " needs bytes [" + std::to_string(payload + offset) +
                                ", " + std::to_string(payload + offset + nbytes) + ")");
    }
    Tensor t(shape, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = std::bit_cast<double>(get_u64(raw + payload + offset + i * sizeof(double)));
    }
    ckpt.params.get(name) = std::move(t);
    expected_offset += nbytes;
  }
  if (payload + expected_offset != bytes.size()) {
    corrupt(payload + expected_offset, "trailing bytes after the last tensor");
  }
  validate_params(ckpt.params, ckpt.config);
  return ckpt;
}

}  // namespace mupt
