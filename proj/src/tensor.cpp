// Copyright 2026 The detcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "detcert/tensor.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace detcert {

using nlohmann::json;

Tensor::Tensor(std::array<std::size_t, 3> s, std::vector<double> d) : shape(s), data(std::move(d)) {
  if (s[0] * s[1] * s[2] != data.size() || data.empty()) {
    throw ValidationError("tensor data length does not match shape");
  }
}

Tensor Tensor::filled(std::array<std::size_t, 3> s, double value) {
  return Tensor(s, std::vector<double>(s[0] * s[1] * s[2], value));
}

std::vector<double> read_f32_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open blob " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw ParseError("blob " + path.string() + " is not a float32 array");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 3; b >= 0; --b) {
      u = (u << 8) | static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]);
    }
    out[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return out;
}

void write_f32_blob(const std::filesystem::path& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write blob " + path.string());
  for (double v : values) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    const char bytes[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                           static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
    out.write(bytes, 4);
  }
}

namespace {

std::array<std::size_t, 3> parse_shape(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + ": shape must be [C,H,W]");
  std::array<std::size_t, 3> s{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() <= 0) {
      throw ParseError(where + ": shape entries must be positive integers");
    }
    s[i] = j[i].get<std::size_t>();
  }
  return s;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

Tensor load_image(const std::filesystem::path& path) {
  if (path.extension() == ".f32") {
    auto sidecar = path;
    sidecar.replace_extension(".shape.json");
    const auto shape = parse_shape(read_json(sidecar).value("shape", json()), sidecar.string());
    auto data = read_f32_blob(path);
    if (data.size() != shape[0] * shape[1] * shape[2]) {
      throw ValidationError(path.string() + ": blob length does not match sidecar shape");
    }
    return Tensor(shape, std::move(data));
  }
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw ParseError(path.string() + ": image JSON needs 'shape' and 'data'");
  }
  const auto shape = parse_shape(j["shape"], path.string());
  std::vector<double> data;
  try {
    data = j["data"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (data.size() != shape[0] * shape[1] * shape[2]) {
    throw ValidationError(path.string() + ": data length does not match shape");
  }
  return Tensor(shape, std::move(data));
}

void save_image_json(const Tensor& image, const std::filesystem::path& path) {
  json j;
  j["shape"] = image.shape;
  j["data"] = image.data;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump() << '\n';
}

}  // namespace detcert
