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

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace detcert {

/// Dense C x H x W image, row-major.
struct Tensor {
  std::array<std::size_t, 3> shape{0, 0, 0};
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::array<std::size_t, 3> s, std::vector<double> d);
  static Tensor filled(std::array<std::size_t, 3> s, double value);

  std::size_t size() const { return data.size(); }
  std::size_t channels() const { return shape[0]; }
  std::size_t height() const { return shape[1]; }
  std::size_t width() const { return shape[2]; }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * shape[1] + y) * shape[2] + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * shape[1] + y) * shape[2] + x];
  }
};

class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads an image either as JSON `{"shape":[C,H,W],"data":[...]}` or as a raw
/// little-endian float32 `.f32` blob with a sidecar `<stem>.shape.json`
/// holding `{"shape":[C,H,W]}`.
Tensor load_image(const std::filesystem::path& path);
void save_image_json(const Tensor& image, const std::filesystem::path& path);

/// Little-endian float32 blob helpers shared by the model and image loaders.
std::vector<double> read_f32_blob(const std::filesystem::path& path);
void write_f32_blob(const std::filesystem::path& path, const std::vector<double>& values);

}  // namespace detcert
