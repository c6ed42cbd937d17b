// Copyright 2026 The Tessera Authors
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

#ifndef TESSERA_IMAGE_IO_HPP_
#define TESSERA_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tessera/image.hpp"

namespace tessera {

// 8-bit conversion happens only here; everything else works in [0,1] doubles.
std::uint8_t to_byte(double v) noexcept;

// PNG or JPEG, decoded to three channels in [0,1].
ImageBuffer read_image(const std::filesystem::path& path);
void write_png(const ImageBuffer& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& image);
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

// Encode at the given JPEG quality (1..100) and decode again.
ImageBuffer jpeg_roundtrip(const ImageBuffer& image, int quality);

// Identifies the codec build used for PNG/JPEG so manifests can pin it.
std::string codec_version();

}  // namespace tessera

#endif  // TESSERA_IMAGE_IO_HPP_
