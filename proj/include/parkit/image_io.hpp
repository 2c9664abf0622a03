/* Copyright 2026 The parkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parkit/image.hpp"
#include "parkit/mask.hpp"

namespace parkit {

using Bytes = std::vector<std::uint8_t>;

// Masks are stored as 8-bit single-channel PNGs, 0 = outside, 255 = inside.
// Loading thresholds at >= 128.
Bytes encode_png(const Image& image);
Bytes encode_mask_png(const Mask& mask);
Image decode_image(std::span<const std::uint8_t> bytes);
Mask decode_mask(std::span<const std::uint8_t> bytes);

void write_image(const std::filesystem::path& path, const Image& image);
void write_mask(const std::filesystem::path& path, const Mask& mask);
Image read_image(const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);

// Lossy JPEG encode/decode cycle at the given quality (1..100).
Image jpeg_roundtrip(const Image& image, int quality);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

}  // namespace parkit
