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

#include "parkit/image_io.hpp"

#include <array>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "parkit/error.hpp"

namespace parkit {
namespace {

cv::Mat to_bgr_mat(const Image& image) {
  cv::Mat mat(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb p = image.pixel(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  return mat;
}

Image from_bgr_mat(const cv::Mat& mat) {
  Image image(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) image.set_pixel(x, y, {row[x][2], row[x][1], row[x][0]});
  }
  return image;
}

Bytes encode(const cv::Mat& mat, const std::string& ext, const std::vector<int>& params) {
  std::vector<uchar> buf;
  require(cv::imencode(ext, mat, buf, params), ErrorCode::kIo, "failed to encode " + ext);
  return Bytes(buf.begin(), buf.end());
}

cv::Mat decode_raw(std::span<const std::uint8_t> bytes) {
  require(!bytes.empty(), ErrorCode::kValidation, "empty image buffer");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  require(!mat.empty(), ErrorCode::kValidation, "image buffer could not be decoded");
  require(mat.depth() == CV_8U, ErrorCode::kValidation, "only 8-bit images are supported");
  return mat;
}

}  // namespace

Bytes encode_png(const Image& image) {
  return encode(to_bgr_mat(image), ".png", {cv::IMWRITE_PNG_COMPRESSION, 6});
}

Bytes encode_mask_png(const Mask& mask) {
  cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = mat.ptr<uchar>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask(x, y) ? 255 : 0;
  }
  return encode(mat, ".png", {cv::IMWRITE_PNG_COMPRESSION, 6});
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  cv::Mat mat = decode_raw(bytes);
  switch (mat.channels()) {
    case 3:
      return from_bgr_mat(mat);
    case 4: {
      cv::Mat bgr;
      cv::cvtColor(mat, bgr, cv::COLOR_BGRA2BGR);
      return from_bgr_mat(bgr);
    }
    case 1: {
      cv::Mat bgr;
      cv::cvtColor(mat, bgr, cv::COLOR_GRAY2BGR);
      return from_bgr_mat(bgr);
    }
    default:
      fail(ErrorCode::kValidation, "unsupported channel count");
  }
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  cv::Mat mat = decode_raw(bytes);
  require(mat.channels() == 1, ErrorCode::kValidation,
          "mask must be single-channel, got " + std::to_string(mat.channels()) + " channels");
  Mask mask(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<uchar>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (row[x] >= 128) mask.set(x, y);
    }
  }
  return mask;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kNotFound, "file not found: " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "short write to " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_image(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_png(image));
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  write_file(path, encode_mask_png(mask));
}

Image read_image(const std::filesystem::path& path) {
  Bytes b = read_file(path);
  try {
    return decode_image(b);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

Mask read_mask(const std::filesystem::path& path) {
  Bytes b = read_file(path);
  try {
    return decode_mask(b);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

Image jpeg_roundtrip(const Image& image, int quality) {
  require(quality >= 1 && quality <= 100, ErrorCode::kInvalidArgument,
          "jpeg quality must be in [1,100]");
  Bytes jpg = encode(to_bgr_mat(image), ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
  return decode_image(jpg);
}

namespace {
constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
  Bytes out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=' ) break;
    if (ch == '\n' || ch == '\r' || ch == ' ') continue;
    const int v = lookup[static_cast<unsigned char>(ch)];
    require(v >= 0, ErrorCode::kValidation, "invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace parkit
