#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "depthpoison/raster.hpp"

namespace depthpoison::io {

/// Depth PNG convention: 16-bit single-channel grayscale,
/// meters = stored / 256, stored 0 = invalid or removed.
inline constexpr double kDepthScale = 256.0;
inline constexpr double kMaxEncodableDepth = 65535.0 / kDepthScale;

/// Nearest representable depth under the PNG convention.
double quantize_depth(double meters);
std::uint16_t encode_depth_value(double meters);

std::vector<std::uint8_t> encode_depth_png(const DepthMap& depth);
DepthMap decode_depth_png(std::span<const std::uint8_t> bytes);
void write_depth_png(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_image_png(const RasterImage& image);
RasterImage decode_image(std::span<const std::uint8_t> bytes);
void write_image_png(const std::filesystem::path& path, const RasterImage& image);
RasterImage read_image(const std::filesystem::path& path);

/// Masks persist as 8-bit grayscale with 0 / 255.
void write_mask_png(const std::filesystem::path& path, const ObjectMask& mask);
ObjectMask read_mask_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_jpeg(const RasterImage& image, int quality);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace depthpoison::io
