#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcnvs/depth_map.hpp"
#include "pcnvs/point_cloud.hpp"
#include "pcnvs/raster.hpp"

namespace pcnvs::io {

/// Reads a whole file; throws InputError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`, so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// PNG (8-bit RGB/RGBA in, 8-bit RGB out). Values map to [0, 1] by /255;
// saving rounds half up after scaling by 255 and clamps.
Image decode_png(std::string_view bytes);
std::string encode_png(const Image& image);
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);
/// 8-bit grayscale PNG, 255 where mask is set.
std::string encode_mask_png(const std::vector<std::uint8_t>& mask, int width, int height);
void save_mask(const std::vector<std::uint8_t>& mask, int width, int height,
               const std::filesystem::path& path);

// PFM depth ("Pf", single channel). Rows are stored bottom-to-top. Saving
// always writes little-endian (scale -1.0); loading honors either byte order.
DepthMap decode_pfm(std::string_view bytes);
std::string encode_pfm(const DepthMap& depth);
DepthMap load_depth(const std::filesystem::path& path);
void save_depth(const DepthMap& depth, const std::filesystem::path& path);

// PLY point clouds: float x, y, z and uchar red, green, blue.
std::string encode_ply(const PointCloud& cloud, bool binary);
PointCloud decode_ply(std::string_view bytes);
void save_ply(const PointCloud& cloud, const std::filesystem::path& path, bool binary);
PointCloud load_ply(const std::filesystem::path& path);

/// round-half-up(v * 255) clamped to [0, 255].
std::uint8_t to_byte(float v);

}  // namespace pcnvs::io
