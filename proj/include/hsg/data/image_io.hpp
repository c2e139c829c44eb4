#pragma once

#include <string>
#include <vector>

#include "hsg/core/types.hpp"

namespace hsg {

// Lossless 8-bit raster formats: binary PPM (P6) for images, PGM (P5) with
// values {0,255} for masks. The [-1,1] <-> 8-bit conversion round-trips
// byte-exactly.

void write_ppm(const std::string& path, const ImagePatch& img);
ImagePatch read_ppm(const std::string& path);

void write_pgm(const std::string& path, const SegMask& mask);
SegMask read_pgm(const std::string& path);

/// Reads any supported raster (by magic number). Errors name the path.
ImagePatch read_image(const std::string& path);

ImagePatch resize(const ImagePatch& img, std::int64_t h, std::int64_t w);
SegMask resize_mask(const SegMask& mask, std::int64_t h, std::int64_t w);

/// Tiles patches (all same size) into a rows x cols grid with a separator.
ImagePatch montage(const std::vector<ImagePatch>& tiles, int rows, int cols, int sep = 2);

}  // namespace hsg
