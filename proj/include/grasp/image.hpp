#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace grasp {

// Grayscale raster, values in [0, 1]. image(y, x) with y = row, x = column;
// row-major storage so .data() matches the on-disk pixel order.
template <typename Scalar>
using ImageT =
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Image = ImageT<double>;

inline int image_width(const Image& im) { return static_cast<int>(im.cols()); }
inline int image_height(const Image& im) { return static_cast<int>(im.rows()); }

// 8-bit binary portable graymap ("P5", maxval 255). Values are quantized to
// round(clamp(v, 0, 1) * 255) on write and mapped back to k/255 on read, so
// write -> read -> write reproduces identical bytes.
void write_pgm(const std::filesystem::path& path, const Image& im);
Image read_pgm(const std::filesystem::path& path);

// In-memory forms of the same codec, used by golden tests and fault injection.
std::string encode_pgm(const Image& im);
Image decode_pgm(const std::string& bytes);

}  // namespace grasp
