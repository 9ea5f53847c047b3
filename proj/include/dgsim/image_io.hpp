#ifndef DGSIM_IMAGE_IO_HPP
#define DGSIM_IMAGE_IO_HPP

#include <filesystem>

#include "dgsim/pixel_aug.hpp"

namespace dgsim::pixel {

/// Header "height,width,channels", then one line per pixel in row-major order.
void write_image_csv(const Image& image, const std::filesystem::path& path);
Image read_image_csv(const std::filesystem::path& path);

/// Header "height,width", then one line of 0/1 values per image row.
void write_mask_csv(const Mask& mask, const std::filesystem::path& path);
Mask read_mask_csv(const std::filesystem::path& path);

/// 8-bit gray, gray+alpha, RGB or RGBA. Values are rounded and clamped to
/// [0, 255] on write.
void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

/// Any nonzero gray value is foreground.
Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const Mask& mask, const std::filesystem::path& path);

/// Dispatches on the extension: .png or .csv.
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);

}  // namespace dgsim::pixel

#endif  // DGSIM_IMAGE_IO_HPP
