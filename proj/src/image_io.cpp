#include "dgsim/image_io.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "dgsim/errors.hpp"
#include "dgsim/io.hpp"

namespace dgsim::pixel {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

Index parse_count(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw IoError(path.string() + ": bad size field '" + s + "'");
  }
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

void write_image_csv(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << image.height << ',' << image.width << ',' << image.channels() << '\n';
  for (Index p = 0; p < image.data.rows(); ++p) {
    for (Index c = 0; c < image.channels(); ++c) {
      if (c > 0) out << ',';
      out << format_double(image.data(p, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_image_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IoError(path.string() + ": empty file");
  const auto head = split_csv_line(lines.front());
  if (head.size() != 3) throw IoError(path.string() + ": header must be height,width,channels");
  Image img(parse_count(head[0], path), parse_count(head[1], path), parse_count(head[2], path));
  if (static_cast<Index>(lines.size()) - 1 != img.num_pixels()) {
    throw IoError(path.string() + ": expected " + std::to_string(img.num_pixels()) + " pixel rows");
  }
  for (Index p = 0; p < img.num_pixels(); ++p) {
    const auto f = split_csv_line(lines[static_cast<std::size_t>(p + 1)]);
    if (static_cast<Index>(f.size()) != img.channels()) {
      throw IoError(path.string() + ": pixel row " + std::to_string(p) + " has wrong width");
    }
    for (Index c = 0; c < img.channels(); ++c) {
      try {
        img.data(p, c) = parse_double(f[static_cast<std::size_t>(c)]);
      } catch (const std::exception& e) {
        throw IoError(path.string() + ": " + e.what());
      }
    }
  }
  return img;
}

void write_mask_csv(const Mask& mask, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << mask.rows() << ',' << mask.cols() << '\n';
  for (Index r = 0; r < mask.rows(); ++r) {
    for (Index c = 0; c < mask.cols(); ++c) {
      if (c > 0) out << ',';
      out << (mask(r, c) ? 1 : 0);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Mask read_mask_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IoError(path.string() + ": empty file");
  const auto head = split_csv_line(lines.front());
  if (head.size() != 2) throw IoError(path.string() + ": header must be height,width");
  Mask m(parse_count(head[0], path), parse_count(head[1], path));
  if (static_cast<Index>(lines.size()) - 1 != m.rows()) {
    throw IoError(path.string() + ": expected " + std::to_string(m.rows()) + " mask rows");
  }
  for (Index r = 0; r < m.rows(); ++r) {
    const auto f = split_csv_line(lines[static_cast<std::size_t>(r + 1)]);
    if (static_cast<Index>(f.size()) != m.cols()) {
      throw IoError(path.string() + ": mask row " + std::to_string(r) + " has wrong width");
    }
    for (Index c = 0; c < m.cols(); ++c) {
      const auto& v = f[static_cast<std::size_t>(c)];
      if (v != "0" && v != "1") throw IoError(path.string() + ": mask values must be 0 or 1");
      m(r, c) = v == "1" ? 1 : 0;
    }
  }
  return m;
}

namespace {

png_uint_32 format_for(Index channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 2: return PNG_FORMAT_GA;
    case 3: return PNG_FORMAT_RGB;
    case 4: return PNG_FORMAT_RGBA;
    default: throw ArgumentError("PNG supports 1 to 4 channels");
  }
}

struct PngImage {
  png_image img{};
  PngImage() {
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> read_png_bytes(const std::filesystem::path& path, bool gray,
                                         Index& height, Index& width, Index& channels) {
  PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.c_str())) {
    throw IoError(path.string() + ": " + p.img.message);
  }
  if (gray) {
    p.img.format = PNG_FORMAT_GRAY;
  } else {
    const bool color = (p.img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (p.img.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    p.img.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                         : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(p.img));
  if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + p.img.message);
  }
  height = p.img.height;
  width = p.img.width;
  channels = PNG_IMAGE_PIXEL_CHANNELS(p.img.format);
  return buf;
}

void write_png_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& buf,
                     Index height, Index width, Index channels) {
  PngImage p;
  p.img.width = static_cast<png_uint_32>(width);
  p.img.height = static_cast<png_uint_32>(height);
  p.img.format = format_for(channels);
  if (!png_image_write_to_file(&p.img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + p.img.message);
  }
}

}  // namespace

void write_png(const Image& image, const std::filesystem::path& path) {
  format_for(image.channels());
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(image.data.size()));
  std::size_t k = 0;
  for (Index p = 0; p < image.data.rows(); ++p) {
    for (Index c = 0; c < image.channels(); ++c) buf[k++] = to_byte(image.data(p, c));
  }
  write_png_bytes(path, buf, image.height, image.width, image.channels());
}

Image read_png(const std::filesystem::path& path) {
  Index h = 0, w = 0, ch = 0;
  const auto buf = read_png_bytes(path, false, h, w, ch);
  Image img(h, w, ch);
  std::size_t k = 0;
  for (Index p = 0; p < img.num_pixels(); ++p) {
    for (Index c = 0; c < ch; ++c) img.data(p, c) = buf[k++];
  }
  return img;
}

Mask read_mask_png(const std::filesystem::path& path) {
  Index h = 0, w = 0, ch = 0;
  const auto buf = read_png_bytes(path, true, h, w, ch);
  Mask m(h, w);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = buf[static_cast<std::size_t>(i)] != 0;
  return m;
}

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(mask.size()));
  for (Index i = 0; i < mask.size(); ++i) buf[static_cast<std::size_t>(i)] = mask.data()[i] ? 255 : 0;
  write_png_bytes(path, buf, mask.rows(), mask.cols(), 1);
}

namespace {

bool is_png(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return true;
  if (ext == ".csv") return false;
  throw ArgumentError(path.string() + ": expected a .png or .csv file");
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  return is_png(path) ? read_png(path) : read_image_csv(path);
}

void write_image(const Image& image, const std::filesystem::path& path) {
  if (is_png(path)) {
    write_png(image, path);
  } else {
    write_image_csv(image, path);
  }
}

Mask read_mask(const std::filesystem::path& path) {
  return is_png(path) ? read_mask_png(path) : read_mask_csv(path);
}

}  // namespace dgsim::pixel
