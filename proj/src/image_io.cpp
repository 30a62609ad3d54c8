#include "pvqa/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <string>

#include <png.h>

#include "pvqa/error.hpp"

namespace pvqa {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

Frame read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(Errc::io_failure, "cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  const int height = static_cast<int>(image.height);
  const int width = static_cast<int>(image.width);
  std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, samples.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(Errc::io_failure, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  return Frame(height, width, std::move(samples));
}

void write_png(const Frame& frame, const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, frame.samples().data(), 0, nullptr))
    fail(Errc::io_failure, "cannot write PNG " + path.string() + ": " + image.message);
}

// Skips whitespace and '#' comments between PPM header tokens.
int read_ppm_int(std::istream& in) {
  int c;
  while ((c = in.peek()) != EOF) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  return value;
}

Frame read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io_failure, "cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  require(in && magic[0] == 'P' && magic[1] == '6', Errc::parse_error,
          path.string() + " is not a binary PPM (P6)");
  const int width = read_ppm_int(in);
  const int height = read_ppm_int(in);
  const int maxval = read_ppm_int(in);
  require(width >= 1 && height >= 1 && maxval == 255, Errc::parse_error,
          path.string() + ": unsupported PPM header (8-bit RGB required)");
  in.get();
  std::vector<std::uint8_t> samples(static_cast<std::size_t>(width) * height * 3);
  in.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
  require(static_cast<std::size_t>(in.gcount()) == samples.size(), Errc::truncated,
          path.string() + ": truncated PPM payload");
  return Frame(height, width, std::move(samples));
}

void write_ppm(const Frame& frame, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::io_failure, "cannot write " + path.string());
  out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.samples().data()),
            static_cast<std::streamsize>(frame.samples().size()));
  require(static_cast<bool>(out), Errc::io_failure, "failed writing " + path.string());
}

}  // namespace

Frame read_image(const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm") return read_ppm(path);
  fail(Errc::invalid_argument, "unsupported image format: " + path.string());
}

void write_image(const Frame& frame, const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".png") return write_png(frame, path);
  if (ext == ".ppm") return write_ppm(frame, path);
  fail(Errc::invalid_argument, "unsupported image format: " + path.string());
}

}  // namespace pvqa
