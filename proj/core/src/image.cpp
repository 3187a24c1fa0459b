#include "uvkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

#include "uvkit/error.hpp"

namespace uvkit {

void write_png(const std::filesystem::path& path, int width, int height, int channels,
               std::span<const std::uint8_t> pixels) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) throw_input("png: invalid image shape");
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels) throw_input("png: pixel count mismatch");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw_input("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw_invariant("png: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw_invariant("png: cannot allocate info");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw_input("png: write failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_silhouette_png(const std::filesystem::path& path, const SilhouetteImage& image) {
  const int res = image.resolution;
  std::vector<std::uint8_t> px(static_cast<std::size_t>(res) * res);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const double c = std::clamp(image.at(x, res - 1 - y), 0.0, 1.0);
      px[static_cast<std::size_t>(y) * res + x] = static_cast<std::uint8_t>(std::lround(255.0 * c));
    }
  }
  write_png(path, res, res, 1, px);
}

std::vector<std::uint8_t> render_atlas_preview(const UvAtlas& atlas, int resolution) {
  if (resolution < 1) throw_input("preview resolution must be positive");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(resolution) * resolution * 3, 24);
  for (std::size_t k = 0; k < atlas.islands.size(); ++k) {
    // Golden-angle hue walk for distinct colours.
    const double hue = std::fmod(0.61803398875 * static_cast<double>(k), 1.0) * 6.0;
    const double f = hue - std::floor(hue);
    const int sector = static_cast<int>(hue) % 6;
    const double v = 0.9, s = 0.6;
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    const double rgb[6][3] = {{v, t, p}, {q, v, p}, {p, v, t}, {p, q, v}, {t, p, v}, {v, p, q}};
    const std::uint8_t col[3] = {static_cast<std::uint8_t>(255 * rgb[sector][0]),
                                 static_cast<std::uint8_t>(255 * rgb[sector][1]),
                                 static_cast<std::uint8_t>(255 * rgb[sector][2])};
    const auto& isl = atlas.islands[k];
    for (const Face& tri : isl.island.chart->faces) {
      const Vec2 a = isl.uv[tri[0]] * resolution;
      const Vec2 b = isl.uv[tri[1]] * resolution;
      const Vec2 c = isl.uv[tri[2]] * resolution;
      const Vec2 lo = a.cwiseMin(b).cwiseMin(c);
      const Vec2 hi = a.cwiseMax(b).cwiseMax(c);
      const int x0 = std::max(0, static_cast<int>(std::floor(lo.x())));
      const int x1 = std::min(resolution - 1, static_cast<int>(std::ceil(hi.x())));
      const int y0 = std::max(0, static_cast<int>(std::floor(lo.y())));
      const int y1 = std::min(resolution - 1, static_cast<int>(std::ceil(hi.y())));
      const double area = signed_area(a, b, c);
      if (area == 0.0) continue;
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const Vec2 pt(x + 0.5, y + 0.5);
          const double w0 = signed_area(b, c, pt) / area;
          const double w1 = signed_area(c, a, pt) / area;
          const double w2 = 1.0 - w0 - w1;
          if (w0 < 0 || w1 < 0 || w2 < 0) continue;
          const std::size_t idx = (static_cast<std::size_t>(resolution - 1 - y) * resolution + x) * 3;
          px[idx] = col[0];
          px[idx + 1] = col[1];
          px[idx + 2] = col[2];
        }
      }
    }
  }
  return px;
}

void write_atlas_preview(const std::filesystem::path& path, const UvAtlas& atlas, int resolution) {
  write_png(path, resolution, resolution, 3, render_atlas_preview(atlas, resolution));
}

}  // namespace uvkit
