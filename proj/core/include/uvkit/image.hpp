#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "uvkit/atlas.hpp"
#include "uvkit/losses.hpp"

namespace uvkit {

/// 8-bit PNG; `channels` is 1 (gray) or 3 (RGB), rows top to bottom.
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               std::span<const std::uint8_t> pixels);

/// Coverage image with v pointing up.
void write_silhouette_png(const std::filesystem::path& path, const SilhouetteImage& image);

/// RGB preview, one flat colour per island on a dark background.
[[nodiscard]] std::vector<std::uint8_t> render_atlas_preview(const UvAtlas& atlas, int resolution);
void write_atlas_preview(const std::filesystem::path& path, const UvAtlas& atlas, int resolution = 512);

}  // namespace uvkit
