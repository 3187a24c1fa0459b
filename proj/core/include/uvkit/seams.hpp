#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uvkit/mesh.hpp"

namespace uvkit {

/// Set of mesh edges along which the surface is cut. Segments are kept
/// sorted and unique so two sets compare equal iff they hold the same edges.
class SeamSet {
 public:
  SeamSet() = default;
  explicit SeamSet(std::vector<Edge> segments, std::string mesh_id = {});

  void insert(Edge e);

  [[nodiscard]] const std::vector<Edge>& segments() const noexcept { return segments_; }
  [[nodiscard]] bool contains(Edge e) const;
  [[nodiscard]] std::size_t size() const noexcept { return segments_.size(); }
  [[nodiscard]] bool empty() const noexcept { return segments_.empty(); }

  [[nodiscard]] const std::string& mesh_id() const noexcept { return mesh_id_; }
  void set_mesh_id(std::string id) { mesh_id_ = std::move(id); }

  /// Throws listing the first segment that is not an edge of `mesh`.
  void validate(const Mesh& mesh) const;

  friend bool operator==(const SeamSet& l, const SeamSet& r) { return l.segments_ == r.segments_; }

 private:
  std::vector<Edge> segments_;
  std::string mesh_id_;
};

/// Quantized seam encoding: six tokens (x, y, z of both endpoints) per
/// segment. SOS/EOS are carried as flags, so every value in
/// [0, 2^bits − 1] is a coordinate.
struct TokenSeq {
  int bits = 10;
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_extent = Vec3::Zero();
  std::vector<std::uint32_t> tokens;
  bool sos = true;
  bool eos = true;

  [[nodiscard]] std::uint32_t max_token() const noexcept { return (1u << bits) - 1u; }
};

/// Nearest vertex by Euclidean distance; ties go to the smaller index.
[[nodiscard]] int nearest_vertex(const Mesh& mesh, const Vec3& p);

/// Shortest edge path (Dijkstra, Euclidean edge lengths) from `from` to
/// `to`, returned as the vertex sequence including both ends.
[[nodiscard]] std::vector<int> shortest_edge_path(const Mesh& mesh, int from, int to);

/// Snaps every point to its nearest vertex and joins consecutive distinct
/// vertices with shortest edge paths.
[[nodiscard]] SeamSet snap_polyline(const Mesh& mesh, std::span<const Vec3> polyline);

[[nodiscard]] std::uint32_t quantize(double c, double min, double extent, int bits);
[[nodiscard]] double dequantize(std::uint32_t q, double min, double extent, int bits);

[[nodiscard]] TokenSeq encode_seams(const SeamSet& seams, const Mesh& mesh, int bits = 10);
[[nodiscard]] SeamSet decode_seams(const TokenSeq& tokens, const Mesh& mesh);

// JSON files --------------------------------------------------------------

/// Either explicit segments or raw polylines (snapped on load).
struct SeamFile {
  std::vector<Edge> segments;
  std::vector<std::vector<Vec3>> polylines;
};

[[nodiscard]] SeamFile read_seam_file(const std::filesystem::path& path);
[[nodiscard]] SeamSet resolve_seam_file(const SeamFile& file, const Mesh& mesh);
void write_seam_file(const std::filesystem::path& path, const SeamSet& seams);
[[nodiscard]] std::string format_seam_json(const SeamSet& seams);

[[nodiscard]] TokenSeq read_token_file(const std::filesystem::path& path);
void write_token_file(const std::filesystem::path& path, const TokenSeq& tokens);
[[nodiscard]] std::string format_token_json(const TokenSeq& tokens);
[[nodiscard]] TokenSeq parse_token_json(const std::string& text);

}  // namespace uvkit
