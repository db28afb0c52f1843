/// @file mesh.hpp
/// @brief 1D interval meshes and structured body-fitted bump-channel meshes.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace adjstep {

using Vec2 = Eigen::Vector2d;

enum class BoundaryTag : std::uint8_t { kInterior, kInflow, kOutflow, kWall };

/// Which side of the structured block a boundary face lies on.
enum class Patch : std::uint8_t { kInterior, kLeft, kRight, kBottom, kTop };

const char* to_string(BoundaryTag tag);

struct Face {
  double area = 0.0;  ///< |Γ|, in m^(d-1); 1 for 1D point faces
  Vec2 normal = Vec2::Zero();  ///< unit normal pointing from `left` to `right`
  Vec2 midpoint = Vec2::Zero();
  int left = -1;
  int right = -1;  ///< -1 on the boundary; normal is then outward
  BoundaryTag tag = BoundaryTag::kInterior;
  Patch patch = Patch::kInterior;
  int v0 = -1, v1 = -1;  ///< endpoint vertices (v1 == v0 in 1D)

  bool is_boundary() const { return right < 0; }
};

struct Cell {
  double volume = 0.0;
  Vec2 centroid = Vec2::Zero();
  double length_scale = 0.0;  ///< |V| / max face area; the CFL length
};

/// Plain geometric data; Mesh validates and indexes it.
struct MeshData {
  int dim = 1;
  int level = 0;
  int nx = 0;  ///< structured cell counts; ny == 1 in 1D
  int ny = 1;
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Face> faces;
  std::vector<std::vector<int>> cell_vertices;  ///< counter-clockwise
};

/// Immutable after construction.
class Mesh {
 public:
  explicit Mesh(MeshData data);

  int dim() const { return data_.dim; }
  int level() const { return data_.level; }
  int nx() const { return data_.nx; }
  int ny() const { return data_.ny; }
  std::size_t num_cells() const { return data_.cells.size(); }
  std::size_t num_faces() const { return data_.faces.size(); }

  std::span<const Cell> cells() const { return data_.cells; }
  std::span<const Face> faces() const { return data_.faces; }
  const Cell& cell(int c) const { return data_.cells[c]; }
  const Face& face(int f) const { return data_.faces[f]; }
  std::span<const Vec2> vertices() const { return data_.vertices; }
  const MeshData& data() const { return data_; }

  /// Faces bounding cell `c`.
  std::span<const int> cell_faces(int c) const {
    return {cell_face_index_.data() + cell_face_offset_[c],
            cell_face_index_.data() + cell_face_offset_[c + 1]};
  }

  /// Unit normal of face `f` pointing out of cell `c`.
  Vec2 outward_normal(int f, int c) const {
    const Face& fc = data_.faces[f];
    return fc.left == c ? fc.normal : Vec2(-fc.normal);
  }

  /// Neighbour across face `f` from cell `c`; -1 on the boundary.
  int neighbor(int f, int c) const {
    const Face& fc = data_.faces[f];
    return fc.left == c ? fc.right : fc.left;
  }

  /// Structured cell index (i, j) -> linear id.
  int cell_index(int i, int j) const { return j * data_.nx + i; }

  /// Total volume of all cells.
  double total_volume() const;

  /// Stable hash of the geometry; stored in artifact headers.
  std::uint64_t hash() const;

 private:
  MeshData data_;
  std::vector<int> cell_face_offset_;
  std::vector<int> cell_face_index_;
};

Mesh build_interval_mesh(double x_min, double x_max, int n_cells);

struct BumpChannelGeometry {
  double length = 6.0;
  double height = 2.0;
  double bump_secant = 1.0;
  double bump_height = 0.024;
};

/// Cells at refinement level 0; each level doubles both directions.
inline constexpr int kBumpBaseNx = 24;
inline constexpr int kBumpBaseNy = 8;

/// Channel spans x in [-length/2, length/2], y in [0, height]; the circular arc
/// bump sits on the bottom wall centred at x = 0.
Mesh build_bump_channel_mesh(const BumpChannelGeometry& geometry, int level);

/// Bottom wall height y_b(x) of the channel (arc inside the bump, 0 elsewhere).
double bump_profile(const BumpChannelGeometry& geometry, double x);

/// Exact area of the circular segment cut out by the bump.
double bump_segment_area(const BumpChannelGeometry& geometry);

/// max over cells of |sum_j |Γ_ij| n_ij| / sum_j |Γ_ij|.
double check_geometric_consistency(const Mesh& mesh);

/// For nested structured meshes: cell of `coarse` that contains cell `fine_cell` of `fine`.
int parent_cell(const Mesh& coarse, const Mesh& fine, int fine_cell);

/// Plain-text export: header, vertices, cell connectivity, boundary faces.
void write_mesh_text(std::ostream& os, const Mesh& mesh);

}  // namespace adjstep
