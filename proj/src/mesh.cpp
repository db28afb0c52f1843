#include "adjstep/mesh.hpp"

#include "adjstep/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>

namespace adjstep {

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::kInterior: return "interior";
    case BoundaryTag::kInflow: return "inflow";
    case BoundaryTag::kOutflow: return "outflow";
    case BoundaryTag::kWall: return "wall";
  }
  return "?";
}

Mesh::Mesh(MeshData data) : data_(std::move(data)) {
  const int n = static_cast<int>(data_.cells.size());
  if (n == 0) throw ArgumentError("mesh has no cells");
  std::vector<int> count(n, 0);
  for (const Face& f : data_.faces) {
    if (f.left < 0 || f.left >= n || f.right >= n)
      throw ArgumentError("face references a cell out of range");
    if (f.area <= 0.0) throw ArgumentError("face with non-positive area");
    ++count[f.left];
    if (f.right >= 0) ++count[f.right];
  }
  for (const Cell& c : data_.cells)
    if (c.volume <= 0.0) throw ArgumentError("cell with non-positive volume");

  cell_face_offset_.assign(n + 1, 0);
  for (int c = 0; c < n; ++c) cell_face_offset_[c + 1] = cell_face_offset_[c] + count[c];
  cell_face_index_.resize(cell_face_offset_[n]);
  std::vector<int> fill(cell_face_offset_.begin(), cell_face_offset_.end() - 1);
  for (int f = 0; f < static_cast<int>(data_.faces.size()); ++f) {
    const Face& fc = data_.faces[f];
    cell_face_index_[fill[fc.left]++] = f;
    if (fc.right >= 0) cell_face_index_[fill[fc.right]++] = f;
  }
}

double Mesh::total_volume() const {
  double v = 0.0;
  for (const Cell& c : data_.cells) v += c.volume;
  return v;
}

std::uint64_t Mesh::hash() const {
  // FNV-1a over dimensions and vertex coordinates.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const int dims[4] = {data_.dim, data_.level, data_.nx, data_.ny};
  mix(dims, sizeof dims);
  for (const Vec2& v : data_.vertices) mix(v.data(), 2 * sizeof(double));
  return h;
}

Mesh build_interval_mesh(double x_min, double x_max, int n_cells) {
  if (n_cells < 2) throw ArgumentError("interval mesh needs at least 2 cells");
  if (!(x_min < x_max)) throw ArgumentError("interval mesh needs x_min < x_max");

  MeshData d;
  d.dim = 1;
  d.nx = n_cells;
  d.ny = 1;
  // Level is the power of two relative to nothing in particular; callers that
  // build nested 1D families set it themselves.
  d.level = 0;
  const double h = (x_max - x_min) / n_cells;
  d.vertices.resize(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i)
    d.vertices[i] = Vec2(i == n_cells ? x_max : x_min + i * h, 0.0);

  d.cells.resize(n_cells);
  d.cell_vertices.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    Cell& c = d.cells[i];
    c.volume = d.vertices[i + 1].x() - d.vertices[i].x();
    c.centroid = 0.5 * (d.vertices[i] + d.vertices[i + 1]);
    c.length_scale = c.volume;
    d.cell_vertices[i] = {i, i + 1};
  }

  d.faces.resize(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) {
    Face& f = d.faces[i];
    f.area = 1.0;
    f.midpoint = d.vertices[i];
    f.v0 = f.v1 = i;
    if (i == 0) {
      f.left = 0;
      f.normal = Vec2(-1.0, 0.0);
      f.tag = BoundaryTag::kInflow;
      f.patch = Patch::kLeft;
    } else if (i == n_cells) {
      f.left = n_cells - 1;
      f.normal = Vec2(1.0, 0.0);
      f.tag = BoundaryTag::kOutflow;
      f.patch = Patch::kRight;
    } else {
      f.left = i - 1;
      f.right = i;
      f.normal = Vec2(1.0, 0.0);
    }
  }
  return Mesh(std::move(d));
}

namespace {

struct Arc {
  double radius;
  double center_y;  // negative: the circle centre lies below the wall
  double half_secant;
};

Arc arc_of(const BumpChannelGeometry& g) {
  const double a = 0.5 * g.bump_secant;
  const double h = g.bump_height;
  const double r = (a * a + h * h) / (2.0 * h);
  return {r, h - r, a};
}

// Antiderivative of the arc height yc + sqrt(R^2 - x^2).
double arc_primitive(const Arc& arc, double x) {
  const double r = arc.radius;
  const double s = std::sqrt(std::max(r * r - x * x, 0.0));
  return arc.center_y * x + 0.5 * (x * s + r * r * std::asin(std::clamp(x / r, -1.0, 1.0)));
}

// Exact integral of the bottom profile over [xa, xb].
double profile_integral(const BumpChannelGeometry& g, double xa, double xb) {
  if (g.bump_height <= 0.0) return 0.0;
  const Arc arc = arc_of(g);
  const double lo = std::max(xa, -arc.half_secant);
  const double hi = std::min(xb, arc.half_secant);
  if (hi <= lo) return 0.0;
  return arc_primitive(arc, hi) - arc_primitive(arc, lo);
}

double polygon_area(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec2& u = p[k];
    const Vec2& v = p[(k + 1) % p.size()];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& p, double area) {
  Vec2 c = Vec2::Zero();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec2& u = p[k];
    const Vec2& v = p[(k + 1) % p.size()];
    const double cross = u.x() * v.y() - v.x() * u.y();
    c += (u + v) * cross;
  }
  return c / (6.0 * area);
}

}  // namespace

double bump_profile(const BumpChannelGeometry& g, double x) {
  if (g.bump_height <= 0.0) return 0.0;
  const Arc arc = arc_of(g);
  if (std::abs(x) >= arc.half_secant) return 0.0;
  return std::max(arc.center_y + std::sqrt(arc.radius * arc.radius - x * x), 0.0);
}

double bump_segment_area(const BumpChannelGeometry& g) {
  if (g.bump_height <= 0.0) return 0.0;
  const Arc arc = arc_of(g);
  const double r = arc.radius;
  const double h = g.bump_height;
  return r * r * std::acos((r - h) / r) - (r - h) * std::sqrt(2.0 * r * h - h * h);
}

Mesh build_bump_channel_mesh(const BumpChannelGeometry& g, int level) {
  if (level < 0) throw ArgumentError("mesh level must be >= 0");
  if (!(g.length > 0.0) || !(g.height > 0.0))
    throw ArgumentError("channel length and height must be positive");
  if (g.bump_secant >= g.length || g.bump_secant <= 0.0)
    throw ArgumentError("bump secant must lie in (0, channel length)");
  if (g.bump_height < 0.0 || g.bump_height >= g.height)
    throw ArgumentError("bump height must lie in [0, channel height)");
  if (g.bump_height >= 0.5 * g.bump_secant)
    throw ArgumentError("bump taller than a half circle is not supported");

  MeshData d;
  d.dim = 2;
  d.level = level;
  d.nx = kBumpBaseNx << level;
  d.ny = kBumpBaseNy << level;
  const int nx = d.nx, ny = d.ny;
  const double x0 = -0.5 * g.length;

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  d.vertices.resize(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int i = 0; i <= nx; ++i) {
    const double x = (i == nx) ? -x0 : x0 + g.length * i / nx;
    const double yb = bump_profile(g, x);
    for (int j = 0; j <= ny; ++j) {
      const double y = (j == ny) ? g.height : yb + (g.height - yb) * j / ny;
      d.vertices[vid(i, j)] = Vec2(x, y);
    }
  }

  d.cells.resize(static_cast<std::size_t>(nx) * ny);
  d.cell_vertices.resize(d.cells.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      d.cell_vertices[c] = {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)};
      std::vector<Vec2> poly;
      for (int v : d.cell_vertices[c]) poly.push_back(d.vertices[v]);
      double area = polygon_area(poly);
      const Vec2 centroid = polygon_centroid(poly, area);
      if (j == 0) {
        // The wall is the exact arc, not the chord: remove the sliver between them.
        const Vec2& a = poly[0];
        const Vec2& b = poly[1];
        const double chord = 0.5 * (a.y() + b.y()) * (b.x() - a.x());
        area -= profile_integral(g, a.x(), b.x()) - chord;
      }
      d.cells[c].volume = area;
      d.cells[c].centroid = centroid;
    }
  }

  auto add_face = [&](int va, int vb, int left, int right, bool flip, BoundaryTag tag, Patch patch) {
    Face f;
    const Vec2 e = d.vertices[vb] - d.vertices[va];
    f.area = e.norm();
    Vec2 n(e.y(), -e.x());  // right-hand normal of the edge direction
    if (flip) n = -n;
    f.normal = n / f.area;
    f.midpoint = 0.5 * (d.vertices[va] + d.vertices[vb]);
    f.left = left;
    f.right = right;
    f.tag = tag;
    f.patch = patch;
    f.v0 = va;
    f.v1 = vb;
    d.faces.push_back(f);
  };

  // Vertical faces, edge running upward: right-hand normal points to +x.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int va = vid(i, j), vb = vid(i, j + 1);
      if (i == 0)
        add_face(va, vb, j * nx, -1, true, BoundaryTag::kInflow, Patch::kLeft);
      else if (i == nx)
        add_face(va, vb, j * nx + nx - 1, -1, false, BoundaryTag::kOutflow, Patch::kRight);
      else
        add_face(va, vb, j * nx + i - 1, j * nx + i, false, BoundaryTag::kInterior, Patch::kInterior);
    }
  }
  // Horizontal faces, edge running to +x: right-hand normal points down.
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int va = vid(i, j), vb = vid(i + 1, j);
      if (j == 0)
        add_face(va, vb, i, -1, false, BoundaryTag::kWall, Patch::kBottom);
      else if (j == ny)
        add_face(va, vb, (ny - 1) * nx + i, -1, true, BoundaryTag::kWall, Patch::kTop);
      else
        add_face(va, vb, (j - 1) * nx + i, j * nx + i, true, BoundaryTag::kInterior, Patch::kInterior);
    }
  }

  std::vector<double> max_area(d.cells.size(), 0.0);
  for (const Face& f : d.faces) {
    max_area[f.left] = std::max(max_area[f.left], f.area);
    if (f.right >= 0) max_area[f.right] = std::max(max_area[f.right], f.area);
  }
  for (std::size_t c = 0; c < d.cells.size(); ++c)
    d.cells[c].length_scale = d.cells[c].volume / max_area[c];

  return Mesh(std::move(d));
}

double check_geometric_consistency(const Mesh& mesh) {
  double worst = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    Vec2 sum = Vec2::Zero();
    double total = 0.0;
    for (int f : mesh.cell_faces(c)) {
      const double a = mesh.face(f).area;
      sum += a * mesh.outward_normal(f, c);
      total += a;
    }
    worst = std::max(worst, sum.norm() / total);
  }
  return worst;
}

int parent_cell(const Mesh& coarse, const Mesh& fine, int fine_cell) {
  if (coarse.dim() != fine.dim()) throw ArgumentError("parent_cell: dimension mismatch");
  const int rx = fine.nx() / coarse.nx();
  const int ry = fine.ny() / coarse.ny();
  if (rx < 1 || ry < 1 || rx * coarse.nx() != fine.nx() || ry * coarse.ny() != fine.ny())
    throw ArgumentError("parent_cell: meshes are not nested");
  const int i = fine_cell % fine.nx();
  const int j = fine_cell / fine.nx();
  return coarse.cell_index(i / rx, j / ry);
}

void write_mesh_text(std::ostream& os, const Mesh& mesh) {
  os << "# adjstep-mesh v1\n";
  os << "dim " << mesh.dim() << " level " << mesh.level() << " nx " << mesh.nx() << " ny "
     << mesh.ny() << "\n";
  os << "vertices " << mesh.vertices().size() << "\n" << std::setprecision(17);
  for (const Vec2& v : mesh.vertices()) os << v.x() << ' ' << v.y() << '\n';
  os << "cells " << mesh.num_cells() << "\n";
  for (const auto& cv : mesh.data().cell_vertices) {
    os << cv.size();
    for (int v : cv) os << ' ' << v;
    os << '\n';
  }
  std::size_t nb = 0;
  for (const Face& f : mesh.faces()) nb += f.is_boundary();
  os << "boundary_faces " << nb << "\n";
  for (const Face& f : mesh.faces())
    if (f.is_boundary()) os << f.v0 << ' ' << f.v1 << ' ' << to_string(f.tag) << '\n';
}

}  // namespace adjstep
