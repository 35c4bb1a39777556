#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace zwf {

// Planar coordinates in km. Inputs are pre-projected; no geodesy here.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BoundingBox {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(Point p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

// Ray-casting point-in-polygon test; boundary points count as inside.
bool point_in_polygon(Point p, const std::vector<Point>& polygon);

// Uniform square tiling of a rectangle. Cell ids are row-major and
// contiguous from 0 over the full tiling; a subset of cells is "active"
// (inside the study domain) and every field lives on the active subset.
class Grid {
public:
  Grid() = default;  // empty grid; fill via build() or from_cells()

  // Tiles [x0,x1] x [y0,y1] with square cells of side `resolution`. Cells
  // whose centroid falls outside `mask` (when given) are inactive.
  static Grid build(const BoundingBox& bounds, double resolution,
                    const std::vector<Point>& mask = {});
  // Reconstructs a grid from explicit per-cell rows (CSV ingestion).
  // Centroids must form a uniform tiling; ids must be 0..n-1 row-major.
  static Grid from_cells(const std::vector<Point>& centroids,
                         const std::vector<bool>& in_domain);

  int n_cells() const { return nx_ * ny_; }
  int n_active() const { return static_cast<int>(active_ids_.size()); }
  double resolution() const { return resolution_; }
  double cell_area() const { return resolution_ * resolution_; }
  const BoundingBox& bounds() const { return bounds_; }

  Point centroid(int cell_id) const;
  bool is_active(int cell_id) const { return active_index_[cell_id] >= 0; }
  // Position of a cell within the active subset, -1 if inactive.
  int active_index(int cell_id) const { return active_index_[cell_id]; }
  const std::vector<int>& active_ids() const { return active_ids_; }

  // Cell id containing p, or -1 when p is outside the tiling. Points on a
  // shared edge belong to the higher-indexed cell except at the top/right
  // boundary of the tiling.
  int cell_at(Point p) const;
  // Active-subset index of the cell containing p, -1 when outside or
  // inactive.
  int active_cell_at(Point p) const;

  // Centroids of active cells, n_active x 2, ordered by active index.
  Eigen::MatrixX2d active_centroids() const;

private:
  BoundingBox bounds_;
  double resolution_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<int> active_index_;  // cell id -> active slot or -1
  std::vector<int> active_ids_;    // active slot -> cell id
};

// Per-active-cell values on a grid. The grid outlives the field.
struct ScalarField {
  const Grid* grid = nullptr;
  Eigen::VectorXd values;

  ScalarField() = default;
  ScalarField(const Grid& g, double fill = 0.0)
      : grid(&g), values(Eigen::VectorXd::Constant(g.n_active(), fill)) {}
  ScalarField(const Grid& g, Eigen::VectorXd v);
};

// Midpoint-rule integral over the active domain: sum of value * area.
// Throws numerical_error on non-finite values.
double integrate_field(const ScalarField& f);

struct Transect {
  int id = 0;
  std::vector<Point> polyline;  // >= 2 vertices, consecutive distinct
};

struct Hydrophone {
  int id = 0;
  Point location;
};

void validate_transect(const Transect& t);

// Minimum Euclidean distance from s to the polyline, in km.
double dist_to_transect(Point s, const Transect& t);

// Euclidean distance in meters, clamped below at 1 m so the log10
// transmission loss stays defined and vanishes smoothly at the source.
double dist_to_hydrophone(Point s, const Hydrophone& h);

// Quarter of the bounding-box diagonal: the effective-range convention
// applied when a config leaves the range unset.
double default_effective_range(const BoundingBox& bounds);

}  // namespace zwf
