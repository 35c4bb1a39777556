#include "zwf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zwf/errors.hpp"

namespace zwf {

bool point_in_polygon(Point p, const std::vector<Point>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) throw validation_error("mask polygon needs at least 3 vertices");
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = polygon[i];
    const Point b = polygon[j];
    // On-edge check first so boundary points are counted as inside.
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
        std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y))
      return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

Grid Grid::build(const BoundingBox& bounds, double resolution,
                 const std::vector<Point>& mask) {
  if (!(resolution > 0.0))
    throw validation_error("build_grid: resolution must be > 0");
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0))
    throw validation_error("build_grid: degenerate bounds");
  if (resolution > bounds.width() || resolution > bounds.height())
    throw validation_error("build_grid: resolution exceeds a bound extent");

  Grid g;
  g.bounds_ = bounds;
  g.resolution_ = resolution;
  g.nx_ = static_cast<int>(std::round(bounds.width() / resolution));
  g.ny_ = static_cast<int>(std::round(bounds.height() / resolution));
  if (g.nx_ < 1) g.nx_ = 1;
  if (g.ny_ < 1) g.ny_ = 1;
  g.active_index_.assign(static_cast<std::size_t>(g.nx_) * g.ny_, -1);
  for (int cell = 0; cell < g.n_cells(); ++cell) {
    const Point c = g.centroid(cell);
    if (!mask.empty() && !point_in_polygon(c, mask)) continue;
    g.active_index_[cell] = static_cast<int>(g.active_ids_.size());
    g.active_ids_.push_back(cell);
  }
  if (g.active_ids_.empty())
    throw validation_error("build_grid: mask excludes every cell");
  return g;
}

Grid Grid::from_cells(const std::vector<Point>& centroids,
                      const std::vector<bool>& in_domain) {
  if (centroids.empty()) throw validation_error("grid file has no cells");
  if (centroids.size() != in_domain.size())
    throw validation_error("grid: centroid/in_domain size mismatch");

  // Infer resolution from the spacing of distinct x coordinates.
  std::vector<double> xs, ys;
  xs.reserve(centroids.size());
  ys.reserve(centroids.size());
  for (const Point& p : centroids) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double res = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double dx = xs[i] - xs[i - 1];
    if (dx > 1e-9 && (res == 0.0 || dx < res)) res = dx;
  }
  for (std::size_t i = 1; i < ys.size(); ++i) {
    const double dy = ys[i] - ys[i - 1];
    if (dy > 1e-9 && (res == 0.0 || dy < res)) res = dy;
  }
  if (res == 0.0) throw validation_error("grid: cannot infer resolution");

  BoundingBox b;
  b.x0 = xs.front() - res / 2.0;
  b.x1 = xs.back() + res / 2.0;
  b.y0 = ys.front() - res / 2.0;
  b.y1 = ys.back() + res / 2.0;

  Grid g;
  g.bounds_ = b;
  g.resolution_ = res;
  g.nx_ = static_cast<int>(std::round(b.width() / res));
  g.ny_ = static_cast<int>(std::round(b.height() / res));
  if (static_cast<std::size_t>(g.nx_) * g.ny_ != centroids.size())
    throw validation_error(
        "grid: cells do not form a full rectangular tiling (" +
        std::to_string(centroids.size()) + " rows, expected " +
        std::to_string(g.nx_ * g.ny_) + ")");
  g.active_index_.assign(centroids.size(), -1);
  for (std::size_t id = 0; id < centroids.size(); ++id) {
    const Point expect = g.centroid(static_cast<int>(id));
    if (std::abs(expect.x - centroids[id].x) > 1e-6 * res ||
        std::abs(expect.y - centroids[id].y) > 1e-6 * res)
      throw validation_error("grid: cell " + std::to_string(id) +
                             " centroid is not row-major at the expected "
                             "position; ids must be row-major from 0");
    if (in_domain[id]) {
      g.active_index_[id] = static_cast<int>(g.active_ids_.size());
      g.active_ids_.push_back(static_cast<int>(id));
    }
  }
  if (g.active_ids_.empty())
    throw validation_error("grid: no active cells");
  return g;
}

Point Grid::centroid(int cell_id) const {
  const int row = cell_id / nx_;
  const int col = cell_id % nx_;
  return {bounds_.x0 + (col + 0.5) * resolution_,
          bounds_.y0 + (row + 0.5) * resolution_};
}

int Grid::cell_at(Point p) const {
  if (!bounds_.contains(p)) return -1;
  int col = static_cast<int>(std::floor((p.x - bounds_.x0) / resolution_));
  int row = static_cast<int>(std::floor((p.y - bounds_.y0) / resolution_));
  if (col == nx_) col = nx_ - 1;  // top/right boundary
  if (row == ny_) row = ny_ - 1;
  return row * nx_ + col;
}

int Grid::active_cell_at(Point p) const {
  const int cell = cell_at(p);
  return cell < 0 ? -1 : active_index_[cell];
}

Eigen::MatrixX2d Grid::active_centroids() const {
  Eigen::MatrixX2d m(n_active(), 2);
  for (int i = 0; i < n_active(); ++i) {
    const Point c = centroid(active_ids_[i]);
    m(i, 0) = c.x;
    m(i, 1) = c.y;
  }
  return m;
}

ScalarField::ScalarField(const Grid& g, Eigen::VectorXd v)
    : grid(&g), values(std::move(v)) {
  if (values.size() != g.n_active())
    throw validation_error("ScalarField: " + std::to_string(values.size()) +
                           " values for " + std::to_string(g.n_active()) +
                           " active cells");
}

double integrate_field(const ScalarField& f) {
  if (f.grid == nullptr) throw validation_error("integrate_field: no grid");
  if (!f.values.allFinite())
    throw numerical_error("integrate_field: non-finite value in field");
  return f.values.sum() * f.grid->cell_area();
}

void validate_transect(const Transect& t) {
  if (t.polyline.size() < 2)
    throw validation_error("transect " + std::to_string(t.id) +
                           ": needs at least 2 vertices");
  for (std::size_t i = 1; i < t.polyline.size(); ++i) {
    const Point a = t.polyline[i - 1];
    const Point b = t.polyline[i];
    if (a.x == b.x && a.y == b.y)
      throw validation_error("transect " + std::to_string(t.id) +
                             ": repeated consecutive vertex " +
                             std::to_string(i));
  }
}

namespace {

double dist_point_segment(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::hypot(dx, dy);
}

}  // namespace

double dist_to_transect(Point s, const Transect& t) {
  validate_transect(t);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.polyline.size(); ++i)
    best = std::min(best, dist_point_segment(s, t.polyline[i - 1], t.polyline[i]));
  return best;
}

double dist_to_hydrophone(Point s, const Hydrophone& h) {
  const double km = std::hypot(s.x - h.location.x, s.y - h.location.y);
  return std::max(1.0, km * 1000.0);
}

double default_effective_range(const BoundingBox& bounds) {
  return 0.25 * std::hypot(bounds.width(), bounds.height());
}

}  // namespace zwf
