#include "mrbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mrbf/errors.hpp"

namespace mrbf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDuplicateTol = 1e-10;

Vec3 unit(const Vec3& v) {
  const double n = norm(v);
  return (1.0 / n) * v;
}

std::string describe(const Vec3& p, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

double max_abs_component(const std::vector<Vec3>& pts) {
  double m = 0.0;
  for (const auto& p : pts) {
    for (double c : p) m = std::max(m, std::fabs(c));
  }
  return m;
}

double min_distance_to(const Vec3& p, const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : pts) best = std::min(best, norm(p - q));
  return best;
}

// Points on the unit sphere about the x axis: x_i = 1 - (2i+1)/n, golden
// angle in the (y, z) plane.
Vec3 fibonacci_x(int i, int n) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double x = 1.0 - (2.0 * i + 1.0) / n;
  const double rho = std::sqrt(std::max(0.0, 1.0 - x * x));
  const double phi = golden * i;
  return {x, rho * std::cos(phi), rho * std::sin(phi)};
}

}  // namespace

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Dirichlet: return "dirichlet";
    case NodeKind::Neumann: return "neumann";
    case NodeKind::Interior: return "interior";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

NodeCloud::NodeCloud(int dim, std::vector<Node> nodes) : dim_(dim) {
  std::stable_partition(nodes.begin(), nodes.end(), [](const Node& n) { return n.kind == NodeKind::Dirichlet; });
  std::stable_partition(nodes.begin(), nodes.end(), [](const Node& n) { return n.kind != NodeKind::Interior; });
  nodes_ = std::move(nodes);
  for (const auto& n : nodes_) {
    switch (n.kind) {
      case NodeKind::Dirichlet: ++counts_.dirichlet; break;
      case NodeKind::Neumann: ++counts_.neumann; break;
      case NodeKind::Interior: ++counts_.interior; break;
    }
  }
  validate();
}

NodeCloud make_ordered_cloud(int dim, std::vector<Node> nodes) {
  for (const auto& n : nodes) {
    if (n.kind != nodes.front().kind) throw GeometryError("ordered cloud must hold a single node kind");
  }
  return NodeCloud(dim, std::move(nodes));
}

std::vector<Vec3> NodeCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.position);
  return out;
}

std::vector<Node> NodeCloud::of_kind(NodeKind kind) const {
  std::vector<Node> out;
  for (const auto& n : nodes_) {
    if (n.kind == kind) out.push_back(n);
  }
  return out;
}

void NodeCloud::validate() const {
  if (dim_ < 1 || dim_ > 3) throw GeometryError("cloud dimension must be 1, 2 or 3");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    for (int c = dim_; c < 3; ++c) {
      if (n.position[c] != 0.0 || n.normal[c] != 0.0) {
        throw GeometryError("node " + std::to_string(i) + " has components beyond the cloud dimension");
      }
    }
    if (n.kind == NodeKind::Interior) {
      if (norm(n.normal) != 0.0) throw GeometryError("interior node " + std::to_string(i) + " carries a normal");
    } else if (std::fabs(norm(n.normal) - 1.0) > 1e-12) {
      throw GeometryError("boundary node " + std::to_string(i) + " normal is not unit length");
    }
  }
  // Sort-and-sweep along x keeps this near-linear for large clouds.
  std::vector<std::size_t> idx(nodes_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return nodes_[a].position[0] < nodes_[b].position[0]; });
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const Vec3& p = nodes_[idx[a]].position;
      const Vec3& q = nodes_[idx[b]].position;
      if (q[0] - p[0] > kDuplicateTol) break;
      if (norm(p - q) <= kDuplicateTol) {
        throw GeometryError("duplicate nodes " + std::to_string(idx[a]) + " and " + std::to_string(idx[b]) +
                            " at " + describe(p, dim_));
      }
    }
  }
}

// ---------------------------------------------------------------------------

double SquareCutout::cutout_radius(double theta) const {
  return base_radius + amplitude * std::cos(lobes * theta);
}

bool SquareCutout::contains(const Vec3& p) const {
  if (std::fabs(p[0]) >= half_side || std::fabs(p[1]) >= half_side) return false;
  if (!has_cutout()) return true;
  return std::hypot(p[0], p[1]) > cutout_radius(std::atan2(p[1], p[0]));
}

void SquareCutout::validate() const {
  if (!(half_side > 0.0)) throw GeometryError("square half side must be > 0");
  if (!has_cutout()) return;
  if (base_radius < 0.0 || amplitude < 0.0) throw GeometryError("cutout radius terms must be >= 0");
  if (base_radius - amplitude <= 0.0) throw GeometryError("cutout radius must stay positive");
  if (base_radius + amplitude >= half_side) throw GeometryError("cutout intersects the square boundary");
}

bool CubeTwoBallCavity::contains(const Vec3& p) const {
  for (double c : p) {
    if (std::fabs(c) >= half_side) return false;
  }
  const Vec3 c1{-center_offset, 0.0, 0.0};
  const Vec3 c2{center_offset, 0.0, 0.0};
  return norm(p - c1) > ball_radius && norm(p - c2) > ball_radius;
}

void CubeTwoBallCavity::validate() const {
  if (!(ball_radius > 0.0)) throw GeometryError("ball radius must be > 0");
  if (center_offset < 0.0 || center_offset >= ball_radius) {
    throw GeometryError("balls must overlap to form a single cavity");
  }
  if (half_side <= center_offset + ball_radius) throw GeometryError("cavity touches the cube faces");
}

// ---------------------------------------------------------------------------

std::vector<Vec3> material_grid(const Region& region, int count, double offset, double min_gap,
                                const std::vector<Vec3>& avoid) {
  if (count < 0) throw GeometryError("point count must be >= 0");
  if (count == 0) return {};
  if (offset < 0.0 || offset >= 1.0) throw GeometryError("grid offset must be in [0, 1)");
  const int dim = region.dim();
  const double h = region.half_extent();
  const int max_cells = dim == 1 ? 100000 : (dim == 2 ? 3000 : 160);
  for (int g = 1; g <= max_cells; ++g) {
    const double cell = 2.0 * h / g;
    auto coord = [&](int i) { return -h + (i + 0.5 + 0.5 * offset) * cell; };
    std::vector<Vec3> found;
    const int gy = dim >= 2 ? g : 1;
    const int gz = dim >= 3 ? g : 1;
    for (int k = 0; k < gz; ++k) {
      for (int j = 0; j < gy; ++j) {
        for (int i = 0; i < g; ++i) {
          const Vec3 p{coord(i), dim >= 2 ? coord(j) : 0.0, dim >= 3 ? coord(k) : 0.0};
          if (!region.contains(p)) continue;
          if (min_gap > 0.0 && !avoid.empty() && min_distance_to(p, avoid) < min_gap) continue;
          found.push_back(p);
        }
      }
    }
    if (static_cast<int>(found.size()) < count) continue;
    std::vector<Vec3> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
      out.push_back(found[static_cast<std::size_t>(k) * found.size() / count]);
    }
    return out;
  }
  throw GeometryError("could not place " + std::to_string(count) + " material grid points");
}

namespace {

std::vector<Node> interior_nodes_for(const Region& region, int count, const std::vector<Node>& boundary,
                                     double spacing) {
  std::vector<Vec3> avoid;
  for (const auto& b : boundary) avoid.push_back(b.position);
  std::vector<Node> out;
  for (const auto& p : material_grid(region, count, 0.0, 0.5 * spacing, avoid)) {
    out.push_back({p, NodeKind::Interior, {0.0, 0.0, 0.0}});
  }
  return out;
}

double polyline_length(const std::vector<Vec3>& pts) {
  double len = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) len += norm(pts[(i + 1) % pts.size()] - pts[i]);
  return len;
}

}  // namespace

NodeCloud sample_square_with_cutout(const SquareCutout& geom, int boundary_nodes, int interior_nodes,
                                    int cutout_nodes) {
  geom.validate();
  if (interior_nodes < 0) throw GeometryError("interior node count must be >= 0");
  const double h = geom.half_side;
  const double outer_len = 8.0 * h;
  int n_out = boundary_nodes;
  int n_in = 0;
  if (geom.has_cutout()) {
    if (cutout_nodes >= 0) {
      n_in = cutout_nodes;
    } else {
      std::vector<Vec3> curve;
      for (int k = 0; k < 4096; ++k) {
        const double t = 2.0 * kPi * k / 4096.0;
        const double r = geom.cutout_radius(t);
        curve.push_back({r * std::cos(t), r * std::sin(t), 0.0});
      }
      const double in_len = polyline_length(curve);
      n_in = static_cast<int>(std::lround(boundary_nodes * in_len / (in_len + outer_len)));
    }
    n_out = boundary_nodes - n_in;
    if (n_in < 3) throw GeometryError("cutout needs at least 3 boundary nodes");
  } else if (cutout_nodes > 0) {
    throw GeometryError("cutout nodes requested for a square without cutout");
  }
  if (n_out < 4) throw GeometryError("outer square needs at least 4 boundary nodes");

  std::vector<Node> nodes;
  // Outer square, counter-clockwise from the corner (-h, -h), half-step offset.
  const double step = outer_len / n_out;
  // Half-step offset unless that puts a node on a corner.
  double shift = -1.0;
  for (double cand : {0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875}) {
    bool hits_corner = false;
    for (int k = 0; k < n_out && !hits_corner; ++k) {
      const double s = std::fmod((k + cand) * step, 2.0 * h);
      hits_corner = s < 1e-9 * h || 2.0 * h - s < 1e-9 * h;
    }
    if (!hits_corner) {
      shift = cand;
      break;
    }
  }
  if (shift < 0.0) throw GeometryError("cannot place outer nodes away from the corners");
  for (int k = 0; k < n_out; ++k) {
    const double s = (k + shift) * step;
    const int edge = static_cast<int>(s / (2.0 * h));
    const double t = s - edge * 2.0 * h;
    Node n;
    switch (edge) {
      case 0: n.position = {-h + t, -h, 0.0}; n.normal = {0.0, -1.0, 0.0}; break;
      case 1: n.position = {h, -h + t, 0.0}; n.normal = {1.0, 0.0, 0.0}; break;
      case 2: n.position = {h - t, h, 0.0}; n.normal = {0.0, 1.0, 0.0}; break;
      default: n.position = {-h, h - t, 0.0}; n.normal = {-1.0, 0.0, 0.0}; break;
    }
    n.kind = (edge == 2 && geom.neumann_top) ? NodeKind::Neumann : NodeKind::Dirichlet;
    nodes.push_back(n);
  }
  // Cutout curve; the material normal points into the cutout.
  for (int k = 0; k < n_in; ++k) {
    const double t = 2.0 * kPi * k / n_in;
    const double r = geom.cutout_radius(t);
    const double dr = -geom.amplitude * geom.lobes * std::sin(geom.lobes * t);
    const Vec3 p{r * std::cos(t), r * std::sin(t), 0.0};
    const Vec3 tangent{dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t), 0.0};
    nodes.push_back({p, NodeKind::Dirichlet, unit(Vec3{-tangent[1], tangent[0], 0.0})});
  }
  auto interior = interior_nodes_for(geom, interior_nodes, nodes, step);
  nodes.insert(nodes.end(), interior.begin(), interior.end());
  return NodeCloud(2, std::move(nodes));
}

NodeCloud sample_cube_with_two_ball_cavity(const CubeTwoBallCavity& geom, int boundary_nodes,
                                           int interior_nodes, int face_grid) {
  geom.validate();
  if (interior_nodes < 0) throw GeometryError("interior node count must be >= 0");
  const int k = face_grid > 0 ? face_grid
                              : std::max(1, static_cast<int>(std::lround(std::sqrt(boundary_nodes / 12.0))));
  const int cavity = boundary_nodes - 6 * k * k;
  if (cavity < 2) throw GeometryError("too few boundary nodes left for the cavity surface");
  const double h = geom.half_side;

  std::vector<Node> nodes;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side : {-1, 1}) {
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
          const double u = -h + (i + 0.5) * 2.0 * h / k;
          const double v = -h + (j + 0.5) * 2.0 * h / k;
          Node n;
          n.position[axis] = side * h;
          n.position[(axis + 1) % 3] = u;
          n.position[(axis + 2) % 3] = v;
          n.normal[axis] = side;
          n.kind = (axis == 0 && side < 0 && geom.neumann_face) ? NodeKind::Neumann : NodeKind::Dirichlet;
          nodes.push_back(n);
        }
      }
    }
  }

  // Cavity: Fibonacci points on the right ball outside the left ball; the
  // left ball gets the point reflection of the same construction.
  const double R = geom.ball_radius;
  const Vec3 c_right{geom.center_offset, 0.0, 0.0};
  const Vec3 c_left{-geom.center_offset, 0.0, 0.0};
  auto accepted = [&](int n) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
      const Vec3 p = c_right + R * fibonacci_x(i, n);
      if (norm(p - c_left) > R * (1.0 + 1e-9)) pts.push_back(p);
    }
    return pts;
  };
  auto exact = [&](int target) {
    for (int n = target; n <= 4 * target + 16; ++n) {
      auto pts = accepted(n);
      if (static_cast<int>(pts.size()) == target) return pts;
    }
    throw GeometryError("cannot place " + std::to_string(target) + " cavity nodes on one ball");
  };
  const int right_count = (cavity + 1) / 2;
  const auto right = exact(right_count);
  const auto left = (cavity - right_count == right_count) ? right : exact(cavity - right_count);
  for (const auto& p : right) nodes.push_back({p, NodeKind::Dirichlet, unit(c_right - p)});
  for (const auto& q : left) {
    const Vec3 p = -q;
    nodes.push_back({p, NodeKind::Dirichlet, unit(c_left - p)});
  }

  auto interior = interior_nodes_for(geom, interior_nodes, nodes, 2.0 * h / k);
  nodes.insert(nodes.end(), interior.begin(), interior.end());
  return NodeCloud(3, std::move(nodes));
}

NodeCloud sample_circle(double radius, int boundary_nodes, int interior_nodes) {
  if (!(radius > 0.0)) throw GeometryError("radius must be > 0");
  if (boundary_nodes < 1) throw GeometryError("circle needs at least one boundary node");
  std::vector<Node> nodes;
  for (int k = 0; k < boundary_nodes; ++k) {
    const double t = 2.0 * kPi * k / boundary_nodes;
    // Exact axis values keep quarter-turn clouds exactly symmetric.
    double c = std::cos(t), s = std::sin(t);
    if (4 * k % boundary_nodes == 0) {
      const int q = 4 * k / boundary_nodes;
      c = q == 0 ? 1.0 : (q == 2 ? -1.0 : 0.0);
      s = q == 1 ? 1.0 : (q == 3 ? -1.0 : 0.0);
    }
    nodes.push_back({{radius * c, radius * s, 0.0}, NodeKind::Dirichlet, {c, s, 0.0}});
  }
  Disk disk;
  disk.radius = radius;
  auto interior = interior_nodes_for(disk, interior_nodes, nodes, 2.0 * kPi * radius / boundary_nodes);
  nodes.insert(nodes.end(), interior.begin(), interior.end());
  return NodeCloud(2, std::move(nodes));
}

NodeCloud sample_sphere(double radius, int boundary_nodes, int interior_nodes) {
  if (!(radius > 0.0)) throw GeometryError("radius must be > 0");
  if (boundary_nodes < 1) throw GeometryError("sphere needs at least one boundary node");
  std::vector<Node> nodes;
  for (int i = 0; i < boundary_nodes; ++i) {
    const Vec3 u = fibonacci_x(i, boundary_nodes);
    const Vec3 d{u[1], u[2], u[0]};  // pole along z
    nodes.push_back({radius * d, NodeKind::Dirichlet, unit(d)});
  }
  Ball ball;
  ball.radius = radius;
  const double spacing = radius * std::sqrt(4.0 * kPi / boundary_nodes);
  auto interior = interior_nodes_for(ball, interior_nodes, nodes, spacing);
  nodes.insert(nodes.end(), interior.begin(), interior.end());
  return NodeCloud(3, std::move(nodes));
}

NodeCloud sample_interval(double half_length, int interior_nodes) {
  if (!(half_length > 0.0)) throw GeometryError("half length must be > 0");
  if (interior_nodes < 0) throw GeometryError("interior node count must be >= 0");
  std::vector<Node> nodes;
  nodes.push_back({{-half_length, 0.0, 0.0}, NodeKind::Dirichlet, {-1.0, 0.0, 0.0}});
  nodes.push_back({{half_length, 0.0, 0.0}, NodeKind::Dirichlet, {1.0, 0.0, 0.0}});
  for (int i = 0; i < interior_nodes; ++i) {
    const double x = -half_length + 2.0 * half_length * (i + 1) / (interior_nodes + 1);
    nodes.push_back({{x, 0.0, 0.0}, NodeKind::Interior, {0.0, 0.0, 0.0}});
  }
  return NodeCloud(1, std::move(nodes));
}

// ---------------------------------------------------------------------------

NodeCloud symmetric_ordering(const NodeCloud& cloud, double tol) {
  const auto& nodes = cloud.nodes();
  const std::size_t n = nodes.size();
  if (n == 0) return cloud;
  for (const auto& nd : nodes) {
    if (nd.kind != nodes.front().kind) {
      throw SymmetryError("symmetric ordering needs a cloud with a single node kind");
    }
  }
  Vec3 c{0.0, 0.0, 0.0};
  for (const auto& nd : nodes) c = c + nd.position;
  c = (1.0 / n) * c;
  const double scale = std::max(1.0, max_abs_component(cloud.positions()));
  // A centroid at the origin (up to tol) is snapped to it so mirrors are
  // exact negations and the distance matrix is exactly centrosymmetric.
  const bool at_origin = norm(c) <= tol * scale;
  if (at_origin) c = {0.0, 0.0, 0.0};

  std::vector<bool> used(n, false);
  std::vector<std::pair<Node, Node>> pairs;
  std::vector<Node> centre;
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    const Vec3 target = 2.0 * c - nodes[i].position;
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j] && norm(nodes[j].position - target) <= tol * scale) {
        best = j;
        break;
      }
    }
    if (best == n) {
      throw SymmetryError("node " + std::to_string(i) + " at " + describe(nodes[i].position, cloud.dim()) +
                          " has no mirror image through the centroid");
    }
    used[i] = used[best] = true;
    if (best == i) {
      centre.push_back(nodes[i]);
      continue;
    }
    Node a = nodes[i];
    Node b = nodes[best];
    if (b.position < a.position) std::swap(a, b);
    if (at_origin) {
      b.position = -a.position;
      if (a.kind != NodeKind::Interior) b.normal = -a.normal;
    }
    pairs.emplace_back(a, b);
  }
  if (centre.size() > 1) throw SymmetryError("more than one node sits at the centroid");
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& x, const auto& y) { return x.first.position < y.first.position; });
  std::vector<Node> out;
  out.reserve(n);
  for (const auto& p : pairs) out.push_back(p.first);
  out.insert(out.end(), centre.begin(), centre.end());
  for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) out.push_back(it->second);
  return make_ordered_cloud(cloud.dim(), std::move(out));
}

void write_cloud_csv(const NodeCloud& cloud, std::ostream& os) {
  static const char* kAxes[] = {"x", "y", "z"};
  const int dim = cloud.dim();
  for (int i = 0; i < dim; ++i) os << kAxes[i] << ",";
  os << "kind";
  for (int i = 0; i < dim; ++i) os << ",n" << kAxes[i];
  os << "\n";
  os.precision(17);
  for (const auto& n : cloud.nodes()) {
    for (int i = 0; i < dim; ++i) os << n.position[i] << ",";
    os << to_string(n.kind);
    for (int i = 0; i < dim; ++i) os << "," << n.normal[i];
    os << "\n";
  }
}

}  // namespace mrbf
