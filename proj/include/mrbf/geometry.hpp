#pragma once

// Collocation node clouds for the test geometries and calibration shapes.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mrbf/vec.hpp"

namespace mrbf {

enum class NodeKind { Dirichlet, Neumann, Interior };

std::string to_string(NodeKind kind);

struct Node {
  Vec3 position{};
  NodeKind kind = NodeKind::Interior;
  Vec3 normal{};  // unit outward normal for boundary nodes, zero for interior
};

struct NodeCounts {
  std::size_t dirichlet = 0;
  std::size_t neumann = 0;
  std::size_t interior = 0;

  std::size_t boundary() const { return dirichlet + neumann; }
  std::size_t total() const { return dirichlet + neumann + interior; }
};

/// Nodes ordered Dirichlet block, Neumann block, interior block.
class NodeCloud {
 public:
  NodeCloud() = default;
  /// Reorders `nodes` into blocks (stable within each kind) and validates.
  NodeCloud(int dim, std::vector<Node> nodes);

  int dim() const { return dim_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  NodeCounts counts() const { return counts_; }

  std::vector<Vec3> positions() const;
  /// Subset of one kind, in cloud order.
  std::vector<Node> of_kind(NodeKind kind) const;

  /// Throws GeometryError on duplicates, bad normals or dimension mismatch.
  void validate() const;

 private:
  int dim_ = 2;
  std::vector<Node> nodes_;
  NodeCounts counts_;
};

/// Builds a cloud whose nodes are already in the desired order (used by
/// symmetric_ordering); kinds must all be equal.
NodeCloud make_ordered_cloud(int dim, std::vector<Node> nodes);

/// A material region: the set where collocation and checkpoints live.
class Region {
 public:
  virtual ~Region() = default;
  virtual int dim() const = 0;
  /// Strictly inside the material.
  virtual bool contains(const Vec3& p) const = 0;
  /// Axis-aligned half extent of a box centred at the origin enclosing it.
  virtual double half_extent() const = 0;
};

struct SquareCutout : Region {
  double half_side = 1.0;
  // Cutout boundary r(theta) = base_radius + amplitude cos(lobes theta).
  double base_radius = 0.35;
  double amplitude = 0.1;
  int lobes = 4;
  bool neumann_top = true;

  int dim() const override { return 2; }
  bool contains(const Vec3& p) const override;
  double half_extent() const override { return half_side; }
  double cutout_radius(double theta) const;
  bool has_cutout() const { return base_radius > 0.0 || amplitude > 0.0; }
  void validate() const;
};

struct CubeTwoBallCavity : Region {
  double half_side = 2.0;
  double ball_radius = 1.0;
  double center_offset = 0.70710678118654752440;  // centres at (+-offset, 0, 0)
  bool neumann_face = true;                        // face x = -half_side

  int dim() const override { return 3; }
  bool contains(const Vec3& p) const override;
  double half_extent() const override { return half_side; }
  void validate() const;
};

struct Disk : Region {
  double radius = 1.0;
  int dim() const override { return 2; }
  bool contains(const Vec3& p) const override { return norm(p) < radius; }
  double half_extent() const override { return radius; }
};

struct Ball : Region {
  double radius = 1.0;
  int dim() const override { return 3; }
  bool contains(const Vec3& p) const override { return norm(p) < radius; }
  double half_extent() const override { return radius; }
};

struct Interval : Region {
  double half_length = 1.0;
  int dim() const override { return 1; }
  bool contains(const Vec3& p) const override { return std::fabs(p[0]) < half_length; }
  double half_extent() const override { return half_length; }
};

/// `boundary_nodes` are split between the outer square and the cutout curve
/// in proportion to their lengths unless `cutout_nodes` >= 0 is given.
NodeCloud sample_square_with_cutout(const SquareCutout& geom, int boundary_nodes, int interior_nodes,
                                    int cutout_nodes = -1);

/// Faces get face_grid x face_grid cell-centred nodes each (default
/// round(sqrt(L / 12))); the rest go to the cavity surface.
NodeCloud sample_cube_with_two_ball_cavity(const CubeTwoBallCavity& geom, int boundary_nodes,
                                           int interior_nodes = 0, int face_grid = -1);

NodeCloud sample_circle(double radius, int boundary_nodes, int interior_nodes = 0);
NodeCloud sample_sphere(double radius, int boundary_nodes, int interior_nodes = 0);

/// Uniform nodes on [-h, h] with Dirichlet end points.
NodeCloud sample_interval(double half_length, int interior_nodes);

/// `count` points of the coarsest cell-centred grid with at least that many
/// material points, thinned by a fixed stride. `offset` in [0, 1) shifts the
/// grid by a fraction of a cell so checkpoint and collocation grids differ.
std::vector<Vec3> material_grid(const Region& region, int count, double offset = 0.0,
                                double min_gap = 0.0, const std::vector<Vec3>& avoid = {});

/// Reorders a point-symmetric single-kind cloud so node i and node N-1-i
/// mirror each other through the centroid.
NodeCloud symmetric_ordering(const NodeCloud& cloud, double tol = 1e-10);

/// CSV with columns x,y[,z],kind,nx,ny[,nz].
void write_cloud_csv(const NodeCloud& cloud, std::ostream& os);

}  // namespace mrbf
