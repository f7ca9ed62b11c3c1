#pragma once

#include <vector>

#include "qgeom/core.hpp"

namespace qgeom {

struct HullFacet {
  std::vector<int> vertices;  // indices into Hull::points
  RVec normal;                // outward unit normal, ambient coordinates
  double offset = 0;          // normal·x <= offset inside
};

// Convex hull in any dimension. Inputs that are not full-dimensional are hulled
// inside their affine span; `basis`/`origin` describe that span.
struct Hull {
  int ambient_dim = 0;
  int affine_dim = -1;
  std::vector<RVec> points;
  RVec origin;
  RMat basis;  // ambient_dim × affine_dim, orthonormal columns
  std::vector<HullFacet> facets;
  std::vector<int> vertex_ids;  // sorted unique

  bool contains(const RVec& x, double tol = 1e-9) const;
  double affine_residual(const RVec& x) const;
  // Smallest facet offset measured from `center`; the in-radius about it.
  double min_facet_distance(const RVec& center) const;
  // 2D hulls: vertex ids in counter-clockwise order (within the span coordinates).
  std::vector<int> polygon_order() const;
};

Hull convex_hull(const std::vector<RVec>& points, double tol = 1e-10);

struct HalfSpace {
  RVec normal;
  double offset;
};

struct HalfSpaceVertices {
  bool bounded = false;
  std::vector<RVec> vertices;
};

// Vertices of {x : n_i·x <= h_i} restricted to the affine span (origin + basis·y).
// `interior` must satisfy all inequalities strictly.
HalfSpaceVertices halfspace_vertices(const std::vector<HalfSpace>& hs, const RVec& interior,
                                     const RMat& basis, double tol = 1e-10);

}  // namespace qgeom
