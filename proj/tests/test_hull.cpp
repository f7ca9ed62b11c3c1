#include "doctest.h"

#include <cmath>

#include "qgeom/hull.hpp"
#include "qgeom/numrange.hpp"

using namespace qgeom;

namespace {

RVec v3(double a, double b, double c) {
  RVec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("cube hull") {
  std::vector<RVec> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(v3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  pts.push_back(v3(0.5, 0.5, 0.5));
  pts.push_back(v3(0.2, 0.9, 0.1));
  auto h = convex_hull(pts);
  CHECK(h.affine_dim == 3);
  CHECK(h.vertex_ids.size() == 8);
  CHECK(h.facets.size() == 12);
  CHECK(h.contains(v3(0.3, 0.3, 0.3)));
  CHECK_FALSE(h.contains(v3(1.1, 0.3, 0.3)));
  CHECK(h.min_facet_distance(v3(0.5, 0.5, 0.5)) == doctest::Approx(0.5));
  // Every facet has all points on its inner side.
  for (const auto& f : h.facets)
    for (const auto& p : pts) CHECK(f.normal.dot(p) <= f.offset + 1e-12);
}

TEST_CASE("flat point sets are hulled in their span") {
  std::vector<RVec> pts{v3(0, 0, 1), v3(1, 0, 1), v3(0, 1, 1), v3(0.2, 0.2, 1)};
  auto h = convex_hull(pts);
  CHECK(h.affine_dim == 2);
  CHECK(h.vertex_ids.size() == 3);
  CHECK(h.contains(v3(0.1, 0.1, 1)));
  CHECK_FALSE(h.contains(v3(0.1, 0.1, 1.01)));
  CHECK(h.polygon_order().size() == 3);

  auto seg = convex_hull({v3(0, 0, 0), v3(1, 1, 1), v3(0.5, 0.5, 0.5)});
  CHECK(seg.affine_dim == 1);
  CHECK(seg.vertex_ids == std::vector<int>{0, 1});
  auto pt = convex_hull({v3(1, 2, 3), v3(1, 2, 3)});
  CHECK(pt.affine_dim == 0);
}

TEST_CASE("random points in four dimensions") {
  Rng rng(1);
  std::normal_distribution<double> g;
  std::vector<RVec> pts;
  for (int i = 0; i < 300; ++i) {
    RVec v(4);
    for (int k = 0; k < 4; ++k) v(k) = g(rng);
    pts.push_back(v);
  }
  auto h = convex_hull(pts);
  CHECK(h.affine_dim == 4);
  for (const auto& f : h.facets) {
    CHECK(f.vertices.size() == 4);
    for (const auto& p : pts) CHECK(f.normal.dot(p) <= f.offset + 1e-9);
  }
  // The sample maximum along any axis is a hull vertex.
  for (int k = 0; k < 4; ++k) {
    int best = 0;
    for (int i = 1; i < 300; ++i)
      if (pts[i](k) > pts[best](k)) best = i;
    CHECK(std::binary_search(h.vertex_ids.begin(), h.vertex_ids.end(), best));
  }
}

TEST_CASE("halfspace vertices of a cube") {
  std::vector<HalfSpace> hs;
  for (int k = 0; k < 3; ++k)
    for (double s : {1.0, -1.0}) {
      RVec n = RVec::Zero(3);
      n(k) = s;
      hs.push_back({n, 1.0});
    }
  auto v = halfspace_vertices(hs, RVec::Zero(3), RMat::Identity(3, 3));
  CHECK(v.bounded);
  for (const auto& x : v.vertices) CHECK(x.cwiseAbs().minCoeff() == doctest::Approx(1.0));
  hs.pop_back();
  CHECK_FALSE(halfspace_vertices(hs, RVec::Zero(3), RMat::Identity(3, 3)).bounded);
}
