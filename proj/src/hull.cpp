#include "qgeom/hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qgeom {

namespace {

struct Facet {
  std::vector<int> v;
  RVec n;
  double off = 0;
  std::vector<int> nb;
  std::vector<int> outside;
  bool alive = true;
};

class Incremental {
 public:
  Incremental(const RMat& y, double eps) : y_(y), r_(static_cast<int>(y.rows())), eps_(eps) {}

  std::vector<Facet> run() {
    auto simplex = initial_simplex();
    interior_ = RVec::Zero(r_);
    for (int s : simplex) interior_ += y_.col(s);
    interior_ /= double(simplex.size());

    for (int i = 0; i <= r_; ++i) {
      Facet f;
      for (int j = 0; j <= r_; ++j)
        if (j != i) {
          f.v.push_back(simplex[j]);
          f.nb.push_back(j);
        }
      fs_.push_back(std::move(f));
    }
    for (auto& f : fs_) orient(f);

    std::vector<char> used(y_.cols(), 0);
    for (int s : simplex) used[s] = 1;
    std::vector<int> rest;
    for (int i = 0; i < y_.cols(); ++i)
      if (!used[i]) rest.push_back(i);
    std::vector<int> all_facets(fs_.size());
    for (size_t i = 0; i < fs_.size(); ++i) all_facets[i] = static_cast<int>(i);
    assign(rest, all_facets);

    for (size_t fi = 0; fi < fs_.size(); ++fi) {
      while (fs_[fi].alive && !fs_[fi].outside.empty()) add_point(static_cast<int>(fi));
    }
    std::vector<Facet> out;
    for (auto& f : fs_)
      if (f.alive) out.push_back(f);
    return out;
  }

 private:
  const RMat& y_;
  int r_;
  double eps_;
  RVec interior_;
  std::vector<Facet> fs_;

  double dist(const Facet& f, int p) const { return f.n.dot(y_.col(p)) - f.off; }

  std::vector<int> initial_simplex() {
    std::vector<int> s;
    int a = 0;
    for (int i = 1; i < y_.cols(); ++i)
      if (y_(0, i) < y_(0, a)) a = i;
    s.push_back(a);
    std::vector<RVec> q;
    for (int k = 0; k < r_; ++k) {
      int best = -1;
      double bd = -1;
      RVec br;
      for (int i = 0; i < y_.cols(); ++i) {
        RVec d = y_.col(i) - y_.col(a);
        for (const auto& e : q) d -= e.dot(d) * e;
        double nd = d.norm();
        if (nd > bd) {
          bd = nd;
          best = i;
          br = d;
        }
      }
      s.push_back(best);
      q.push_back(br / br.norm());
    }
    return s;
  }

  void orient(Facet& f) {
    RMat a(r_ - 1, r_);
    for (int k = 1; k < r_; ++k) a.row(k - 1) = (y_.col(f.v[k]) - y_.col(f.v[0])).transpose();
    RVec n;
    if (r_ == 1) {
      n = RVec::Ones(1);
    } else {
      Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
      n = svd.matrixV().col(r_ - 1);
    }
    double off = n.dot(y_.col(f.v[0]));
    if (n.dot(interior_) > off) {
      n = -n;
      off = -off;
    }
    f.n = n;
    f.off = off;
  }

  void assign(const std::vector<int>& pts, const std::vector<int>& facets) {
    for (int p : pts) {
      int best = -1;
      double bd = eps_;
      for (int fi : facets) {
        double d = dist(fs_[fi], p);
        if (d > bd) {
          bd = d;
          best = fi;
        }
      }
      if (best >= 0) fs_[best].outside.push_back(p);
    }
  }

  void add_point(int start) {
    auto& so = fs_[start].outside;
    int p = so.front();
    double pd = dist(fs_[start], p);
    for (int q : so) {
      double d = dist(fs_[start], q);
      if (d > pd) {
        pd = d;
        p = q;
      }
    }

    std::vector<int> visible{start};
    std::vector<char> vis(fs_.size(), 0), seen(fs_.size(), 0);
    vis[start] = seen[start] = 1;
    for (size_t k = 0; k < visible.size(); ++k) {
      for (int nb : fs_[visible[k]].nb) {
        if (seen[nb]) continue;
        seen[nb] = 1;
        if (dist(fs_[nb], p) > eps_) {
          vis[nb] = 1;
          visible.push_back(nb);
        }
      }
    }

    std::vector<int> created;
    std::map<std::vector<int>, std::pair<int, int>> ridges;
    for (int fi : visible) {
      for (int i = 0; i < r_; ++i) {
        int nb = fs_[fi].nb[i];
        if (vis[nb]) continue;
        Facet nf;
        nf.v = fs_[fi].v;
        nf.v[i] = p;
        nf.nb = fs_[fi].nb;
        orient(nf);
        int id = static_cast<int>(fs_.size());
        for (auto& x : fs_[nb].nb)
          if (x == fi) x = id;
        fs_.push_back(std::move(nf));
        created.push_back(id);
        for (int k = 0; k < r_; ++k) {
          if (k == i) continue;
          std::vector<int> key;
          for (int m = 0; m < r_; ++m)
            if (m != k) key.push_back(fs_[id].v[m]);
          std::sort(key.begin(), key.end());
          auto it = ridges.find(key);
          if (it == ridges.end()) {
            ridges.emplace(std::move(key), std::make_pair(id, k));
          } else {
            auto [other, ok] = it->second;
            fs_[id].nb[k] = other;
            fs_[other].nb[ok] = id;
            ridges.erase(it);
          }
        }
      }
    }
    std::vector<int> orphans;
    for (int fi : visible) {
      fs_[fi].alive = false;
      for (int q : fs_[fi].outside)
        if (q != p) orphans.push_back(q);
      fs_[fi].outside.clear();
    }
    assign(orphans, created);
  }
};

RMat project(const std::vector<RVec>& pts, const RVec& origin, const RMat& basis) {
  RMat y(basis.cols(), pts.size());
  for (size_t i = 0; i < pts.size(); ++i) y.col(i) = basis.transpose() * (pts[i] - origin);
  return y;
}

}  // namespace

Hull convex_hull(const std::vector<RVec>& points, double tol) {
  if (points.empty()) throw DimensionError("convex_hull: no points");
  Hull h;
  h.points = points;
  h.ambient_dim = static_cast<int>(points.front().size());
  const int n = static_cast<int>(points.size());
  h.origin = RVec::Zero(h.ambient_dim);
  for (const auto& p : points) h.origin += p;
  h.origin /= double(n);

  RMat c(h.ambient_dim, n);
  double scale = 0;
  for (int i = 0; i < n; ++i) {
    c.col(i) = points[i] - h.origin;
    scale = std::max(scale, c.col(i).norm());
  }
  int r = 0;
  RMat u;
  if (scale > 0) {
    Eigen::JacobiSVD<RMat> svd(c, Eigen::ComputeThinU);
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > tol * std::max(1.0, scale) * std::sqrt(double(n))) ++r;
    u = svd.matrixU();
  }
  h.affine_dim = r;
  h.basis = r ? RMat(u.leftCols(r)) : RMat(h.ambient_dim, 0);

  if (r == 0) {
    h.vertex_ids = {0};
    return h;
  }
  RMat y = project(points, h.origin, h.basis);
  if (r == 1) {
    int lo = 0, hi = 0;
    for (int i = 1; i < n; ++i) {
      if (y(0, i) < y(0, lo)) lo = i;
      if (y(0, i) > y(0, hi)) hi = i;
    }
    RVec e = h.basis.col(0);
    h.facets.push_back({{hi}, e, e.dot(points[hi])});
    h.facets.push_back({{lo}, -e, -e.dot(points[lo])});
    h.vertex_ids = {std::min(lo, hi), std::max(lo, hi)};
    return h;
  }

  Incremental inc(y, tol * std::max(1.0, scale));
  auto fs = inc.run();
  std::vector<int> verts;
  for (auto& f : fs) {
    HullFacet hf;
    hf.vertices = f.v;
    hf.normal = h.basis * f.n;
    hf.offset = f.off + hf.normal.dot(h.origin);
    if (r == 3) {
      // Counter-clockwise as seen from outside.
      RVec a = y.col(f.v[1]) - y.col(f.v[0]), b = y.col(f.v[2]) - y.col(f.v[0]);
      Eigen::Vector3d cr = Eigen::Vector3d(a).cross(Eigen::Vector3d(b));
      if (cr.dot(Eigen::Vector3d(f.n)) < 0) std::swap(hf.vertices[1], hf.vertices[2]);
    }
    verts.insert(verts.end(), f.v.begin(), f.v.end());
    h.facets.push_back(std::move(hf));
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  h.vertex_ids = std::move(verts);
  return h;
}

double Hull::affine_residual(const RVec& x) const {
  RVec d = x - origin;
  return (d - basis * (basis.transpose() * d)).norm();
}

bool Hull::contains(const RVec& x, double tol) const {
  if (affine_residual(x) > tol) return false;
  for (const auto& f : facets)
    if (f.normal.dot(x) > f.offset + tol) return false;
  return true;
}

double Hull::min_facet_distance(const RVec& center) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : facets) m = std::min(m, f.offset - f.normal.dot(center));
  return m;
}

std::vector<int> Hull::polygon_order() const {
  if (affine_dim != 2) throw DimensionError("polygon_order needs a two-dimensional hull");
  RVec c = RVec::Zero(2);
  for (int v : vertex_ids) c += basis.transpose() * (points[v] - origin);
  c /= double(vertex_ids.size());
  std::vector<std::pair<double, int>> ang;
  for (int v : vertex_ids) {
    RVec y = basis.transpose() * (points[v] - origin) - c;
    ang.emplace_back(std::atan2(y(1), y(0)), v);
  }
  std::sort(ang.begin(), ang.end());
  std::vector<int> out;
  for (auto& a : ang) out.push_back(a.second);
  return out;
}

HalfSpaceVertices halfspace_vertices(const std::vector<HalfSpace>& hs, const RVec& interior,
                                     const RMat& basis, double tol) {
  const int r = static_cast<int>(basis.cols());
  HalfSpaceVertices out;
  if (r == 0) {
    out.bounded = true;
    out.vertices.push_back(interior);
    return out;
  }
  std::vector<RVec> dual;
  for (const auto& h : hs) {
    RVec a = basis.transpose() * h.normal;
    double an = a.norm();
    if (an < 1e-9) continue;
    double slack = h.offset - h.normal.dot(interior);
    if (slack <= tol) throw DomainError("halfspace_vertices: interior point is not strictly feasible");
    dual.push_back(a / slack);
  }
  if (static_cast<int>(dual.size()) < r + 1) return out;
  auto dh = convex_hull(dual, tol);
  if (dh.affine_dim < r) return out;
  if (dh.min_facet_distance(RVec::Zero(r)) <= tol) return out;
  out.bounded = true;
  for (const auto& f : dh.facets) out.vertices.push_back(interior + basis * (f.normal / f.offset));
  return out;
}

}  // namespace qgeom
