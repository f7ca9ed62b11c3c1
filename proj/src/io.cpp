#include "qgeom/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#ifndef QGEOM_VERSION
#define QGEOM_VERSION "0.0.0"
#endif

namespace qgeom {

namespace {

cplx entry_from_json(const Json& e) {
  if (e.is_number()) return e.get<double>();
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw InputError("matrix entries must be numbers or [re, im] pairs");
}

Json entry_to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

}  // namespace

CMat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError("a matrix must be a nonempty array of rows");
  const auto rows = j.size(), cols = j[0].size();
  CMat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InputError("matrix rows have different lengths");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = entry_from_json(j[r][c]);
  }
  return m;
}

Json matrix_to_json(const CMat& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(entry_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

CVec vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("a vector must be a nonempty array");
  CVec v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) v(k) = entry_from_json(j[k]);
  return v;
}

Json vector_to_json(const CVec& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(entry_to_json(v(k)));
  return out;
}

Json vector_to_json(const RVec& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

HermitianOperator op_from_json(const Json& j) {
  const Json& m = j.is_object() ? j.at("op") : j;
  CMat a = matrix_from_json(m);
  if (a.rows() != a.cols()) throw DimensionError("operator must be square");
  return HermitianOperator(a, 1e-10);
}

OpList ops_from_json(const Json& j) {
  const Json& list = j.is_object() ? j.at("ops") : j;
  if (!list.is_array() || list.empty()) throw InputError("expected a nonempty list of operators");
  OpList ops;
  for (const auto& m : list) ops.push_back(op_from_json(m));
  for (const auto& op : ops)
    if (op.dim() != ops.front().dim()) throw DimensionError("operators have different dimensions");
  return ops;
}

DensityMatrix state_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("a state must be {\"ket\": [...]} or {\"matrix\": [...]}");
  if (j.contains("ket")) {
    CVec psi = vector_from_json(j.at("ket"));
    if (psi.norm() == 0) throw InputError("zero ket");
    return DensityMatrix::pure(psi.normalized());
  }
  if (j.contains("matrix")) {
    CMat m = matrix_from_json(j.at("matrix"));
    if (m.rows() != m.cols()) throw DimensionError("density matrix must be square");
    auto h = HermitianOperator(m, 1e-10);
    if (lambda_min(h) < -kPsdTol) throw InputError("density matrix is not positive semidefinite");
    return DensityMatrix(h, 1e-10);
  }
  throw InputError("a state must contain \"ket\" or \"matrix\"");
}

LadderState ladder_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("offset") || !j.contains("amps"))
    throw InputError("a ladder state needs \"offset\" and \"amps\"");
  LadderState s;
  s.offset = j.at("offset").get<int>();
  s.amplitudes = vector_from_json(j.at("amps"));
  s.validate(1e-9);
  return s;
}

std::optional<RationalProbVector> ladder_probs_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("probs")) return std::nullopt;
  std::vector<Rational> w;
  for (const auto& e : j.at("probs")) w.push_back(parse_rational(e.is_string() ? e.get<std::string>() : e.dump()));
  return RationalProbVector::from_weights(j.at("offset").get<int>(), std::move(w));
}

Json ladder_to_json(const LadderState& s) {
  Json out;
  out["offset"] = s.offset;
  out["amps"] = vector_to_json(s.amplitudes);
  return out;
}

int parse_twice(const std::string& s) {
  auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      int v = std::stoi(s, &used);
      if (used != s.size()) throw InputError("");
      return 2 * v;
    }
    int num = std::stoi(s.substr(0, slash), &used);
    if (used != slash || s.substr(slash + 1) != "2") throw InputError("");
    return num;
  } catch (const std::exception&) {
    throw InputError("expected an integer or half-integer \"p/2\", got \"" + s + "\"");
  }
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw InputError("");
    } catch (const std::exception&) {
      throw InputError("expected a comma-separated list of integers, got \"" + s + "\"");
    }
  }
  if (out.empty()) throw InputError("empty integer list");
  return out;
}

SpinKet spin_from_json(const Json& j) {
  const Json& list = j.is_object() ? j.at("terms") : j;
  if (!list.is_array()) throw InputError("a spin state is a list of {j, m, tag, amp} entries");
  SpinKet s;
  for (const auto& e : list) {
    auto half = [](const Json& v) { return v.is_string() ? parse_twice(v.get<std::string>()) : 2 * v.get<int>(); };
    s.add(half(e.at("j")), half(e.at("m")), entry_from_json(e.at("amp")), e.value("tag", std::string()));
  }
  s.validate(1e-9);
  return s;
}

Json spin_to_json(const SpinKet& s) {
  Json out = Json::array();
  for (const auto& [k, a] : s.amps) {
    Json e;
    e["j"] = format_half(k.twice_j);
    e["m"] = format_half(k.twice_m);
    e["tag"] = k.tag;
    e["amp"] = entry_to_json(a);
    out.push_back(std::move(e));
  }
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json body_to_json(const ConvexBodyApprox& body) {
  Json out;
  out["k"] = body.k;
  Json inner = Json::array();
  for (const auto& v : body.inner_vertices) inner.push_back(vector_to_json(v));
  out["inner_vertices"] = std::move(inner);
  Json outer = Json::array();
  for (const auto& h : body.outer_halfspaces) {
    Json e;
    e["normal"] = vector_to_json(h.normal);
    e["offset"] = h.offset;
    outer.push_back(std::move(e));
  }
  out["outer_halfspaces"] = std::move(outer);
  out["unbounded"] = body.unbounded;
  out["degenerate_samples"] = body.degenerate_samples;
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hull_to_obj(const Hull& hull) {
  if (hull.ambient_dim != 3 || hull.affine_dim != 3) throw DimensionError("OBJ export needs a full 3D hull");
  std::ostringstream out;
  std::map<int, int> index;
  for (int v : hull.vertex_ids) {
    index[v] = static_cast<int>(index.size()) + 1;
    const RVec& p = hull.points[v];
    out << "v " << format_double(p(0)) << ' ' << format_double(p(1)) << ' ' << format_double(p(2)) << '\n';
  }
  for (const auto& f : hull.facets) {
    out << 'f';
    for (int v : f.vertices) out << ' ' << index.at(v);
    out << '\n';
  }
  return out.str();
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) line += ',';
    const auto& f = fields[k];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      line += f;
      continue;
    }
    line += '"';
    for (char c : f) {
      if (c == '"') line += '"';
      line += c;
    }
    line += '"';
  }
  return line + "\r\n";
}

std::string polygon_csv(const Hull& hull) {
  if (hull.ambient_dim != 2) throw DimensionError("polygon CSV needs a planar hull");
  std::string out = csv_line({"x", "y"});
  std::vector<int> order;
  if (hull.affine_dim == 2) {
    order = hull.polygon_order();
    order.push_back(order.front());
  } else {
    order = hull.vertex_ids;
  }
  for (int v : order) out += csv_line({format_double(hull.points[v](0)), format_double(hull.points[v](1))});
  return out;
}

const char* tool_version() { return QGEOM_VERSION; }

Json report_envelope(const std::string& command, unsigned long long seed, const Json& tolerances) {
  Json out;
  out["tool"] = "qgeom";
  out["version"] = tool_version();
  out["command"] = command;
  out["seed"] = seed;
  out["tolerances"] = tolerances;
  return out;
}

}  // namespace qgeom
