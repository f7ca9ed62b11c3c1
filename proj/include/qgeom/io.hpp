#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgeom/core.hpp"
#include "qgeom/hull.hpp"
#include "qgeom/interconvert.hpp"
#include "qgeom/numrange.hpp"
#include "qgeom/su2.hpp"

namespace qgeom {

using Json = nlohmann::ordered_json;

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Matrices are arrays of rows; an entry is a number or a [re, im] pair.
CMat matrix_from_json(const Json& j);
Json matrix_to_json(const CMat& m);
CVec vector_from_json(const Json& j);
Json vector_to_json(const CVec& v);
Json vector_to_json(const RVec& v);

HermitianOperator op_from_json(const Json& j);  // a matrix, or {"op": matrix}
OpList ops_from_json(const Json& j);            // an array of matrices, or {"ops": [...]}
// {"ket": [...]} or {"matrix": [[...]]}
DensityMatrix state_from_json(const Json& j);

// {"offset": k, "amps": [[re, im], ...], "probs": ["1/6", ...]} with "probs" optional.
LadderState ladder_from_json(const Json& j);
std::optional<RationalProbVector> ladder_probs_from_json(const Json& j);
Json ladder_to_json(const LadderState& s);

// [{"j": "3/2", "m": "-1/2", "tag": "", "amp": [re, im]}, ...]
SpinKet spin_from_json(const Json& j);
Json spin_to_json(const SpinKet& s);
int parse_twice(const std::string& s);  // "3/2" → 3, "1" → 2
std::vector<int> parse_int_list(const std::string& s);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string dump_json(const Json& j);

Json body_to_json(const ConvexBodyApprox& body);
// ASCII OBJ of a 3D hull, facets fanned into outward-oriented triangles.
std::string hull_to_obj(const Hull& hull);
std::string csv_line(const std::vector<std::string>& fields);  // RFC 4180, CRLF terminated
std::string format_double(double x);                          // 17 significant digits
std::string polygon_csv(const Hull& hull);

Json report_envelope(const std::string& command, unsigned long long seed, const Json& tolerances);
const char* tool_version();

}  // namespace qgeom
