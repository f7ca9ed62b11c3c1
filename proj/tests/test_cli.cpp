#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qgeom/io.hpp"

using namespace qgeom;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("qgeom_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string file(const std::string& name, const std::string& text) {
  auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " " + QGEOM_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const char* kPauli = R"([[[0,1],[1,0]], [[[0,0],[0,-1]],[[0,1],[0,0]]], [[1,0],[0,-1]]])";

}  // namespace

TEST_CASE("JSON and text formats") {
  CMat m(2, 2);
  m << cplx(1, 0), cplx(0, -2), cplx(0.1, 3), cplx(-4, 1e-17);
  CHECK((matrix_from_json(matrix_to_json(m)) - m).norm() == 0);
  CHECK(matrix_from_json(Json::parse("[[1,2],[3,4]]"))(1, 0) == cplx(3));
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1,2],[3]]")), InputError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1,\"a\"]]")), InputError);
  CHECK_THROWS_AS(op_from_json(Json::parse("[[0,1],[0,0]]")), SymmetryError);
  CHECK(ops_from_json(Json::parse(kPauli)).size() == 3);
  CHECK_THROWS_AS(state_from_json(Json::parse("{\"matrix\": [[1,0],[0,-0.5]]}")), std::invalid_argument);
  CHECK(std::abs(state_from_json(Json::parse("{\"ket\": [1, [0, 1]]}")).matrix()(0, 1) - cplx(0, -0.5)) < 1e-15);

  CHECK(parse_twice("3/2") == 3);
  CHECK(parse_twice("-1/2") == -1);
  CHECK(parse_twice("2") == 4);
  CHECK_THROWS_AS(parse_twice("3/4"), InputError);
  CHECK_THROWS_AS(parse_twice("x"), InputError);
  CHECK(parse_int_list("2,3") == std::vector<int>{2, 3});
  CHECK_THROWS_AS(parse_int_list("2,,3"), InputError);

  SpinKet s;
  s.add(3, -1, cplx(0.6, 0));
  s.add(2, 2, cplx(0, 0.8), "(1/2,1/2)");
  auto back = spin_from_json(spin_to_json(s));
  CHECK(back.amps == s.amps);
  CHECK(spin_to_json(s)[0]["j"] == "1");

  auto ladder = ladder_from_json(Json::parse(R"({"offset": 2, "amps": [[0.6, 0], [0, 0.8]], "probs": ["9/25", "16/25"]})"));
  CHECK(ladder.offset == 2);
  auto probs = ladder_probs_from_json(Json::parse(R"({"offset": 2, "amps": [[1, 0]], "probs": ["9/25", "0.64"]})"));
  REQUIRE(probs);
  CHECK(probs->weights[1] == Rational(16, 25));
  CHECK_THROWS(ladder_from_json(Json::parse(R"({"offset": 0, "amps": [[2, 0]]})")));

  CHECK(csv_line({"a", "b,c", "d\"e"}) == "a,\"b,c\",\"d\"\"e\"\r\n");
  for (double x : {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(x)) == x);

  std::vector<RVec> cube;
  for (int i = 0; i < 8; ++i) cube.push_back(Eigen::Vector3d(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  std::string obj = hull_to_obj(convex_hull(cube));
  int verts = 0, faces = 0;
  std::istringstream lines(obj);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("v ", 0) == 0) ++verts;
    if (line.rfind("f ", 0) == 0) ++faces;
  }
  CHECK(verts == 8);
  CHECK(faces == 12);
}

TEST_CASE("jnr command writes a mesh close to the Bloch sphere") {
  auto ops = file("pauli.json", kPauli);
  auto mesh = (scratch() / "bloch.obj").string();
  auto body = (scratch() / "bloch.json").string();
  auto r = run("jnr --ops " + ops + " --dirs 400 --mesh " + mesh + " --out " + body);
  REQUIRE(r.code == 0);
  auto report = Json::parse(slurp(body));
  CHECK(report["tool"] == "qgeom");
  CHECK(report["version"] == tool_version());
  CHECK(report["seed"] == 0);
  CHECK(report.contains("tolerances"));
  CHECK(report["result"]["k"] == 3);
  std::istringstream lines(slurp(mesh));
  int verts = 0, faces = 0;
  for (std::string line; std::getline(lines, line);) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      CHECK(std::abs(std::sqrt(x * x + y * y + z * z) - 1) < 0.02);
      ++verts;
    } else if (tag == "f") {
      ++faces;
    }
  }
  CHECK(verts > 300);
  CHECK(faces == 2 * verts - 4);
}

TEST_CASE("uncertainty and interconvert reports") {
  auto r = run("uncertainty --table-j 1");
  REQUIRE(r.code == 0);
  auto rep = Json::parse(r.out);
  CHECK(std::abs(rep["result"]["value"].get<double>() - 0.4375) < 1e-9);
  CHECK(rep["result"].contains("certificate"));

  auto psi = file("psi.json", R"({"offset": 1, "amps": [[0.408248290463863,0],[0.577350269189626,0],[0.577350269189626,0],[0.408248290463863,0]], "probs": ["1/6","1/3","1/3","1/6"]})");
  auto phi = file("phi.json", R"({"offset": 0, "amps": [[0.7071067811865476,0],[0.7071067811865476,0]], "probs": ["1/2","1/2"]})");
  r = run("interconvert --psi " + psi + " --phi " + phi + " --exact --aux-d 1");
  REQUIRE(r.code == 0);
  rep = Json::parse(r.out);
  CHECK(rep["result"]["convertible"] == true);
  CHECK(rep["result"]["exact"] == true);
  CHECK(rep["result"]["w_exact"]["offset"] == 1);
  CHECK(rep["result"]["w_exact"]["weights"] == Json::array({"1/3", "1/3", "1/3"}));
  CHECK(rep["result"]["kraus"]["operators"].size() == 3);
  CHECK(rep["result"]["aux"]["reachable"] == false);

  r = run("interconvert --psi " + phi + " --phi " + psi + " --aux-d 3");
  REQUIRE(r.code == 0);
  rep = Json::parse(r.out);
  CHECK(rep["result"]["convertible"] == false);
  CHECK(rep["result"]["aux"]["reachable"] == true);
}

TEST_CASE("reports are deterministic and honour the thread settings") {
  auto h = file("h.json", R"([[1,0,0,0,0,0],[0,0,0.5,0,0,0],[0,0.5,0,0,0,0.3],[0,0,0,-1,0,0],[0,0,0,0,0.2,0],[0,0,0.3,0,0,0]])");
  auto a = run("sep-max --op " + h + " --dims 2,3 --restarts 8 --seed 7");
  auto b = run("sep-max --op " + h + " --dims 2,3 --restarts 8 --seed 7 --threads 3");
  auto c = run("sep-max --op " + h + " --dims 2,3 --restarts 8 --seed 7", "QGEOM_THREADS=2");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  auto rep = Json::parse(a.out);
  CHECK(rep["seed"] == 7);
  CHECK(rep["result"]["lower"].get<double>() <= rep["result"]["qubit_qudit"]["upper"].get<double>() + 1e-9);
}

TEST_CASE("exit codes") {
  CHECK(run("jnr --ops /nonexistent.json").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  auto ket = file("k5.json", R"({"ket": [1, 1, 0, 0, 0]})");
  CHECK(run("wigner --state " + ket + " --dims 4").code == 2);
  auto bad = file("bad.json", "{not json");
  CHECK(run("jnr --ops " + bad).code == 2);
  auto diag = file("diag.json", "[[[1,0,0],[0,2,0],[0,0,3]],[[0,0,0],[0,1,0],[0,0,0]],[[1,0,0],[0,0,0],[0,0,0]]]");
  auto refused = run("classify --ops " + diag);
  CHECK(refused.code == 1);
  CHECK(Json::parse(refused.out)["result"]["refused"] == true);
  CHECK(run("gap --n 6 --gamma 0 --boundary open").code == 1);
  CHECK(run("--version").code == 0);
}

TEST_CASE("wigner, wh-convert, su2 and distinguish commands") {
  auto ket = file("k5.json", R"({"ket": [1, 1, 0, 0, 0]})");
  auto csv = (scratch() / "w.csv").string();
  auto r = run("wigner --state " + ket + " --dims 5 --out " + csv);
  REQUIRE(r.code == 0);
  std::string table = slurp(csv);
  CHECK(table.rfind("x,q,W\r\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 26);
  CHECK(Json::parse(r.out)["result"]["negativity"].get<double>() < 0);
  r = run("wh-convert --rho " + ket + " --sigma " + ket + " --dims 5");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["result"]["convertible"] == true);

  auto phi = file("phi_spin.json", R"([{"j":"1","m":"-1","amp":[0.5773502691896258,0]},{"j":"2","m":"-1","amp":[0.5773502691896258,0]},{"j":"3","m":"-1","amp":[0.5773502691896258,0]}])");
  auto omega = file("omega_spin.json", R"([{"j":"0","m":"0","amp":[0.7071067811865476,0]},{"j":"1","m":"0","amp":[0.7071067811865476,0]}])");
  r = run("su2 convert --a " + phi + " --b " + omega);
  REQUIRE(r.code == 0);
  auto state = spin_from_json(Json::parse(r.out)["result"]["state"]);
  CHECK(std::abs(std::norm(state.amps.at({8, -2, ""})) - 5.0 / 56) < 1e-12);

  auto up = file("up.json", R"([{"j":"1/2","m":"1/2","amp":[1,0]}])");
  auto target = file("target.json", R"([{"j":"0","m":"0","amp":[0.7071067811865476,0]},{"j":"1","m":"1","amp":[0.7071067811865476,0]}])");
  r = run("su2 marvian --a " + up + " --b " + target + " --samples 200 --seed 1");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["result"]["verdict"] == "impossible");
  r = run("su2 chi --a " + up + " --v 0,0,1");
  REQUIRE(r.code == 0);
  auto chi = Json::parse(r.out)["result"]["values"][0]["chi"];
  CHECK(std::abs(chi[0].get<double>() - std::cos(0.5)) < 1e-12);
  CHECK(run("su2 combine --a " + up).code == 2);

  auto id = file("id.json", "[[1,0],[0,1]]");
  auto z = file("z.json", "[[1,0],[0,-1]]");
  r = run("distinguish --u " + id + " --v " + z);
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["result"]["distinguishable"] == true);
}
