#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qgeom/core.hpp"
#include "qgeom/entangle.hpp"
#include "qgeom/gapwitness.hpp"
#include "qgeom/interconvert.hpp"
#include "qgeom/io.hpp"
#include "qgeom/numrange.hpp"
#include "qgeom/parallel.hpp"
#include "qgeom/su2.hpp"
#include "qgeom/uncertainty.hpp"
#include "qgeom/wigner.hpp"

using namespace qgeom;

namespace {

struct Context {
  unsigned long long seed = 0;
  int threads = 0;
};

// Exit code 1 with a report: a computation ran but could not reach a verdict.
struct ComputationFailure : std::runtime_error {
  Json report;
  ComputationFailure(const std::string& m, Json r) : std::runtime_error(m), report(std::move(r)) {}
};

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json prob_to_json(const ProbVector& p) {
  Json out;
  out["offset"] = p.offset;
  out["weights"] = p.weights;
  return out;
}

Json rational_to_json(const RationalProbVector& p) {
  Json out;
  out["offset"] = p.offset;
  out["weights"] = p.strings();
  return out;
}

Json table_to_json(const WignerTable& w) {
  Json rows = Json::array();
  for (int x = 0; x < w.dim(); ++x) {
    Json row = Json::array();
    for (int q = 0; q < w.dim(); ++q) row.push_back(w.values(x, q));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<int> wh_dims_from(const std::string& s) {
  auto dims = parse_int_list(s);
  if (dims.size() == 1 && dims[0] > 2) return factor_odd_squarefree(dims[0]);
  return dims;
}

void emit(const Json& report, const std::string& path) {
  if (path.empty())
    std::cout << dump_json(report);
  else
    write_text_file(path, dump_json(report));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgeom: numerical ranges, entanglement bounds and covariant state conversion"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tool_version()));
  Context ctx;
  app.add_option("--seed", ctx.seed, "seed for every random choice")->default_val(0);
  app.add_option("--threads", ctx.threads, "worker threads (0: QGEOM_THREADS or all cores)")->default_val(0)
      ->check(CLI::NonNegativeNumber);

  std::function<Json()> job;
  std::string out_path;

  // jnr
  auto* jnr = app.add_subcommand("jnr", "joint numerical range of Hermitian operators");
  std::string ops_path, mesh_path, csv_path;
  int dirs = 500;
  jnr->add_option("--ops", ops_path, "operator list JSON")->required()->check(CLI::ExistingFile);
  jnr->add_option("--dirs", dirs, "number of support directions")->check(CLI::PositiveNumber);
  jnr->add_option("--out", out_path, "body JSON");
  jnr->add_option("--mesh", mesh_path, "OBJ mesh of the inner hull (three operators)");
  jnr->add_option("--csv", csv_path, "boundary polyline CSV (two operators)");
  jnr->callback([&] {
    job = [&] {
      auto ops = ops_from_json(read_json_file(ops_path));
      const int k = static_cast<int>(ops.size());
      auto body = jnr_approximate(ops, sphere_directions(k, dirs, ctx.seed), {true, resolve_threads(ctx.threads)});
      if (!mesh_path.empty()) {
        if (k != 3) throw InputError("--mesh needs exactly three operators");
        write_text_file(mesh_path, hull_to_obj(body.inner_hull()));
      }
      if (!csv_path.empty()) {
        if (k != 2) throw InputError("--csv needs exactly two operators");
        write_text_file(csv_path, polygon_csv(body.inner_hull()));
      }
      Json r = report_envelope("jnr", ctx.seed, {{"degenerate_gap", kDegenerateGap}});
      r["result"] = body_to_json(body);
      return r;
    };
  });

  // classify
  auto* classify = app.add_subcommand("classify", "face classification of a qutrit numerical range");
  classify->add_option("--ops", ops_path, "three 3×3 operators")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", out_path, "report JSON");
  classify->callback([&] {
    job = [&] {
      auto ops = ops_from_json(read_json_file(ops_path));
      if (ops.size() != 3 || ops[0].dim() != 3) throw DimensionError("classify needs three 3×3 operators");
      Json r = report_envelope("classify", ctx.seed, {{"flat_gap", 1e-8}, {"segment_ratio", 1e-6}});
      try {
        auto c = classify_qutrit_jnr(ops[0], ops[1], ops[2], ctx.seed);
        Json faces = Json::array();
        for (const auto& f : c.faces)
          faces.push_back({{"normal", vector_to_json(f.normal)}, {"shape", f.shape}, {"gap", f.gap},
                           {"pca_ratio", f.pca_ratio}, {"discriminant", f.discriminant}});
        r["result"] = {{"e", c.e},
                       {"s", c.s},
                       {"faces", faces},
                       {"nearest_rejected_gap", c.nearest_rejected_gap},
                       {"min_shape_margin", c.min_shape_margin}};
      } catch (const CommonEigenvectorError& e) {
        r["result"] = {{"refused", true}, {"reason", e.what()}, {"common_eigenvector", vector_to_json(e.vector)}};
        throw ComputationFailure(e.what(), r);
      }
      return r;
    };
  });

  // sep-max
  auto* sepmax = app.add_subcommand("sep-max", "maximum of ⟨H⟩ over product states");
  std::string op_path, dims_str;
  int restarts = 32;
  sepmax->add_option("--op", op_path, "operator JSON")->required()->check(CLI::ExistingFile);
  sepmax->add_option("--dims", dims_str, "subsystem dimensions, e.g. 2,3")->required();
  sepmax->add_option("--restarts", restarts, "see-saw restarts")->check(CLI::PositiveNumber);
  sepmax->add_option("--out", out_path, "report JSON");
  sepmax->callback([&] {
    job = [&] {
      auto h = op_from_json(read_json_file(op_path));
      DimensionSpec dims(parse_int_list(dims_str));
      dims.check(h.dim());
      SeesawOptions so;
      so.restarts = restarts;
      so.seed = ctx.seed;
      so.threads = resolve_threads(ctx.threads);
      auto b = seesaw_product_max(h, dims, so);
      Json factors = Json::array();
      for (const auto& f : b.witness.factors) factors.push_back(vector_to_json(f));
      Json r = report_envelope("sep-max", ctx.seed, {{"seesaw_tol", so.tol}});
      r["result"] = {{"lower", b.lower}, {"upper", finite_or_null(b.upper)}, {"witness", factors},
                     {"restarts", b.restarts}};
      if (dims.size() == 2 && dims.local_dims[0] == 2) {
        QubitQuditOptions qo;
        qo.seed = ctx.seed;
        qo.threads = so.threads;
        auto q = qubit_qudit_sep_max(h, dims, qo);
        r["result"]["qubit_qudit"] = {{"lower", q.lower}, {"upper", finite_or_null(q.upper)}};
      }
      return r;
    };
  });

  // sep-jnr and ppt-jnr
  auto* sepjnr = app.add_subcommand("sep-jnr", "numerical range over product states");
  auto* pptjnr = app.add_subcommand("ppt-jnr", "numerical range over PPT states");
  for (auto* sub : {sepjnr, pptjnr}) {
    sub->add_option("--ops", ops_path, "operator list JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--dims", dims_str, "subsystem dimensions")->required();
    sub->add_option("--dirs", dirs, "number of support directions")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "body JSON");
  }
  sepjnr->callback([&] {
    job = [&] {
      auto ops = ops_from_json(read_json_file(ops_path));
      DimensionSpec dims(parse_int_list(dims_str));
      dims.check(ops.front().dim());
      const int k = static_cast<int>(ops.size());
      SeesawOptions so;
      so.seed = ctx.seed;
      so.threads = resolve_threads(ctx.threads);
      QubitQuditOptions qo;
      qo.seed = ctx.seed;
      qo.threads = so.threads;
      auto range = sep_numerical_range(ops, dims, sphere_directions(k, dirs, ctx.seed), so, qo);
      Json r = report_envelope("sep-jnr", ctx.seed, {{"seesaw_tol", so.tol}});
      r["result"] = body_to_json(range.body);
      r["result"]["rigorous_outer"] = range.rigorous_outer;
      return r;
    };
  });
  pptjnr->callback([&] {
    job = [&] {
      auto ops = ops_from_json(read_json_file(ops_path));
      DimensionSpec dims(parse_int_list(dims_str));
      dims.check(ops.front().dim());
      const int k = static_cast<int>(ops.size());
      PptOptions po;
      auto body = ppt_numerical_range(ops, dims, sphere_directions(k, dirs, ctx.seed), po, resolve_threads(ctx.threads));
      Json r = report_envelope("ppt-jnr", ctx.seed, {{"ppt_tol", po.tol}, {"dykstra_tol", po.dykstra_tol}});
      r["result"] = body_to_json(body);
      return r;
    };
  });

  // uncertainty
  auto* unc = app.add_subcommand("uncertainty", "tight bound on Δ²X + Δ²Y");
  std::string table_j;
  double sector_tol = 1e-2;
  unc->add_option("--ops", ops_path, "pair of operators JSON")->check(CLI::ExistingFile);
  unc->add_option("--table-j", table_j, "use J_X, J_Y of spin J (e.g. 1 or 3/2)");
  unc->add_option("--sector-tol", sector_tol, "sector partition tolerance δ")->check(CLI::PositiveNumber);
  unc->add_option("--out", out_path, "report JSON");
  unc->callback([&] {
    job = [&] {
      HermitianOperator x, y;
      if (!table_j.empty()) {
        auto s = spin_operators(parse_twice(table_j));
        x = s.jx;
        y = s.jy;
      } else if (!ops_path.empty()) {
        auto ops = ops_from_json(read_json_file(ops_path));
        if (ops.size() != 2) throw InputError("uncertainty needs exactly two operators");
        x = ops[0];
        y = ops[1];
      } else {
        throw InputError("give --ops or --table-j");
      }
      MinSumOptions mo;
      mo.threads = resolve_threads(ctx.threads);
      auto b = min_sum_variances(x, y, mo);
      auto sb = sector_sum_bound(x, y, default_partition(x, sector_tol), default_partition(y, sector_tol), mo.threads);
      Json r = report_envelope("uncertainty", ctx.seed, {{"sector_tol", sector_tol}, {"grid", mo.grid}});
      r["result"] = {{"value", b.value}, {"x", b.x}, {"y", b.y}, {"delta", sb.delta},
                     {"sector_bound", sb.c}, {"certificate", vector_to_json(b.certificate)}};
      return r;
    };
  });

  // gap
  auto* gap = app.add_subcommand("gap", "spectral gap upper bound from ground-state curves");
  std::string model = "xy", boundary = "periodic";
  int n_sites = 6, steps = 41, bisection = 40;
  double gamma = 0, lambda_max = 2;
  gap->add_option("--model", model, "chain model")->check(CLI::IsMember({"xy"}));
  gap->add_option("--n", n_sites, "number of sites")->check(CLI::Range(2, kMaxChainSites));
  gap->add_option("--gamma", gamma, "anisotropy γ");
  gap->add_option("--lambda-max", lambda_max, "largest λ of the grid")->check(CLI::PositiveNumber);
  gap->add_option("--steps", steps, "grid points")->check(CLI::Range(2, 100000));
  gap->add_option("--bisection", bisection, "bisection steps")->check(CLI::Range(1, 200));
  gap->add_option("--boundary", boundary, "periodic or open")->check(CLI::IsMember({"periodic", "open"}));
  gap->add_option("--csv", csv_path, "CSV of (λ, E0, ⟨H⟩, ⟨V⟩)");
  gap->add_option("--out", out_path, "report JSON");
  gap->callback([&] {
    job = [&] {
      ChainOptions co;
      co.boundary = boundary == "open" ? Boundary::open : Boundary::periodic;
      auto hs = build_chain_sparse(xy_spec(n_sites, gamma, co));
      auto vs = build_chain_sparse(witness_v_spec(n_sites, co));
      std::vector<double> grid(steps);
      for (int i = 0; i < steps; ++i) grid[i] = lambda_max * i / (steps - 1);
      CurveOptions cu;
      cu.threads = resolve_threads(ctx.threads);
      cu.seed = ctx.seed;
      auto curve = ground_curve(hs, vs, grid, cu);
      const double tg = true_gap(hs, ctx.seed);
      auto rep = gap_upper_bound(curve, bisection, tg);
      if (!csv_path.empty()) {
        std::string csv = csv_line({"lambda", "e0", "h", "v"});
        for (const auto& s : curve.samples)
          csv += csv_line({format_double(s.lambda), format_double(s.e0), format_double(s.h), format_double(s.v)});
        write_text_file(csv_path, csv);
      }
      Json r = report_envelope("gap", ctx.seed, {{"bisection_steps", bisection}, {"lanczos_tol", 1e-11}});
      r["result"] = {{"model", model},   {"n", n_sites},
                     {"gamma", gamma},   {"boundary", boundary},
                     {"plateau", rep.plateau}, {"message", rep.message},
                     {"epsilon", rep.epsilon}, {"lambda_star", rep.lambda_star},
                     {"degenerate_ground", rep.degenerate_ground}, {"true_gap", tg},
                     {"consistent", rep.consistent}};
      if (!rep.plateau) throw ComputationFailure(rep.message, r);
      return r;
    };
  });

  // interconvert
  auto* ic = app.add_subcommand("interconvert", "U(1)-covariant conversion of ladder states");
  std::string psi_path, phi_path;
  bool exact = false;
  int aux_d = -1, embedding = 0;
  ic->add_option("--psi", psi_path, "source ladder state JSON")->required()->check(CLI::ExistingFile);
  ic->add_option("--phi", phi_path, "target ladder state JSON")->required()->check(CLI::ExistingFile);
  ic->add_flag("--exact", exact, "rational arithmetic only");
  ic->add_option("--aux-d", aux_d, "also test reachability with a (2d+1)-level auxiliary")->check(CLI::NonNegativeNumber);
  ic->add_option("--embedding", embedding, "initial cyclic embedding size")->check(CLI::NonNegativeNumber);
  ic->add_option("--out", out_path, "report JSON");
  ic->callback([&] {
    job = [&] {
      Json jp = read_json_file(psi_path), jq = read_json_file(phi_path);
      auto psi = ladder_from_json(jp), phi = ladder_from_json(jq);
      U1Options uo;
      uo.mode = exact ? ArithmeticMode::exact : ArithmeticMode::automatic;
      uo.embedding_dim = embedding;
      auto rp = ladder_probs_from_json(jp), rq = ladder_probs_from_json(jq);
      auto rep = rp && rq ? u1_convertible(*rp, *rq, uo) : u1_convertible(psi, phi, uo);
      Json r = report_envelope("interconvert", ctx.seed, {{"cond_tol", 1e-10}, {"rational_tol", 1e-14}});
      Json res = {{"convertible", rep.convertible},
                  {"exact", rep.exact},
                  {"embedding_dim", rep.embedding_dim},
                  {"singular_retries", rep.singular_retries},
                  {"message", rep.message}};
      if (rep.w) res["w"] = prob_to_json(*rep.w);
      if (rep.w_exact) res["w_exact"] = rational_to_json(*rep.w_exact);
      if (rep.convertible && rep.w) {
        auto p = rp ? rp->to_double() : psi.probabilities();
        auto q = rq ? rq->to_double() : phi.probabilities();
        auto ch = build_u1_kraus(p, q, *rep.w);
        Json ks = Json::array();
        for (std::size_t i = 0; i < ch.shifts.size(); ++i)
          ks.push_back({{"shift", ch.shifts[i]}, {"matrix", matrix_to_json(ch.channel.kraus()[i])}});
        res["kraus"] = {{"offset", ch.offset}, {"operators", ks}};
      }
      if (aux_d >= 0) {
        auto aux = aux_reachable(psi.probabilities(), phi.probabilities(), aux_d);
        res["aux"] = {{"d", aux_d}, {"reachable", aux.has_value()}};
        if (aux) {
          res["aux"]["w"] = vector_to_json(aux->w);
          res["aux"]["residual"] = aux->residual;
        }
      }
      r["result"] = res;
      if (rep.singular_exhausted) throw ComputationFailure(rep.message, r);
      return r;
    };
  });

  // wigner
  auto* wig = app.add_subcommand("wigner", "discrete Wigner function of a state");
  std::string state_path;
  wig->add_option("--state", state_path, "state JSON")->required()->check(CLI::ExistingFile);
  wig->add_option("--dims", dims_str, "odd primes, e.g. 3,5 (or a square-free odd d)")->required();
  wig->add_option("--out", csv_path, "CSV table x,q,W");
  wig->callback([&] {
    job = [&] {
      auto dims = wh_dims_from(dims_str);
      auto w = wigner_of(state_from_json(read_json_file(state_path)), dims);
      if (!csv_path.empty()) {
        std::string csv = csv_line({"x", "q", "W"});
        for (int x = 0; x < w.dim(); ++x)
          for (int q = 0; q < w.dim(); ++q)
            csv += csv_line({std::to_string(x), std::to_string(q), format_double(w.values(x, q))});
        write_text_file(csv_path, csv);
      }
      Json r = report_envelope("wigner", ctx.seed, {{"hermiticity", 1e-12}});
      r["result"] = {{"dims", dims}, {"table", table_to_json(w)}, {"negativity", w.values.cwiseMin(0.0).sum()}};
      return r;
    };
  });

  // wh-convert
  auto* whc = app.add_subcommand("wh-convert", "Weyl-Heisenberg covariant conversion");
  std::string rho_path, sigma_path;
  whc->add_option("--rho", rho_path, "source state JSON")->required()->check(CLI::ExistingFile);
  whc->add_option("--sigma", sigma_path, "target state JSON")->required()->check(CLI::ExistingFile);
  whc->add_option("--dims", dims_str, "odd primes")->required();
  whc->add_option("--out", out_path, "report JSON");
  whc->callback([&] {
    job = [&] {
      auto dims = wh_dims_from(dims_str);
      auto k = wh_convertible(state_from_json(read_json_file(rho_path)), state_from_json(read_json_file(sigma_path)), dims);
      Json r = report_envelope("wh-convert", ctx.seed, {{"fourier_zero", 1e-10}, {"kernel_negativity", 1e-9}});
      r["result"] = {{"convertible", k.has_value()}};
      if (k) r["result"]["kernel"] = table_to_json(*k);
      return r;
    };
  });

  // su2
  auto* su2 = app.add_subcommand("su2", "spin states: combine, chi, convert, marvian");
  std::string action, a_path, b_path, v_str;
  int samples = 200;
  su2->add_option("action", action, "combine | chi | convert | marvian")
      ->required()
      ->check(CLI::IsMember({"combine", "chi", "convert", "marvian"}));
  su2->add_option("--a", a_path, "first spin state JSON")->required()->check(CLI::ExistingFile);
  su2->add_option("--b", b_path, "second spin state JSON")->check(CLI::ExistingFile);
  su2->add_option("--samples", samples, "group samples")->check(CLI::PositiveNumber);
  su2->add_option("--v", v_str, "group element v1,v2,v3 for chi (U = exp(i v·J))");
  su2->add_option("--out", out_path, "report JSON");
  su2->callback([&] {
    job = [&] {
      auto a = spin_from_json(read_json_file(a_path));
      auto need_b = [&] {
        if (b_path.empty()) throw InputError("su2 " + action + " needs --b");
        return spin_from_json(read_json_file(b_path));
      };
      Json r = report_envelope("su2 " + action, ctx.seed, {{"chi_zero", 1e-8}, {"psd_rel", 1e-6}});
      if (action == "combine") {
        r["result"] = {{"state", spin_to_json(spin_combine(a, need_b()))}};
      } else if (action == "convert") {
        auto psi = jz_convert(a, need_b());
        r["result"] = {{"state", spin_to_json(psi)}};
      } else if (action == "chi") {
        Json values = Json::array();
        std::vector<GroupElement> gs;
        if (!v_str.empty()) {
          std::vector<double> v;
          std::stringstream ss(v_str);
          std::string item;
          while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
          if (v.size() != 3) throw InputError("--v needs three components");
          gs.push_back({Eigen::Vector3d(v[0], v[1], v[2])});
        } else {
          Rng rng(ctx.seed);
          for (int i = 0; i < samples; ++i) gs.push_back(random_group_element(rng));
        }
        for (const auto& g : gs) {
          cplx c = characteristic_function(a, g);
          values.push_back({{"v", vector_to_json(RVec(g.v))}, {"chi", Json::array({c.real(), c.imag()})}});
        }
        r["result"] = {{"values", values}};
      } else {
        auto v = marvian_necessary_test(a, need_b(), samples, ctx.seed);
        r["result"] = {{"verdict", v.impossible ? "impossible" : "consistent"},
                       {"lambda_min", v.lambda_min},
                       {"lambda_max", v.lambda_max},
                       {"samples", v.samples},
                       {"kept", v.kept}};
        if (v.impossible) r["result"]["certificate"] = vector_to_json(v.certificate);
      }
      return r;
    };
  });

  // distinguish
  auto* dist = app.add_subcommand("distinguish", "one-shot distinguishability of two unitaries");
  std::string u_path, vv_path;
  dist->add_option("--u", u_path, "unitary JSON matrix")->required()->check(CLI::ExistingFile);
  dist->add_option("--v", vv_path, "unitary JSON matrix")->required()->check(CLI::ExistingFile);
  dist->add_option("--out", out_path, "report JSON");
  dist->callback([&] {
    job = [&] {
      CMat u = matrix_from_json(read_json_file(u_path)), v = matrix_from_json(read_json_file(vv_path));
      auto d = one_shot_distinguishable(u, v);
      Json r = report_envelope("distinguish", ctx.seed, {{"unitarity", 1e-9}});
      r["result"] = {{"distinguishable", d.distinguishable}, {"overlap", d.overlap}};
      if (d.distinguishable)
        r["result"]["witness"] = vector_to_json(d.witness);
      else
        r["result"]["separating"] = vector_to_json(d.separating);
      return r;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    emit(job(), out_path);
    return 0;
  } catch (const ComputationFailure& e) {
    std::cerr << "qgeom: " << e.what() << "\n";
    emit(e.report, out_path);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qgeom: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "qgeom: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qgeom: " << e.what() << "\n";
    return 1;
  }
}
