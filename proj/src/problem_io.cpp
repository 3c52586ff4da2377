#include "epicalc/problem_io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "epicalc/polynomial.hpp"
#include "epicalc/psd_cone.hpp"

namespace epicalc {

using nlohmann::json;

namespace {

json ext_to_json(const ExtReal& e) {
  if (e.is_pos_inf()) return "+inf";
  if (e.is_neg_inf()) return "-inf";
  return e.value();
}

Vec parse_vec(const json& j, const char* name) {
  if (!j.is_array()) throw ProblemError(std::string(name) + ": expected an array of numbers");
  Vec v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ProblemError(std::string(name) + ": expected numeric entries");
    v.push_back(e.get<double>());
  }
  return v;
}

// Matrices arrive as arrays of rows; stored flattened row-major. Symmetry is
// an input requirement, validated here so violations surface as exit code 2.
Vec parse_matrix_flat(const json& j, int n, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ProblemError(std::string(name) + ": expected a " + std::to_string(n) + "-row matrix");
  Vec flat;
  for (const auto& row : j) {
    Vec r = parse_vec(row, name);
    if (static_cast<int>(r.size()) != n)
      throw ProblemError(std::string(name) + ": ragged matrix row");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (std::abs(flat[i * n + k] - flat[k * n + i]) >
          1e-9 * (1.0 + std::abs(flat[i * n + k])))
        throw ProblemError(std::string(name) + ": matrix argument is not symmetric");
  return flat;
}

Mat unflatten(const Vec& flat, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = flat[i * n + j];
  // Symmetrize tiny asymmetries from text round-trips.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = 0.5 * (m(i, j) + m(j, i));
      if (std::abs(m(i, j) - m(j, i)) > 1e-9 * (1.0 + std::abs(v)))
        throw ProblemError("matrix argument is not symmetric");
      m(i, j) = m(j, i) = v;
    }
  return m;
}

Polynomial parse_polynomial(const json& j, int dim, const char* name) {
  Polynomial p;
  p.dim = dim;
  if (!j.is_array()) throw ProblemError(std::string(name) + ": expected an array of monomials");
  for (const auto& t : j) {
    Monomial m;
    if (!t.contains("coeff") || !t.contains("powers"))
      throw ProblemError(std::string(name) + ": monomial needs coeff and powers");
    m.coeff = t.at("coeff").get<double>();
    for (const auto& e : t.at("powers")) m.powers.push_back(e.get<int>());
    p.terms.push_back(std::move(m));
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ProblemError(std::string(name) + ": " + e.what());
  }
  return p;
}

GroupStructure parse_partition(const json& inst) {
  GroupStructure gs;
  gs.q = inst.value("q", 2.0);
  if (!inst.contains("partition")) throw ProblemError("instance: partition required");
  for (const auto& block : inst.at("partition")) {
    std::vector<int> b;
    for (const auto& e : block) b.push_back(e.get<int>());
    gs.groups.push_back(std::move(b));
  }
  try {
    gs.validate();
  } catch (const std::exception& e) {
    throw ProblemError(std::string("instance partition: ") + e.what());
  }
  return gs;
}

SmoothPiece poly_piece(const Polynomial& p) {
  SmoothPiece sp;
  sp.value = [p](const Vec& y) { return p.value(y); };
  sp.gradient = [p](const Vec& y) { return p.gradient(y); };
  sp.hessian = [p](const Vec& y) { return p.hessian(y); };
  return sp;
}

Polyhedron parse_region(const json& j, int dim) {
  Polyhedron r(dim);
  if (j.contains("ineq"))
    for (const auto& row : j.at("ineq")) {
      Vec full = parse_vec(row, "region.ineq");
      if (static_cast<int>(full.size()) != dim + 1)
        throw ProblemError("region.ineq: row must hold dim normals plus the offset");
      r.add_ineq(Vec(full.begin(), full.end() - 1), full.back());
    }
  if (j.contains("eq"))
    for (const auto& row : j.at("eq")) {
      Vec full = parse_vec(row, "region.eq");
      if (static_cast<int>(full.size()) != dim + 1)
        throw ProblemError("region.eq: row must hold dim normals plus the offset");
      r.add_eq(Vec(full.begin(), full.end() - 1), full.back());
    }
  return r;
}

PwtdFunction theta_from_json(const json& j) {
  std::string kind = j.value("kind", "");
  int m = j.value("m", 1);
  if (kind == "scad_sum")
    return separable_sum(scad_scalar({j.value("lambda", 1.0), j.value("a", 3.0)}), m);
  if (kind == "mcp_sum")
    return separable_sum(mcp_scalar({j.value("lambda", 1.0), j.value("b", 2.0)}), m);
  if (kind == "orthant") return orthant_indicator(m);
  throw ProblemError("theta.kind must be one of scad_sum | mcp_sum | orthant");
}

InnerMap smooth_from_json(const json& j) {
  if (j.contains("kind") && j.at("kind") != "smooth_poly")
    throw ProblemError("smooth map: kind must be smooth_poly when given");
  if (!j.contains("dim_in") || !j.contains("components"))
    throw ProblemError("smooth map: dim_in and components required");
  const int n = j.at("dim_in").get<int>();
  std::vector<Polynomial> comps;
  for (const auto& c : j.at("components")) comps.push_back(parse_polynomial(c, n, "smooth component"));
  const int m = static_cast<int>(comps.size());
  if (m == 0) throw ProblemError("smooth map: at least one component required");

  auto value = [comps, m](const Vec& x) {
    Vec y(m);
    for (int i = 0; i < m; ++i) y[i] = comps[i].value(x);
    return y;
  };
  auto jac = [comps, m, n](const Vec& x) {
    Mat jm(m, n);
    for (int i = 0; i < m; ++i) {
      Vec g = comps[i].gradient(x);
      for (int c = 0; c < n; ++c) jm(i, c) = g[c];
    }
    return jm;
  };
  auto hess = [comps, m](const Vec& x) {
    std::vector<Mat> hs;
    for (int i = 0; i < m; ++i) hs.push_back(comps[i].hessian(x));
    return hs;
  };
  Rng rng(12345);
  std::vector<Vec> probes;
  for (int t = 0; t < 3; ++t) probes.push_back(rng.gaussian_vec(n));
  return smooth_map(n, m, value, jac, hess, probes);
}

Instance build_instance(const json& inst) {
  Instance out;
  out.kind = inst.value("kind", "");
  const std::string& kind = out.kind;

  if (kind == "scad") {
    out.family = Instance::Family::Pwtd;
    out.psi = scad_scalar({inst.value("lambda", 1.0), inst.value("a", 3.0)});
  } else if (kind == "mcp") {
    out.family = Instance::Family::Pwtd;
    out.psi = mcp_scalar({inst.value("lambda", 1.0), inst.value("b", 2.0)});
  } else if (kind == "group_scad" || kind == "group_mcp") {
    out.family = Instance::Family::Composite;
    GroupStructure gs = parse_partition(inst);
    PwtdFunction rho = kind == "group_scad"
                           ? scad_scalar({inst.value("lambda", 1.0), inst.value("a", 3.0)})
                           : mcp_scalar({inst.value("lambda", 1.0), inst.value("b", 2.0)});
    out.cf = group_penalty(rho, gs).cf;
  } else if (kind == "qcone") {
    out.family = Instance::Family::Composite;
    out.cf = qcone_indicator(inst.value("n", 3), inst.value("q", 2.0));
  } else if (kind == "cone_product") {
    out.family = Instance::Family::Composite;
    std::vector<ConeBlock> blocks;
    if (!inst.contains("blocks")) throw ProblemError("cone_product: blocks required");
    for (const auto& b : inst.at("blocks"))
      blocks.push_back({b.value("n", 3), b.value("q", 2.0)});
    out.cf = cone_product(blocks);
  } else if (kind == "smooth_poly_composite") {
    out.family = Instance::Family::Composite;
    if (!inst.contains("theta") || !inst.contains("f"))
      throw ProblemError("smooth_poly_composite: theta and f required");
    try {
      out.cf = smooth_composite(theta_from_json(inst.at("theta")), smooth_from_json(inst.at("f")));
    } catch (const ProblemError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProblemError(std::string("smooth_poly_composite: ") + e.what());
    }
  } else if (kind == "psd_cone") {
    out.family = Instance::Family::Psd;
    out.psd_n = inst.value("n", 3);
    if (out.psd_n < 1 || out.psd_n > 64) throw ProblemError("psd_cone: n out of range");
  } else if (kind == "custom_pwtd") {
    out.family = Instance::Family::Pwtd;
    const int dim = inst.value("dim", 0);
    if (dim < 1) throw ProblemError("custom_pwtd: dim required");
    if (!inst.contains("pieces")) throw ProblemError("custom_pwtd: pieces required");
    std::vector<PwtdPiece> pieces;
    for (const auto& pj : inst.at("pieces")) {
      PwtdPiece piece;
      piece.region = parse_region(pj.value("region", json::object()), dim);
      piece.fn = poly_piece(parse_polynomial(pj.value("poly", json::array()), dim, "piece poly"));
      pieces.push_back(std::move(piece));
    }
    out.psi = PwtdFunction(dim, std::move(pieces));
    out.psi.regular_flag = inst.value("regular", false);
    try {
      validate_pwtd(out.psi);
    } catch (const std::exception& e) {
      throw ProblemError(std::string("custom_pwtd: ") + e.what());
    }
  } else {
    throw ProblemError("unknown instance kind: '" + kind + "'");
  }
  return out;
}

int point_dim(const Instance& inst) {
  switch (inst.family) {
    case Instance::Family::Pwtd: return inst.psi.dim();
    case Instance::Family::Composite: return inst.cf.inner.dim_in;
    case Instance::Family::Psd: return inst.psd_n * inst.psd_n;
  }
  return 0;
}

Query parse_query(const json& qj, const Instance& inst, int index) {
  Query q;
  auto fail = [index](const std::string& msg) {
    throw ProblemError("query " + std::to_string(index) + ": " + msg);
  };
  if (!qj.contains("op")) fail("op required");
  q.op = qj.at("op").get<std::string>();
  q.target = qj.value("target", "");

  const bool psd = inst.family == Instance::Family::Psd;
  auto grab = [&](const char* name, Vec& dst, bool& flag) {
    if (!qj.contains(name)) return;
    dst = psd ? parse_matrix_flat(qj.at(name), inst.psd_n, name) : parse_vec(qj.at(name), name);
    if (static_cast<int>(dst.size()) != point_dim(inst))
      fail(std::string(name) + ": dimension mismatch (expected " + std::to_string(point_dim(inst)) + ")");
    flag = true;
  };
  bool has_x = false;
  grab("x", q.x, has_x);
  grab("v", q.v, q.has_v);
  grab("w", q.w, q.has_w);
  grab("z", q.z, q.has_z);
  if (!has_x) fail("x required");

  auto need = [&](bool ok, const char* what) {
    if (!ok) fail(std::string(what) + " required for op '" + q.op + "'");
  };
  if (q.op == "eval") {
  } else if (q.op == "subderivative") {
    need(q.has_w, "w");
  } else if (q.op == "second_subderivative") {
    need(q.has_v && q.has_w, "v and w");
  } else if (q.op == "parabolic") {
    need(q.has_w && q.has_z, "w and z");
  } else if (q.op == "check_regularity") {
    need(q.has_v && q.has_w, "v and w");
    if (psd) fail("check_regularity unsupported for psd_cone (use second_subderivative)");
  } else if (q.op == "oracle_compare") {
    if (q.target != "subderivative" && q.target != "second_subderivative" && q.target != "parabolic")
      fail("oracle_compare target must be subderivative | second_subderivative | parabolic");
    if (q.target == "subderivative") need(q.has_w, "w");
    if (q.target == "second_subderivative") need(q.has_v && q.has_w, "v and w");
    if (q.target == "parabolic") need(q.has_w && q.has_z, "w and z");
    if (psd && q.target != "second_subderivative")
      fail("psd_cone oracle_compare supports only second_subderivative");
  } else {
    fail("unknown op '" + q.op + "'");
  }
  if (psd && (q.op == "subderivative" || q.op == "parabolic"))
    fail("op unsupported for psd_cone");
  return q;
}

struct QueryOutcome {
  json record;
  bool has_verdict = false;
  bool pass = true;
};

// Closed-form value of the op named `which` (used by direct ops and compare).
ExtReal closed_value(const Instance& inst, const std::string& which, const Query& q,
                     const PwtdTol& tol) {
  if (inst.family == Instance::Family::Pwtd) {
    if (which == "eval") return eval(inst.psi, q.x, tol);
    if (which == "subderivative") return subderivative(inst.psi, q.x, q.w, tol);
    if (which == "second_subderivative")
      return second_subderivative(inst.psi, q.x, q.v, q.w, false, tol);
    if (which == "parabolic") return parabolic_subderivative(inst.psi, q.x, q.w, q.z, tol);
  } else if (inst.family == Instance::Family::Composite) {
    if (which == "eval") return f_eval(inst.cf, q.x, tol);
    if (which == "subderivative") return f_subderivative(inst.cf, q.x, q.w, tol);
    if (which == "second_subderivative")
      return f_second_subderivative(inst.cf, q.x, q.v, q.w, false, tol);
    if (which == "parabolic") return f_parabolic_subderivative(inst.cf, q.x, q.w, q.z, tol);
  } else {
    const int n = inst.psd_n;
    if (which == "eval") {
      EigResult e = eig_symmetric(unflatten(q.x, n));
      return e.eigenvalues.back() <= 1e-9 ? ExtReal(0.0) : ExtReal::pos_inf();
    }
    if (which == "second_subderivative")
      return psd_second_subderivative(unflatten(q.x, n), unflatten(q.v, n), unflatten(q.w, n));
  }
  throw ProblemError("unsupported op for this instance family: " + which);
}

OracleEstimate run_oracle(const Instance& inst, const std::string& which, const Query& q,
                          const Schedule& sched, const ExtReal& closed_sub) {
  Evaluatable h;
  Vec x = q.x, v = q.v, w = q.w, z = q.z;
  if (inst.family == Instance::Family::Pwtd) {
    PwtdFunction psi = inst.psi;
    h = [psi](const Vec& y) { return eval(psi, y); };
  } else if (inst.family == Instance::Family::Composite) {
    // User-supplied base points carry scale-level evaluation noise; the
    // looser membership slack keeps them inside their own domain.
    h = make_f_evaluatable(inst.cf, 1e-13);
  } else {
    const int n = inst.psd_n;
    h = make_psd_indicator_evaluatable(n);
    x = sym_to_vec(unflatten(q.x, n));
    if (q.has_v) v = sym_to_vec(unflatten(q.v, n));
    if (q.has_w) w = sym_to_vec(unflatten(q.w, n));
  }
  if (which == "subderivative") return estimate_subderivative(h, x, w, sched);
  if (which == "second_subderivative") return estimate_second_subderivative(h, x, v, w, sched);
  if (which == "parabolic") return estimate_parabolic_subderivative(h, x, w, closed_sub, z, sched);
  throw ProblemError("no estimator for op: " + which);
}

json oracle_to_json(const OracleEstimate& est) {
  json j;
  j["value"] = ext_to_json(est.value);
  j["divergence"] = est.divergence_flag;
  j["trend_negative"] = est.trend_negative;
  if (std::isfinite(est.trend_slope)) j["slope"] = est.trend_slope;
  return j;
}

// PASS rules: finite values agree within the per-order tolerance; an infinite
// closed form must coincide with the estimator's divergence flag.
bool compare_verdict(const ExtReal& closed, const OracleEstimate& est, const std::string& which,
                     const ProblemSpec& spec, double* diff_out) {
  *diff_out = std::numeric_limits<double>::quiet_NaN();
  if (closed.is_pos_inf()) return est.divergence_flag || est.value.is_pos_inf();
  if (est.trend_negative || !est.value.is_finite()) return false;
  double diff = std::abs(closed.value() - est.value.value());
  *diff_out = diff;
  double tol = which == "subderivative"
                   ? spec.tol_first
                   : std::max(spec.tol_second, 1e-2 * std::abs(closed.value()));
  return diff <= tol;
}

QueryOutcome execute_query(const ProblemSpec& spec, const RunOptions& opts, int index,
                           const Query& q) {
  const Instance& inst = spec.instance;
  Schedule sched = opts.schedule_override.value_or(spec.schedule);
  PwtdTol tol = spec.op_tol;
  if (opts.eps_act_override) tol.poly.eps_act = *opts.eps_act_override;
  if (opts.eps_dir_override) tol.poly.eps_dir = *opts.eps_dir_override;
  QueryOutcome out;
  out.record["query"] = index;
  out.record["op"] = q.op;

  auto t0 = std::chrono::steady_clock::now();
  try {
    if (q.op == "check_regularity") {
      out.has_verdict = true;
      if (inst.family == Instance::Family::Composite) {
        SamplerConfig cfg;
        cfg.seed = sched.seed;
        cfg.pass_tol = spec.reg_pass_tol;
        RegularityReport rep = check_parabolic_regularity(inst.cf, q.x, q.v, q.w, cfg, tol);
        out.record["lhs"] = ext_to_json(rep.lhs);
        out.record["rhs"] = ext_to_json(rep.rhs);
        out.record["upper"] = ext_to_json(rep.upper);
        out.record["lower"] = ext_to_json(rep.lower);
        out.record["xi_bar"] = rep.xi_bar;
        out.pass = rep.pass;
      } else {
        RegularityWitness wit = pwtd_parabolic_regularity_witness(inst.psi, q.x, q.v, q.w, tol);
        out.record["lhs"] = ext_to_json(wit.lhs);
        out.record["rhs"] = ext_to_json(wit.rhs);
        out.pass = ext_close(wit.lhs, wit.rhs, spec.reg_pass_tol);
      }
      out.record["verdict"] = out.pass ? "PASS" : "FAIL";
    } else if (q.op == "oracle_compare") {
      out.has_verdict = true;
      ExtReal closed = closed_value(inst, q.target, q, tol);
      ExtReal closed_sub =
          q.target == "parabolic" ? closed_value(inst, "subderivative", q, tol) : ExtReal(0.0);
      OracleEstimate est = run_oracle(inst, q.target, q, sched, closed_sub);
      double diff;
      out.pass = compare_verdict(closed, est, q.target, spec, &diff);
      out.record["target"] = q.target;
      out.record["closed"] = ext_to_json(closed);
      out.record["oracle"] = oracle_to_json(est);
      if (std::isfinite(diff)) out.record["diff"] = diff;
      out.record["verdict"] = out.pass ? "PASS" : "FAIL";
    } else {
      ExtReal value = closed_value(inst, q.op, q, tol);
      out.record["value"] = ext_to_json(value);
      if (opts.with_oracle && q.op != "eval") {
        out.has_verdict = true;
        ExtReal closed_sub =
            q.op == "parabolic" ? closed_value(inst, "subderivative", q, tol) : ExtReal(0.0);
        OracleEstimate est = run_oracle(inst, q.op, q, sched, closed_sub);
        double diff;
        out.pass = compare_verdict(value, est, q.op, spec, &diff);
        out.record["oracle"] = oracle_to_json(est);
        if (std::isfinite(diff)) out.record["diff"] = diff;
        out.record["verdict"] = out.pass ? "PASS" : "FAIL";
      }
    }
  } catch (const std::exception& e) {
    out.record["error"] = e.what();
    out.record["verdict"] = "FAIL";
    out.has_verdict = true;
    out.pass = false;
  }
  auto t1 = std::chrono::steady_clock::now();
  out.record["time_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return out;
}

}  // namespace

ProblemSpec parse_problem_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProblemError(std::string("problem file parse error: ") + e.what());
  }
  if (!root.contains("instance")) throw ProblemError("problem file: instance required");

  ProblemSpec spec;
  try {
    spec.instance = build_instance(root.at("instance"));
  } catch (const ProblemError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProblemError(std::string("instance: ") + e.what());
  }

  if (root.contains("schedule")) {
    const auto& s = root.at("schedule");
    spec.schedule.tau0 = s.value("tau0", spec.schedule.tau0);
    spec.schedule.ratio = s.value("ratio", spec.schedule.ratio);
    spec.schedule.levels = s.value("levels", spec.schedule.levels);
    spec.schedule.samples_per_level = s.value("samples", spec.schedule.samples_per_level);
    spec.schedule.radius_factor = s.value("radius_factor", spec.schedule.radius_factor);
    spec.schedule.seed = s.value("seed", spec.schedule.seed);
    try {
      spec.schedule.validate();
    } catch (const std::exception& e) {
      throw ProblemError(std::string("schedule: ") + e.what());
    }
  }
  if (root.contains("tolerances")) {
    const auto& t = root.at("tolerances");
    spec.tol_first = t.value("first", spec.tol_first);
    spec.tol_second = t.value("second", spec.tol_second);
    spec.reg_pass_tol = t.value("regularity", spec.reg_pass_tol);
    spec.op_tol.poly.eps_act = t.value("eps_act", spec.op_tol.poly.eps_act);
    spec.op_tol.poly.eps_dir = t.value("eps_dir", spec.op_tol.poly.eps_dir);
  }

  if (!root.contains("queries") || !root.at("queries").is_array() || root.at("queries").empty())
    throw ProblemError("problem file: nonempty queries array required");
  int idx = 0;
  for (const auto& qj : root.at("queries")) spec.queries.push_back(parse_query(qj, spec.instance, idx++));
  return spec;
}

ProblemSpec parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

int run_problem(const ProblemSpec& spec, const RunOptions& opts, std::ostream& human) {
  ProblemSpec effective = spec;
  if (opts.tol_override) {
    effective.tol_first = *opts.tol_override;
    effective.tol_second = *opts.tol_override;
  }

  std::ofstream structured;
  if (!opts.out_path.empty()) {
    structured.open(opts.out_path);
    if (!structured) throw ProblemError("cannot open report file: " + opts.out_path);
  }

  int n_verdicts = 0, n_failures = 0;
  for (std::size_t i = 0; i < effective.queries.size(); ++i) {
    QueryOutcome out = execute_query(effective, opts, static_cast<int>(i), effective.queries[i]);
    if (out.has_verdict) {
      ++n_verdicts;
      if (!out.pass) ++n_failures;
    }
    if (structured.is_open()) structured << out.record.dump() << "\n";

    std::ostringstream line;
    line << "[" << i << "] " << std::left << std::setw(22) << effective.queries[i].op;
    if (out.record.contains("value")) line << " value=" << out.record["value"].dump();
    if (out.record.contains("closed")) line << " closed=" << out.record["closed"].dump();
    if (out.record.contains("lhs"))
      line << " lhs=" << out.record["lhs"].dump() << " rhs=" << out.record["rhs"].dump();
    if (out.record.contains("oracle")) line << " oracle=" << out.record["oracle"]["value"].dump();
    if (out.record.contains("diff")) line << " diff=" << out.record["diff"].get<double>();
    if (out.record.contains("error")) line << " error=" << out.record["error"].get<std::string>();
    if (out.record.contains("verdict")) line << " " << out.record["verdict"].get<std::string>();
    human << line.str() << "\n";
  }
  human << effective.queries.size() << " queries, " << n_verdicts << " verdicts, " << n_failures
        << " failures\n";
  return n_failures == 0 ? 0 : 1;
}

}  // namespace epicalc
