// kkt-spectra: command-line front end for the KKT point analyses.
//
// Exit codes: 0 success, 1 usage, 2 input or certification, 3 numeric.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kktspectra/cones.hpp"
#include "kktspectra/criticality.hpp"
#include "kktspectra/errors.hpp"
#include "kktspectra/io.hpp"
#include "kktspectra/perturb.hpp"
#include "kktspectra/sosc.hpp"

namespace {

using kkt::io::Json;

constexpr const char* kSchema = "kkt-spectra/1";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Request {
  std::string command;
  std::string problem_path, point_path, family, example2_a;
  std::string direction_path, geo, csv_path;
  double tol_eig = -1.0;
  double tol_feas = kkt::kCertifiedTol;
  std::uint64_t seed = 42;
  std::string format = "text";
  int grid_points = 181;
  int samples = 64;
  int cond_samples = 2000;
  int jitter_starts = 8;
  bool no_continuation = false;
};

struct Loaded {
  kkt::ProblemData pd;
  kkt::Vec x;
  kkt::SymMat y;
  std::optional<kkt::Family> family;
  Json source;
};

std::vector<double> parse_list(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw UsageError("bad number '" + item + "'");
    } catch (const std::logic_error&) {
      throw UsageError("bad number '" + item + "'");
    }
  }
  return out;
}

Loaded load(const Request& req) {
  const bool has_family = !req.family.empty();
  const bool has_problem = !req.problem_path.empty();
  if (has_family == has_problem) throw UsageError("give exactly one of --family or --problem");
  Loaded out;
  if (has_family) {
    std::optional<kkt::SymMat> a;
    if (!req.example2_a.empty()) {
      const auto v = parse_list(req.example2_a, ',');
      if (v.size() != 3) throw UsageError("--example2-a takes a,b,c");
      kkt::SymMat m(2);
      m.set(0, 0, v[0]);
      m.set(0, 1, v[1]);
      m.set(1, 1, v[2]);
      a = m;
    }
    out.family = kkt::io::builtin_family(req.family, a ? &*a : nullptr);
    out.pd = out.family->base;
    out.x = out.family->xbar;
    out.y = out.family->ybar;
    out.source["family"] = req.family;
    if (a) out.source["example2_a"] = kkt::io::sym_to_json(*a);
  } else {
    if (req.point_path.empty()) throw UsageError("--problem needs --point");
    out.pd = kkt::io::problem_from_json(kkt::io::read_json_file(req.problem_path));
    out.source["problem"] = req.problem_path;
  }
  if (!req.point_path.empty()) {
    const auto pt = kkt::io::point_from_json(kkt::io::read_json_file(req.point_path), out.pd);
    out.x = pt.x;
    out.y = pt.Y;
    out.source["point"] = req.point_path;
  }
  return out;
}

Json index_list(const std::vector<kkt::Index>& v) {
  Json j = Json::array();
  for (auto i : v) j.push_back(i);
  return j;
}

Json cones_section(const Request& req, const Loaded& in) {
  const auto res = kkt::kkt_residual(in.pd, in.x, in.y);
  Json j;
  j["kkt_residual"] = {{"r1", res.r1}, {"r2", res.r2}, {"certified", res.max() <= req.tol_feas}};
  const kkt::SymMat a = kkt::eval_G(in.pd, in.x) + in.y;
  const auto ctx = req.tol_eig > 0.0 ? kkt::ConeContext::from_sum(a, req.tol_eig)
                                     : kkt::ConeContext::from_sum(a);
  j["eigenvalues"] = kkt::io::vec_to_json(ctx.decomp.lambda);
  j["tol_zero"] = ctx.decomp.tol_zero;
  j["partition"] = {{"alpha", index_list(ctx.alpha())},
                    {"beta", index_list(ctx.beta())},
                    {"gamma", index_list(ctx.gamma())}};
  j["strict_complementarity"] = kkt::strict_complementarity(ctx);
  j["normal_cone_polyhedral"] = kkt::is_normal_cone_polyhedral(ctx);
  j["rank_X"] = ctx.alpha().size();
  j["rank_Y"] = ctx.gamma().size();
  return j;
}

kkt::KKTPoint certified_point(const Request& req, const Loaded& in) {
  auto kp = kkt::make_kkt_point(in.pd, in.x, in.y);
  if (kp.residual.max() > req.tol_feas) {
    std::ostringstream os;
    os << "point is not a certified KKT pair (r1 = " << kp.residual.r1 << ", r2 = " << kp.residual.r2
       << ", tolerance " << req.tol_feas << ")";
    throw kkt::InputError(os.str());
  }
  return kp;
}

Json criticality_section(const Request& req, const Loaded& in) {
  const auto kp = certified_point(req, in);
  const auto sys = kkt::build_system(in.pd, kp, req.tol_eig, req.tol_feas);
  kkt::ClassifyOptions opt;
  opt.grid_points = req.grid_points;
  opt.samples = req.samples;
  opt.seed = req.seed;
  const auto v = kkt::classify_multiplier(sys, opt);
  Json j;
  j["verdict"] = kkt::to_string(v.tag);
  j["certificate"] = {{"method", v.certificate.method},
                      {"exhaustive", v.certificate.exhaustive},
                      {"bases", v.certificate.bases},
                      {"branches", v.certificate.branches},
                      {"lps", v.certificate.lps},
                      {"best_infeasibility", v.certificate.best_infeasibility},
                      {"summary", v.certificate.describe()}};
  j["xi"] = v.xi ? kkt::io::vec_to_json(*v.xi) : Json(nullptr);
  j["eta"] = v.eta ? kkt::io::sym_to_json(*v.eta) : Json(nullptr);
  j["witness_residual"] = v.xi ? Json(v.residual) : Json(nullptr);
  const auto xp = kkt::xpart_condition(sys);
  j["xpart_condition"] = {{"holds", xp.holds},
                          {"witness", xp.witness ? kkt::io::vec_to_json(*xp.witness) : Json(nullptr)}};
  if (const auto nlp = kkt::diagonal_reduction(in.pd, kp)) {
    j["diagonal_reduction"] = kkt::to_string(kkt::classify_nlp(*nlp).tag);
  } else {
    j["diagonal_reduction"] = nullptr;
  }
  return j;
}

Json cq_section(const Loaded& in) {
  return {{"rcq", kkt::check_rcq(in.pd, in.x)}, {"srcq", kkt::check_srcq(in.pd, in.x, in.y)}};
}

Json sosc_section(const Request& req, const Loaded& in) {
  const auto kp = certified_point(req, in);
  kkt::SoscOptions opt;
  opt.starts = req.samples;
  opt.seed = req.seed;
  opt.tol_zero = req.tol_eig;
  opt.tol_feas = req.tol_feas;
  const auto r = kkt::check_soscy(in.pd, kp, opt);
  Json j;
  j["verdict"] = kkt::to_string(r.verdict);
  j["min_value"] = r.min_value;  // +inf (trivial cone) serializes as null
  j["trivial_cone"] = std::isinf(r.min_value);
  j["minimizer"] = kkt::io::vec_to_json(r.minimizer);
  j["exact"] = r.exact;
  j["sonc_holds"] = r.sonc_holds;
  j["cone_dim"] = r.cone_dim;
  j["starts"] = r.starts;
  return j;
}

Json closedness_section(const Request& req, const Loaded& in) {
  const auto kp = certified_point(req, in);
  kkt::ClosednessOptions opt;
  opt.samples = req.cond_samples;
  opt.seed = req.seed;
  opt.tol_zero = req.tol_eig;
  opt.tol_feas = req.tol_feas;
  const auto r = kkt::closedness_conditions(in.pd, kp, opt);
  return {{"cond_i", kkt::to_string(r.cond_i)},
          {"cond_i_evidence", r.cond_i_evidence},
          {"cond_ii", kkt::to_string(r.cond_ii)},
          {"cond_ii_max_violation", r.cond_ii_max_violation},
          {"accepted", r.accepted},
          {"rejected", r.rejected}};
}

std::vector<double> parse_geo(const std::string& geo) {
  if (geo.empty()) throw UsageError("perturb needs --geo start:end:count");
  const auto v = parse_list(geo, ':');
  if (v.size() != 3) throw UsageError("--geo takes start:end:count");
  if (v[2] < 1 || v[2] != std::floor(v[2])) throw UsageError("--geo needs a schedule of at least one point");
  if (!(v[0] > 0.0) || !(v[1] > 0.0)) throw UsageError("--geo endpoints must be positive");
  return kkt::geometric_schedule(v[0], v[1], static_cast<int>(v[2]));
}

Json perturb_section(const Request& req, const Loaded& in) {
  const auto schedule = parse_geo(req.geo);
  kkt::Family fam;
  if (in.family) {
    fam = *in.family;
    fam.xbar = in.x;
    fam.ybar = in.y;
  } else {
    if (req.direction_path.empty()) throw UsageError("perturb with --problem needs --direction");
    fam = kkt::io::direction_family(in.pd, {in.x, in.y}, kkt::io::read_json_file(req.direction_path));
  }
  certified_point(req, in);
  kkt::ExperimentOptions opt;
  opt.continuation = !req.no_continuation;
  opt.jitter_starts = req.jitter_starts;
  opt.seed = req.seed;
  const auto rep = kkt::error_bound_experiment(fam, schedule, opt);
  if (rep.points.empty()) throw kkt::NumericError("no schedule point produced a certified root");
  Json j = kkt::io::error_bound_to_json(rep);
  kkt::SoscOptions so;
  so.seed = req.seed;
  so.tol_zero = req.tol_eig;
  so.tol_feas = req.tol_feas;
  const auto xb = kkt::xpart_bound_check(fam.base, fam.xbar, fam.ybar, rep, so);
  j["xpart_bound"] = {{"sosc", kkt::to_string(xb.sosc)},
                      {"verdict", kkt::to_string(xb.trend.verdict)},
                      {"consistent", xb.consistent}};
  if (!req.csv_path.empty()) {
    std::ofstream csv(req.csv_path);
    if (!csv) throw kkt::InputError("cannot write " + req.csv_path);
    csv << kkt::io::error_bound_csv(rep);
  }
  return j;
}

Json run(const Request& req) {
  const Loaded in = load(req);
  Json out;
  out["schema"] = kSchema;
  out["command"] = req.command;
  out["source"] = in.source;
  out["seed"] = req.seed;
  out["n"] = in.pd.n;
  out["p"] = in.pd.p;
  if (req.command == "cones") {
    out["cones"] = cones_section(req, in);
  } else if (req.command == "criticality") {
    out["criticality"] = criticality_section(req, in);
  } else if (req.command == "sosc") {
    out["sosc"] = sosc_section(req, in);
  } else if (req.command == "perturb") {
    out["perturb"] = perturb_section(req, in);
  } else {
    out["cones"] = cones_section(req, in);
    certified_point(req, in);
    out["constraint_qualifications"] = cq_section(in);
    out["criticality"] = criticality_section(req, in);
    out["sosc"] = sosc_section(req, in);
    out["closedness_conditions"] = closedness_section(req, in);
  }
  return out;
}

// key=value lines, nested objects joined with dots; arrays stay inline.
void render_text(const Json& j, const std::string& prefix, std::ostream& os) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      render_text(*it, key, os);
    } else if (it->is_array() && !it->empty() && (*it)[0].is_object()) {
      for (size_t k = 0; k < it->size(); ++k) render_text((*it)[k], key + "[" + std::to_string(k) + "]", os);
    } else if (it->is_string()) {
      os << key << '=' << it->get<std::string>() << '\n';
    } else {
      os << key << '=' << it->dump() << '\n';
    }
  }
}

void add_common(CLI::App* sub, Request& req) {
  sub->add_option("--problem", req.problem_path, "problem JSON file");
  sub->add_option("--point", req.point_path, "KKT point JSON file {x, Y}");
  sub->add_option("--family", req.family, "builtin family: example2 or example3");
  sub->add_option("--example2-a", req.example2_a, "A = [[a,b],[b,c]] for example2 as a,b,c (b != 0)");
  sub->add_option("--tol-eig", req.tol_eig,
                  "zero tolerance for the eigenvalue partition (default 1e-8*max(1,max|lambda|))")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tol-feas", req.tol_feas, "KKT residual certification tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", req.seed, "seed for every randomized search")->capture_default_str();
  sub->add_option("--format", req.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  sub->add_option("--grid-points", req.grid_points, "angle grid size for two-dimensional beta blocks")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--samples", req.samples, "random bases and SOSC multistart count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analyze KKT points of nonlinear semidefinite programs", "kkt-spectra"};
  app.require_subcommand(1);
  Request req;
  struct Cmd {
    const char* name;
    const char* help;
  };
  const Cmd cmds[] = {
      {"analyze", "full report: residuals, partition, CQs, criticality, SOSC, closedness conditions"},
      {"criticality", "critical / noncritical multiplier classification"},
      {"sosc", "second-order sufficient condition at the given multiplier"},
      {"cones", "KKT residual, eigenvalue partition and cone structure flags"},
      {"perturb", "canonical perturbation sweep and error-bound verdicts"},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, req);
    if (std::string(c.name) == "analyze") {
      sub->add_option("--cond-samples", req.cond_samples, "samples for the closedness conditions")
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
    }
    if (std::string(c.name) == "perturb") {
      sub->add_option("--geo", req.geo, "geometric schedule start:end:count")->required();
      sub->add_option("--direction", req.direction_path, "perturbation direction {p1, p2} for --problem");
      sub->add_option("--jitter-starts", req.jitter_starts, "extra jittered Newton starts per point")
          ->check(CLI::NonNegativeNumber)
          ->capture_default_str();
      sub->add_flag("--no-continuation", req.no_continuation, "start every solve at the reference pair");
      sub->add_option("--csv", req.csv_path, "also write param,deviation,pnorm,ydist rows here");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (auto* sub : app.get_subcommands()) req.command = sub->get_name();

  try {
    const Json out = run(req);
    if (req.format == "json") {
      std::cout << out.dump(2) << '\n';
    } else {
      render_text(out, "", std::cout);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const kkt::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const kkt::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  }
}
