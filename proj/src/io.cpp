#include "kktspectra/io.hpp"

#include <fstream>
#include <sstream>

#include "kktspectra/errors.hpp"

namespace kkt::io {
namespace {

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + ": expected a number");
  return j.get<double>();
}

Vec read_vec(const Json& j, Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    throw InputError(what + ": expected an array of " + std::to_string(n) + " numbers");
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = number(j[static_cast<size_t>(i)], what);
  return v;
}

Mat read_square(const Json& j, Index n, const std::string& what) {
  Mat m(n, n);
  // accept nested rows or a flat row-major array
  if (j.is_array() && static_cast<Index>(j.size()) == n && n > 0 && j[0].is_array()) {
    for (Index i = 0; i < n; ++i) m.row(i) = read_vec(j[static_cast<size_t>(i)], n, what).transpose();
    return m;
  }
  const Vec flat = read_vec(j, n * n, what);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) m(i, k) = flat(i * n + k);
  return m;
}

SymMat read_sym(const Json& j, Index p, const std::string& what) {
  const Vec flat = read_vec(j, p * p, what);
  try {
    return SymMat::from_row_major(std::span<const double>(flat.data(), static_cast<size_t>(flat.size())), p, 1e-12);
  } catch (const InputError& e) {
    throw InputError(what + ": " + e.what());
  }
}

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  return j.at(key);
}

Index dimension(const Json& j, const std::string& key) {
  const Json& v = field(j, key, "problem");
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw InputError("problem: '" + key + "' must be a nonnegative integer");
  return static_cast<Index>(v.get<long long>());
}

}  // namespace

ProblemData problem_from_json(const Json& j) {
  const Index n = dimension(j, "n");
  const Index p = dimension(j, "p");
  if (p == 0) throw InputError("problem: p must be positive");
  ProblemData pd = ProblemData::zeros(n, p);
  const Json& f = field(j, "f", "problem");
  if (f.contains("lin")) pd.f_lin = read_vec(f["lin"], n, "f.lin");
  if (f.contains("quad")) {
    const Mat q = read_square(f["quad"], n, "f.quad");
    if (n > 0 && (q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
      throw InputError("f.quad: matrix is not symmetric");
    pd.f_quad = 0.5 * (q + q.transpose());
  }
  const Json& g = field(j, "G", "problem");
  pd.g_const = read_sym(field(g, "A0", "G"), p, "G.A0");
  if (g.contains("A")) {
    const Json& a = g["A"];
    if (!a.is_array() || static_cast<Index>(a.size()) != n)
      throw InputError("G.A: expected " + std::to_string(n) + " matrices");
    for (Index i = 0; i < n; ++i)
      pd.g_lin[static_cast<size_t>(i)] = read_sym(a[static_cast<size_t>(i)], p, "G.A[" + std::to_string(i) + "]");
  }
  if (g.contains("B") && !g["B"].is_null()) {
    const Json& b = g["B"];
    if (!b.is_array() || static_cast<Index>(b.size()) != n)
      throw InputError("G.B: expected an n x n array");
    for (Index i = 0; i < n; ++i) {
      const Json& row = b[static_cast<size_t>(i)];
      if (!row.is_array() || static_cast<Index>(row.size()) != n)
        throw InputError("G.B: expected an n x n array");
      for (Index k = i; k < n; ++k) {
        const std::string what = "G.B[" + std::to_string(i) + "][" + std::to_string(k) + "]";
        const SymMat m = read_sym(row[static_cast<size_t>(k)], p, what);
        pd.g_quad[static_cast<size_t>(i)][static_cast<size_t>(k)] = m;
        pd.g_quad[static_cast<size_t>(k)][static_cast<size_t>(i)] = m;
      }
    }
  }
  pd.validate();
  return pd;
}

Json vec_to_json(const Vec& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json sym_to_json(const SymMat& m) {
  Json out = Json::array();
  for (double v : m.row_major()) out.push_back(v);
  return out;
}

Json mat_to_json(const Mat& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vec_to_json(m.row(i).transpose()));
  return out;
}

Json problem_to_json(const ProblemData& pd) {
  Json j;
  j["n"] = pd.n;
  j["p"] = pd.p;
  j["f"]["lin"] = vec_to_json(pd.f_lin);
  j["f"]["quad"] = mat_to_json(pd.f_quad);
  j["G"]["A0"] = sym_to_json(pd.g_const);
  j["G"]["A"] = Json::array();
  for (const auto& a : pd.g_lin) j["G"]["A"].push_back(sym_to_json(a));
  j["G"]["B"] = Json::array();
  for (Index i = 0; i < pd.n; ++i) {
    Json row = Json::array();
    for (Index k = 0; k < pd.n; ++k)
      row.push_back(k < i ? Json(nullptr) : sym_to_json(pd.g_quad[static_cast<size_t>(i)][static_cast<size_t>(k)]));
    j["G"]["B"].push_back(row);
  }
  return j;
}

PointData point_from_json(const Json& j, const ProblemData& pd) {
  PointData out;
  out.x = read_vec(field(j, "x", "point"), pd.n, "point.x");
  out.Y = read_sym(field(j, "Y", "point"), pd.p, "point.Y");
  return out;
}

Json point_to_json(const Vec& x, const SymMat& y) {
  Json j;
  j["x"] = vec_to_json(x);
  j["Y"] = sym_to_json(y);
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

Family builtin_family(const std::string& name, const SymMat* example2_a) {
  if (name == "example2") return example2_family(example2_a ? *example2_a : example2_default_a());
  if (name == "example3") return example3_family();
  throw InputError("unknown family '" + name + "' (expected example2 or example3)");
}

Family direction_family(const ProblemData& pd, const PointData& point, const Json& direction) {
  const Vec d1 = read_vec(field(direction, "p1", "direction"), pd.n, "direction.p1");
  const SymMat d2 = read_sym(field(direction, "p2", "direction"), pd.p, "direction.p2");
  Family fam;
  fam.name = "user";
  fam.base = pd;
  fam.xbar = point.x;
  fam.ybar = point.Y;
  fam.perturbation = [d1, d2](double s) { return std::pair{Vec(s * d1), SymMat(s * d2)}; };
  return fam;
}

namespace {

Json opt_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json trend_to_json(const TrendStats& t) {
  Json j;
  j["verdict"] = to_string(t.verdict);
  j["max_over_min"] = t.max_over_min;
  j["growth_per_decade"] = t.growth_per_decade;
  j["monotone_increasing"] = t.monotone_increasing;
  j["window"] = t.window;
  return j;
}

}  // namespace

Json error_bound_to_json(const ErrorBoundReport& rep) {
  Json j;
  j["family"] = rep.family;
  j["schedule"] = rep.schedule;
  j["excluded"] = rep.excluded;
  j["samples"] = Json::array();
  for (const auto& pt : rep.points) {
    Json s;
    s["param"] = pt.param;
    s["x"] = vec_to_json(pt.sample.x);
    s["Y"] = sym_to_json(pt.sample.Y);
    s["deviation"] = pt.deviation;
    s["pnorm"] = pt.pnorm;
    s["ydist"] = pt.ydist;
    s["ratio_pert"] = opt_to_json(pt.ratio_pert);
    s["ratio_pert_mult"] = opt_to_json(pt.ratio_pert_mult);
    s["newton_iters"] = pt.sample.newton_iters;
    s["lm_iters"] = pt.sample.lm_iters;
    s["residual"] = pt.sample.residual;
    s["roots"] = pt.roots;
    s["multiple_roots"] = pt.multiple;
    j["samples"].push_back(s);
  }
  if (rep.exponent_fit) {
    j["exponent_fit"] = {{"exponent", rep.exponent_fit->exponent},
                         {"stderr", rep.exponent_fit->stderr_},
                         {"points", rep.exponent_fit->points}};
  } else {
    j["exponent_fit"] = nullptr;
  }
  j["verdict_pert"] = trend_to_json(rep.trend_pert);
  j["verdict_pert_mult"] = trend_to_json(rep.trend_pert_mult);
  return j;
}

std::string error_bound_csv(const ErrorBoundReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "param,deviation,pnorm,ydist\n";
  for (const auto& pt : rep.points) {
    os << pt.param << ',' << pt.deviation << ',' << pt.pnorm << ',' << pt.ydist << '\n';
  }
  return os.str();
}

}  // namespace kkt::io
