#pragma once

#include <string>

#include "json.hpp"
#include "kktspectra/perturb.hpp"
#include "kktspectra/problem.hpp"

namespace kkt::io {

using Json = nlohmann::json;

/// Problem file: {n, p, f: {lin, quad}, G: {A0, A, B}} with matrices of order p
/// stored as p*p row-major arrays. G.B is an n x n array of such matrices; only
/// the upper triangle (i <= j) is read and mirrored, lower entries may be null.
ProblemData problem_from_json(const Json& j);
Json problem_to_json(const ProblemData& pd);

/// Point file: {x: [n reals], Y: [p*p row-major]}.
struct PointData {
  Vec x;
  SymMat Y;
};
PointData point_from_json(const Json& j, const ProblemData& pd);
Json point_to_json(const Vec& x, const SymMat& y);

Json vec_to_json(const Vec& v);
Json sym_to_json(const SymMat& m);
Json mat_to_json(const Mat& m);

/// Reads and parses a JSON file; parse failures become InputError.
Json read_json_file(const std::string& path);

/// Builtin family lookup: "example2" (optional 2x2 off-diagonal A) or "example3".
Family builtin_family(const std::string& name, const SymMat* example2_a = nullptr);

/// Family s -> s * (p1, p2) around a user point; direction file {p1: [n], p2: [p*p]}.
Family direction_family(const ProblemData& pd, const PointData& point, const Json& direction);

/// Sweep report; non-finite numbers and guarded 0/0 ratios come out as null.
Json error_bound_to_json(const ErrorBoundReport& rep);
/// Rows param, ||x - xbar||, ||p1|| + ||p2||, ||Y - ybar||.
std::string error_bound_csv(const ErrorBoundReport& rep);

}  // namespace kkt::io
