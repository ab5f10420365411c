#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kktspectra/problem.hpp"
#include "kktspectra/sosc.hpp"

namespace kkt {

/// One solve of Psi(x, z) = (p1, -p2). Y = z - Pi_+(z).
struct PerturbationSample {
  Vec p1;
  SymMat p2;
  Vec x;
  SymMat Y;
  SymMat z;
  int newton_iters = 0;
  int lm_iters = 0;       // iterations spent in the Levenberg-Marquardt fallback
  double residual = 0.0;  // ||Psi(x, z) - (p1, -p2)||
};

struct SolveOptions {
  int max_newton = 60;
  int max_lm = 400;
  int failed_steps_before_lm = 3;
  double fd_step = 1e-7;
  double tol = 1e-10;     // residual target, scaled by 1 + ||p1|| + ||p2||
};

/// Residual target used by the solver and by sample certification.
double residual_target(const Vec& p1, const SymMat& p2, const SolveOptions& opt = {});

/// Semismooth Newton on the normal map with a Levenberg-Marquardt fallback.
/// Throws ConvergenceError carrying the best residual when both stall.
PerturbationSample solve_perturbed_kkt(const ProblemData& pd, const Vec& p1, const SymMat& p2,
                                       const Vec& x0, const SymMat& z0,
                                       const SolveOptions& opt = {});

/// Slope and least-squares standard error of log(dev) against log(param).
/// Needs at least two positive pairs with distinct parameters.
struct OrderFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  int points = 0;
};
OrderFit fit_order_exponent(const std::vector<std::pair<double, double>>& pairs);

enum class BoundVerdict { Bounded, Diverging, Inconclusive };
const char* to_string(BoundVerdict v);

struct TrendStats {
  BoundVerdict verdict = BoundVerdict::Inconclusive;
  double max_over_min = 0.0;       // over the window
  double growth_per_decade = 0.0;  // factor by which the ratio grows as the parameter drops 10x
  bool monotone_increasing = false;
  int window = 0;
};

inline constexpr int kVerdictWindow = 6;

/// Ratios are taken as (param, ratio) pairs; the window is the kVerdictWindow
/// smallest parameters. Pairs with a zero denominator are passed as nullopt.
TrendStats ratio_verdict(const std::vector<std::pair<double, std::optional<double>>>& ratios);

struct SweepPoint {
  double param = 0.0;
  PerturbationSample sample;
  double deviation = 0.0;  // ||x - xbar||
  double pnorm = 0.0;      // ||p1|| + ||p2||
  double ydist = 0.0;      // ||Y - ybar||
  std::optional<double> ratio_pert;
  std::optional<double> ratio_pert_mult;
  int roots = 1;           // distinct converged roots over all starts
  bool multiple = false;   // some root differs from the chosen one by more than 1e-6
};

struct ExperimentOptions {
  bool continuation = true;
  int jitter_starts = 8;
  double jitter_scale = 1e-2;
  std::uint64_t seed = 42;
  SolveOptions solve;
};

struct ErrorBoundReport {
  std::string family;
  std::vector<double> schedule;
  std::vector<SweepPoint> points;
  int excluded = 0;                    // schedule values with no certified root
  std::optional<OrderFit> exponent_fit;  // ||x - xbar|| against the parameter
  TrendStats trend_pert;
  TrendStats trend_pert_mult;
};

/// Geometric grid of `count` values from start to end inclusive.
std::vector<double> geometric_schedule(double start, double end, int count);

ErrorBoundReport error_bound_experiment(const Family& family, const std::vector<double>& schedule,
                                        const ExperimentOptions& opt = {});

/// x-part estimate along a sweep, checked against SOSC at the reference pair:
/// when SOSC holds the ratio trend must not diverge.
struct XPartBoundReport {
  SoscVerdict sosc = SoscVerdict::Undetermined;
  std::vector<std::pair<double, std::optional<double>>> ratios;
  TrendStats trend;
  bool consistent = true;
};

XPartBoundReport xpart_bound_check(const ProblemData& pd, const Vec& xbar, const SymMat& ybar,
                                   const ErrorBoundReport& report, const SoscOptions& opt = {});

/// Block orders of graph points (X, Y) near (Xbar, Ybar), expressed in the
/// eigenbasis of Abar = Xbar + Ybar.
struct BlockOrder {
  std::string block;
  double predicted = 1.0;  // 1 linear, 2 product order
  bool upper_bound_only = false;  // order may exceed the prediction generically
  double min_exponent = 0.0;
  double max_exponent = 0.0;
  double max_scaled = 0.0;  // max of norm / s^predicted
  int fits = 0;             // directions with a nonzero block
};

struct BlockOrderOptions {
  int directions = 8;
  int points = 13;
  double s_min = 1e-6;
  double s_max = 1e-2;
  std::uint64_t seed = 42;
};

std::vector<BlockOrder> graph_block_orders(const SymMat& abar, const BlockOrderOptions& opt = {});

}  // namespace kkt
