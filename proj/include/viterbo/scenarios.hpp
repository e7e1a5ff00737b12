#pragma once

// Reproducible constructions: a positive loop of Legendrian embeddings,
// intersections with the cylinders Lambda_k, the lambda-scan of
// F_1 - lambda f and the two-point experiment for support functions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viterbo/cerf.hpp"
#include "viterbo/errors.hpp"
#include "viterbo/expr.hpp"
#include "viterbo/genfam.hpp"
#include "viterbo/hodograph.hpp"
#include "viterbo/jet_space.hpp"
#include "viterbo/parallel.hpp"
#include "viterbo/spectra.hpp"

namespace viterbo {

// ---------------------------------------------------------------------------
// Positive loop

/// The contact flow (q, p, u) -> (q - t, p, u - t eps).
inline LegendrianLoop flow_phi(const LegendrianLoop& loop, double t, double eps) {
  std::vector<JetPoint> out;
  out.reserve(loop.size());
  for (const JetPoint& pt : loop.samples()) out.emplace_back(pt.q() - t, pt.p(), pt.u() - t * eps);
  return LegendrianLoop(std::move(out));
}

inline LegendrianLoop translate_vertical(const LegendrianLoop& loop, double c) {
  std::vector<JetPoint> out;
  out.reserve(loop.size());
  for (const JetPoint& pt : loop.samples()) out.emplace_back(pt.q(), pt.p(), pt.u() + c);
  return LegendrianLoop(std::move(out));
}

/// A winding-one Legendrian loop in {p >= 2 eps + margin}: q(s) = s + 2 sin s,
/// p(s) = a + b ((1 - cos s)/2)^4 with a = 2 eps + margin and b chosen so that
/// the discrete integral of p dq vanishes, u the running sum of p dq.
inline LegendrianLoop build_high_p_loop(double eps, double margin, std::size_t n = 512) {
  if (!(eps > 0.0) || !(margin > 0.0)) throw PreconditionError("eps and margin must be positive");
  if (n < 64) throw PreconditionError("high-p loop needs at least 64 samples");
  const double a = 2.0 * eps + margin;
  std::vector<double> q(n), phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = two_pi * static_cast<double>(i) / static_cast<double>(n);
    q[i] = s + 2.0 * std::sin(s);
    phi[i] = std::pow(0.5 * (1.0 - std::cos(s)), 4);
  }
  // Edge i runs from sample i to i + 1; the closing edge gains 2pi in q.
  auto dq = [&](std::size_t i) { return i + 1 < n ? q[i + 1] - q[i] : q[0] + two_pi - q[i]; };
  double S = 0.0;
  for (std::size_t i = 0; i < n; ++i) S += 0.5 * (phi[i] + phi[(i + 1) % n]) * dq(i);
  if (!(S < 0.0))
    throw PreconditionError("cannot balance the integral of p dq with this weighting");
  const double b = -two_pi * a / S;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = a + b * phi[i];

  std::vector<JetPoint> samples;
  samples.reserve(n);
  double u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    samples.emplace_back(q[i], p[i], u);
    u += 0.5 * (p[i] + p[(i + 1) % n]) * dq(i);
  }
  LegendrianLoop loop(std::move(samples));
  if (!check_embedded(loop, 1e-6)) throw ConvergenceError("high-p loop is not embedded");
  return loop;
}

struct PositiveLoopOptions {
  std::size_t samples = 512;
  int flow_frames = 64;   // frames over the flow for t in [0, 2pi]
  int raise_frames = 32;  // frames over the vertical raise
  double raise_duration = std::numbers::pi;
};

/// The flow for time 2pi followed by the vertical raise by 2pi eps, as a
/// closed isotopy parametrized by [0, 2pi + raise_duration].
inline Isotopy build_positive_loop(double eps, const PositiveLoopOptions& opt = {}) {
  if (opt.flow_frames < 2 || opt.raise_frames < 1 || !(opt.raise_duration > 0.0))
    throw PreconditionError("positive loop needs at least 2 flow frames and 1 raise frame");
  const LegendrianLoop L = build_high_p_loop(eps, eps, opt.samples);
  std::vector<LegendrianLoop> frames;
  std::vector<double> times;
  for (int m = 0; m <= opt.flow_frames; ++m) {
    const double t = two_pi * m / opt.flow_frames;
    frames.push_back(flow_phi(L, t, eps));
    times.push_back(t);
  }
  const LegendrianLoop bottom = frames.back();
  for (int r = 1; r <= opt.raise_frames; ++r) {
    const double s = static_cast<double>(r) / opt.raise_frames;
    frames.push_back(translate_vertical(bottom, two_pi * eps * s));
    times.push_back(two_pi + opt.raise_duration * s);
  }
  return Isotopy(std::move(frames), std::move(times));
}

/// Largest coordinate difference between two loops sampled alike, q on the circle.
inline double frame_distance(const LegendrianLoop& a, const LegendrianLoop& b) {
  if (a.size() != b.size()) throw PreconditionError("frames differ in sample count");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const JetVector v = lifted_delta(a[i], b[i]);
    d = std::max({d, std::abs(v.dq), std::abs(v.dp), std::abs(v.du)});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Intersections with Lambda_k = {(q, -lambda k sin kq, lambda cos kq)}

struct LambdaKPoint {
  double s = 0.0;  // sample index plus fraction along the edge
  double q = 0.0;
  double p = 0.0;
  double u = 0.0;
  double lambda = 0.0;
  double residual = 0.0;  // max of the two jet-equation residuals
  bool tangential = false;
};

struct LambdaKReport {
  int k = 1;
  std::size_t count = 0;  // transverse points
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::vector<LambdaKPoint> points;  // transverse and tangential, in loop order
  bool degenerate = false;            // the loop lies in Lambda_k
  bool has_tangential = false;
};

namespace detail {

inline double lambda_k_g(double q, double p, double u, int k) {
  return p * std::cos(k * q) + u * k * std::sin(k * q);
}

inline LambdaKPoint lambda_k_point(double s, double q, double p, double u, int k, bool tangential) {
  LambdaKPoint pt;
  pt.s = s;
  pt.q = reduce_angle(q);
  pt.p = p;
  pt.u = u;
  const double c = std::cos(k * q), sn = std::sin(k * q);
  pt.lambda = u * c - p / k * sn;
  pt.residual = std::max(std::abs(p + pt.lambda * k * sn), std::abs(u - pt.lambda * c));
  pt.tangential = tangential;
  return pt;
}

}  // namespace detail

/// Zeros of g = p cos kq + u k sin kq along the polygon through the samples;
/// sign changes are refined by bisection on each edge.
inline LambdaKReport lambda_k_intersections(const LegendrianLoop& loop, int k) {
  if (k < 1) throw PreconditionError("k must be a positive integer");
  const std::size_t n = loop.size();
  const std::vector<double> lift = loop.lifted_q();
  std::vector<double> g(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = detail::lambda_k_g(lift[i], loop[i].p(), loop[i].u(), k);
    scale = std::max(scale, std::abs(loop[i].p()) + k * std::abs(loop[i].u()));
  }
  const double zero_tol = 1e-12 * std::max(1.0, scale);

  LambdaKReport r;
  r.k = k;
  r.degenerate = std::all_of(g.begin(), g.end(), [&](double v) { return std::abs(v) <= zero_tol; });
  if (r.degenerate) return r;

  auto sign = [&](double v) { return std::abs(v) <= zero_tol ? 0 : (v > 0 ? 1 : -1); };
  auto add = [&](LambdaKPoint pt) {
    if (pt.tangential) {
      r.has_tangential = true;
    } else {
      ++r.count;
      (pt.lambda > 0 ? r.positive : r.negative) += 1;
    }
    r.points.push_back(pt);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const int si = sign(g[i]);
    if (si == 0) {
      // A run of zero samples starting here; classify by the signs around it.
      const std::size_t prev = (i + n - 1) % n;
      if (sign(g[prev]) == 0) continue;
      std::size_t end = i;
      while (sign(g[(end + 1) % n]) == 0) end = (end + 1) % n;
      const int before = sign(g[prev]);
      const int after = sign(g[(end + 1) % n]);
      add(detail::lambda_k_point(static_cast<double>(i), lift[i], loop[i].p(), loop[i].u(), k,
                                 before == after));
      continue;
    }
    const int sj = sign(g[j]);
    if (sj == 0 || si == sj) continue;
    const JetPoint& a = loop[i];
    const JetPoint& b = loop[j];
    const double dq = wrap_delta(b.q() - a.q());
    auto at = [&](double s) {
      return std::array<double, 3>{lift[i] + s * dq, a.p() + s * (b.p() - a.p()),
                                   a.u() + s * (b.u() - a.u())};
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const auto x = at(mid);
      const double gm = detail::lambda_k_g(x[0], x[1], x[2], k);
      if (gm == 0.0) {
        lo = hi = mid;
        break;
      }
      ((gm > 0) == (si > 0) ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    const auto x = at(s);
    add(detail::lambda_k_point(static_cast<double>(i) + s, x[0], x[1], x[2], k, false));
  }
  return r;
}

// ---------------------------------------------------------------------------
// lambda-scan of H_lambda = F_1 - lambda f on {f >= 0}

struct LambdaCrossing {
  int k = 1;  // 1-based index of the curve c_k
  double lambda = 0.0;
  double lambda_lo = 0.0;  // grid bracket
  double lambda_hi = 0.0;
  double q = 0.0;
  std::vector<double> w;
  double residual = 0.0;  // max |H|, |grad H| at the refined point
  bool interior = false;
  bool verified = false;
  bool tangential = false;  // Hessian of H singular at the refined point
};

struct LambdaScan {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> curves;  // curves[k][j] = c_{k+1}(H_{lambda_j})
  std::vector<LambdaCrossing> crossings;
  std::vector<double> distinct_lambdas;  // verified interior zeros, positive, deduplicated
  int betti = 0;
  bool final_negative = false;
  bool pass = false;
};

struct LambdaScanOptions {
  SpectrumGrid grid{1024, 33};
  double tol_oracle = 1e-6;
  double tol_distinct = 1e-6;
};

namespace detail {

struct OracleResult {
  double q = 0.0;
  std::vector<double> w;
  double lambda = 0.0;
  double residual = 0.0;
  double hessian_det = 0.0;
  bool converged = false;
};

/// Newton on (q, w, lambda) for H = 0, grad H = 0 with H = F_1 - lambda f.
inline OracleResult crossing_oracle(const GeneratingFamily& H, const Expr& f, const Expr& df,
                                    double q, std::vector<double> w, double lambda) {
  const int K = H.fiber_dim();
  const int n = K + 2;
  OracleResult out;
  auto residual = [&](double qq, const std::vector<double>& ww, double lam, Eigen::VectorXd& r) {
    const GeneratingFamily Hl = H.with_lambda(lam);
    r.resize(n);
    r(0) = Hl.value(qq, ww);
    r.segment(1, K + 1) = Hl.gradient(qq, ww);
  };
  Eigen::VectorXd r;
  residual(q, w, lambda, r);
  for (int it = 0; it < 60; ++it) {
    const GeneratingFamily Hl = H.with_lambda(lambda);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.block(0, 0, 1, K + 1) = Hl.gradient(q, w).transpose();
    J(0, K + 1) = -eval_base(f, q);
    J.block(1, 0, K + 1, K + 1) = Hl.hessian(q, w);
    J(1, K + 1) = -eval_base(df, q);
    const Eigen::VectorXd step = J.fullPivLu().solve(-r);
    if (!step.allFinite()) break;
    const double scale = std::min(1.0, 0.5 / std::max(1e-300, step.cwiseAbs().maxCoeff()));
    q += scale * step(0);
    for (int a = 0; a < K; ++a) w[a] += scale * step(a + 1);
    lambda += scale * step(K + 1);
    residual(q, w, lambda, r);
    if (step.cwiseAbs().maxCoeff() < 1e-14 || r.cwiseAbs().maxCoeff() < 1e-14) break;
  }
  out.q = reduce_angle(q);
  out.w = w;
  out.lambda = lambda;
  out.residual = r.cwiseAbs().maxCoeff();
  out.hessian_det = H.with_lambda(lambda).hessian(q, w).determinant();
  out.converged = std::isfinite(out.residual);
  return out;
}

inline GeneratingFamily lambda_family(const GeneratingFamily& F1, const Expr& f) {
  for (const Variable& v : free_variables(F1.bounded_part()))
    if (v.kind == VarKind::lambda) throw PreconditionError("F_1 must not depend on lambda");
  std::vector<int> signs(F1.q_signs().begin(), F1.q_signs().end());
  const Expr g = F1.bounded_part() - Expr::variable(Variable::lambda()) * f;
  return GeneratingFamily(std::move(signs), g, F1.bound_radius()).at_time(F1.time());
}

}  // namespace detail

inline LambdaScan lambda_scan(const GeneratingFamily& F1, const Expr& f, double lambda_max,
                              int n_lambda, const LambdaScanOptions& opt = {}) {
  detail::require_base_only(f);
  if (!(lambda_max > 0.0)) throw PreconditionError("lambda_max must be positive");
  if (n_lambda < 2) throw PreconditionError("n_lambda must be at least 2");
  const GeneratingFamily H = detail::lambda_family(F1, f);
  const BaseGraph region = region_graph(f, opt.grid.n_q);
  const int index = H.index();

  LambdaScan scan;
  scan.betti = region.betti();
  scan.lambdas.resize(n_lambda);
  for (int j = 0; j < n_lambda; ++j) scan.lambdas[j] = lambda_max * j / (n_lambda - 1);

  auto spectrum_at = [&](double lambda) {
    return spectrum_of(build_filtration(H.with_lambda(lambda), region, opt.grid.n_w), index);
  };
  {
    const ViterboSpectrum s0 = spectrum_at(0.0);
    for (std::size_t k = 0; k < s0.size(); ++k)
      if (!(s0[k] > 0.0))
        throw PreconditionError("c_" + std::to_string(k + 1) + " of H_0 is " +
                                std::to_string(s0[k]) + ", must be positive");
  }
  std::vector<ViterboSpectrum> spectra(n_lambda);
  parallel_for(n_lambda, [&](std::size_t j) { spectra[j] = spectrum_at(scan.lambdas[j]); });
  const std::size_t b = static_cast<std::size_t>(scan.betti);
  scan.curves.assign(b, std::vector<double>(n_lambda));
  for (int j = 0; j < n_lambda; ++j)
    for (std::size_t k = 0; k < b; ++k) scan.curves[k][j] = spectra[j][k];

  scan.final_negative = true;
  for (std::size_t k = 0; k < b; ++k) scan.final_negative &= scan.curves[k].back() < 0.0;
  if (!scan.final_negative)
    throw PreconditionError("lambda_max = " + std::to_string(lambda_max) +
                            " is too small: not every c_k of H_lambda_max is negative");

  const Expr df = differentiate(f, Variable::base());
  for (std::size_t k = 0; k < b; ++k) {
    const auto& c = scan.curves[k];
    for (int j = 0; j + 1 < n_lambda; ++j) {
      if (!(c[j] > 0.0 && c[j + 1] <= 0.0) && !(c[j] <= 0.0 && c[j + 1] > 0.0)) continue;
      LambdaCrossing x;
      x.k = static_cast<int>(k) + 1;
      x.lambda_lo = scan.lambdas[j];
      x.lambda_hi = scan.lambdas[j + 1];
      const SpectralValue& seed = spectra[j + 1].values[k];
      const double lam0 = x.lambda_lo + (x.lambda_hi - x.lambda_lo) * c[j] / (c[j] - c[j + 1]);
      const detail::OracleResult o = detail::crossing_oracle(H, f, df, seed.q, seed.w, lam0);
      x.lambda = o.lambda;
      x.q = o.q;
      x.w = o.w;
      x.residual = o.residual;
      const double step = scan.lambdas[1] - scan.lambdas[0];
      const bool bracketed = o.lambda >= x.lambda_lo - 2 * step && o.lambda <= x.lambda_hi + 2 * step;
      x.interior = !seed.boundary && detail::eval_base(f, o.q) > 1e-9;
      x.tangential = std::abs(o.hessian_det) <= 1e-9;
      x.verified = o.converged && bracketed && x.residual <= opt.tol_oracle;
      scan.crossings.push_back(std::move(x));
    }
  }

  for (const LambdaCrossing& x : scan.crossings) {
    if (!x.verified || !x.interior || !(x.lambda > 0.0)) continue;
    const bool seen = std::any_of(scan.distinct_lambdas.begin(), scan.distinct_lambdas.end(),
                                  [&](double l) { return std::abs(l - x.lambda) <= opt.tol_distinct; });
    if (!seen) scan.distinct_lambdas.push_back(x.lambda);
  }
  std::sort(scan.distinct_lambdas.begin(), scan.distinct_lambdas.end());
  const bool all_verified = std::all_of(scan.crossings.begin(), scan.crossings.end(),
                                        [](const LambdaCrossing& x) { return x.verified; });
  scan.pass = scan.final_negative && all_verified &&
              static_cast<int>(scan.distinct_lambdas.size()) >= scan.betti;
  return scan;
}

/// Smallest power-of-two multiple of `start` at which every c_k of H_lambda
/// is negative.
inline double find_lambda_max(const GeneratingFamily& F1, const Expr& f, const SpectrumGrid& grid,
                              double start = 1.0) {
  const GeneratingFamily H = detail::lambda_family(F1, f);
  const BaseGraph region = region_graph(f, grid.n_q);
  double lambda = start;
  for (int it = 0; it < 40; ++it, lambda *= 2.0) {
    const ViterboSpectrum s = spectrum_of(build_filtration(H.with_lambda(lambda), region, grid.n_w),
                                          H.index());
    if (std::all_of(s.values.begin(), s.values.end(), [](const auto& v) { return v.value < 0.0; }))
      return lambda;
  }
  throw ConvergenceError("no lambda up to 2^40 makes every c_k negative");
}

// ---------------------------------------------------------------------------
// Two intersection points with Lambda_+(f) and Lambda_+(-f)

struct TwoPointHit {
  int side = 1;  // +1: on j^1(lambda f), -1: on j^1(-lambda f), lambda > 0
  double lambda = 0.0;
  JetPoint jet;
  double residual = 0.0;
};

struct TwoPointReport {
  PositiveFamilyReport positivity;
  LambdaScan plus;
  LambdaScan minus;
  std::vector<TwoPointHit> points;
  std::size_t count = 0;
  bool pass = false;
};

struct TwoPointOptions {
  int n_lambda = 1000;
  LambdaScanOptions scan;
  int n_q_positivity = 256;
};

inline TwoPointReport theorem5_experiment(const Vec2& x_fiber, const Vec2& direction,
                                          const FamilyPath& deformation,
                                          const TwoPointOptions& opt = {}) {
  if (std::abs(std::hypot(direction[0], direction[1]) - 1.0) > 1e-9)
    throw PreconditionError("direction must be a unit vector");

  const GeneratingFamily start = deformation.at(deformation.a);
  const double xnorm = std::hypot(x_fiber[0], x_fiber[1]);
  if (start.fiber_dim() == 0) {
    for (int i = 0; i < 256; ++i) {
      const double q = two_pi * i / 256;
      if (std::abs(start.value(q, {}) - dot(x_fiber, unit(q))) > 1e-9 * (1.0 + xnorm))
        throw PreconditionError("deformation does not start at the family of l_x");
    }
  } else {
    const ViterboSpectrum s = viterbo_numbers(start, {opt.scan.grid.n_q, opt.scan.grid.n_w});
    const double tol = 0.05 * (1.0 + xnorm);
    if (s.size() != 2 || std::abs(s[0] + xnorm) > tol || std::abs(s[1] - xnorm) > tol)
      throw PreconditionError("deformation does not start at a family of l_x");
  }

  TwoPointReport r;
  r.positivity = check_positive_family(deformation, opt.n_q_positivity);
  if (!r.positivity.pass)
    throw PreconditionError("deformation is not positive: dF/dt = " +
                            std::to_string(r.positivity.min_speed) + " at t = " +
                            std::to_string(r.positivity.t));

  const GeneratingFamily end = deformation.at(deformation.b);
  const Expr e0 = Expr::constant(direction[0]) * cos(Expr::variable(Variable::base()));
  const Expr e1 = Expr::constant(direction[1]) * sin(Expr::variable(Variable::base()));
  const Expr f = e0 + e1;
  auto run = [&](const Expr& h, int side, LambdaScan& scan) {
    const double lmax = 1.25 * find_lambda_max(end, h, opt.scan.grid);
    scan = lambda_scan(end, h, lmax, opt.n_lambda, opt.scan);
    std::vector<double> used;
    for (const LambdaCrossing& x : scan.crossings) {
      if (!x.verified || !x.interior || !(x.lambda > 0.0)) continue;
      if (std::any_of(used.begin(), used.end(),
                      [&](double l) { return std::abs(l - x.lambda) <= opt.scan.tol_distinct; }))
        continue;
      used.push_back(x.lambda);
      r.points.push_back({side, x.lambda, JetPoint(x.q, end.dq(x.q, x.w), end.value(x.q, x.w)),
                          x.residual});
    }
  };
  run(f, 1, r.plus);
  run(-f, -1, r.minus);
  r.count = r.points.size();
  const bool has_plus = std::any_of(r.points.begin(), r.points.end(), [](const auto& p) { return p.side > 0; });
  const bool has_minus = std::any_of(r.points.begin(), r.points.end(), [](const auto& p) { return p.side < 0; });
  r.pass = r.count >= 2 && has_plus && has_minus;
  return r;
}

}  // namespace viterbo
