#pragma once

// Generating families F = Q + g on S^1 x R^K, quadratic at infinity, with
// Q a diagonal form of signs. Fiber-critical sets, the Legendrian loops they
// generate, the rank condition and the critical values of F.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "viterbo/errors.hpp"
#include "viterbo/expr.hpp"
#include "viterbo/jet_space.hpp"

namespace viterbo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {

/// All derivative expressions of F needed downstream, built once.
struct FamilyDerivatives {
  Expr F, g;
  Expr Fq, Ft, Fqq, Fqt;
  std::vector<Expr> Fw, Fqw, Ftw, gw;
  std::vector<std::vector<Expr>> Fww;
};

inline std::shared_ptr<const FamilyDerivatives> build_derivatives(const Expr& F, const Expr& g,
                                                                 int K) {
  auto d = std::make_shared<FamilyDerivatives>();
  d->F = F;
  d->g = g;
  d->Fq = differentiate(F, Variable::base());
  d->Ft = differentiate(F, Variable::time());
  d->Fqq = differentiate(d->Fq, Variable::base());
  d->Fqt = differentiate(d->Fq, Variable::time());
  d->Fww.resize(K);
  for (int i = 0; i < K; ++i) {
    const Variable wi = Variable::fiber(i + 1);
    d->Fw.push_back(differentiate(F, wi));
    d->gw.push_back(differentiate(g, wi));
    d->Fqw.push_back(differentiate(d->Fw.back(), Variable::base()));
    d->Ftw.push_back(differentiate(d->Fw.back(), Variable::time()));
    for (int j = 0; j < K; ++j) d->Fww[i].push_back(differentiate(d->Fw.back(), Variable::fiber(j + 1)));
  }
  return d;
}

}  // namespace detail

/// F(q, w) = sum_i s_i w_i^2 + g(q, w), s_i = +-1. May depend on the
/// parameters t and lambda, which are fixed per instance.
class GeneratingFamily {
 public:
  GeneratingFamily(std::vector<int> q_signs, Expr g, std::optional<double> bound_radius = {})
      : q_signs_(std::move(q_signs)), explicit_bound_(bound_radius) {
    const int K = fiber_dim();
    for (int s : q_signs_)
      if (s != 1 && s != -1) throw PreconditionError("quadratic form signs must be +1 or -1");
    for (const Variable& v : free_variables(g))
      if (v.kind == VarKind::w && v.index > K)
        throw PreconditionError("g uses " + v.name() + " but K = " + std::to_string(K));
    Expr F = g;
    Expr Q;
    for (int i = 0; i < K; ++i) {
      const Expr sq = pow(Expr::variable(Variable::fiber(i + 1)), 2);
      Q = Q + (q_signs_[i] > 0 ? sq : -sq);
    }
    if (K > 0) F = Q + g;
    d_ = detail::build_derivatives(F, g, K);
    update_bound();
  }

  /// Parses g with fiber dimension q_signs.size().
  static GeneratingFamily from_text(std::string_view g, std::vector<int> q_signs,
                                    std::optional<double> bound_radius = {}) {
    const int K = static_cast<int>(q_signs.size());
    return GeneratingFamily(std::move(q_signs), parse(g, K), bound_radius);
  }

  int fiber_dim() const { return static_cast<int>(q_signs_.size()); }
  /// Number of negative squares of Q.
  int index() const {
    return static_cast<int>(std::count(q_signs_.begin(), q_signs_.end(), -1));
  }
  std::span<const int> q_signs() const { return q_signs_; }
  const Expr& expression() const { return d_->F; }
  const Expr& bounded_part() const { return d_->g; }
  double bound_radius() const { return bound_; }
  double time() const { return t_; }
  double lambda() const { return lambda_; }
  bool depends_on_time() const { return free_variables(d_->F).count(Variable::time()) > 0; }

  /// Slice of a one-parameter family at parameter value t.
  GeneratingFamily at_time(double t) const {
    GeneratingFamily copy = *this;
    copy.t_ = t;
    copy.update_bound();
    return copy;
  }

  /// Fixes the lambda parameter. The bound radius is kept: lambda may only
  /// enter through terms that do not depend on the fiber.
  GeneratingFamily with_lambda(double lambda) const {
    GeneratingFamily copy = *this;
    copy.lambda_ = lambda;
    return copy;
  }

  Point point(double q, std::span<const double> w) const { return Point{q, t_, lambda_, w}; }

  double value(double q, std::span<const double> w) const { return eval(d_->F, point(q, w)); }
  double bounded_value(double q, std::span<const double> w) const { return eval(d_->g, point(q, w)); }
  double dq(double q, std::span<const double> w) const { return eval(d_->Fq, point(q, w)); }
  double dt(double q, std::span<const double> w) const { return eval(d_->Ft, point(q, w)); }

  Vec fiber_gradient(double q, std::span<const double> w) const {
    const int K = fiber_dim();
    Vec out(K);
    const Point p = point(q, w);
    for (int i = 0; i < K; ++i) out(i) = eval(d_->Fw[i], p);
    return out;
  }

  Mat fiber_hessian(double q, std::span<const double> w) const {
    const int K = fiber_dim();
    Mat out(K, K);
    const Point p = point(q, w);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) out(i, j) = eval(d_->Fww[i][j], p);
    return out;
  }

  /// The K x (K+1) matrix (F_wq, F_ww).
  Mat rank_matrix(double q, std::span<const double> w) const {
    const int K = fiber_dim();
    Mat out(K, K + 1);
    const Point p = point(q, w);
    for (int i = 0; i < K; ++i) {
      out(i, 0) = eval(d_->Fqw[i], p);
      for (int j = 0; j < K; ++j) out(i, j + 1) = eval(d_->Fww[i][j], p);
    }
    return out;
  }

  /// Gradient of F in (q, w).
  Vec gradient(double q, std::span<const double> w) const {
    const int K = fiber_dim();
    Vec out(K + 1);
    const Point p = point(q, w);
    out(0) = eval(d_->Fq, p);
    for (int i = 0; i < K; ++i) out(i + 1) = eval(d_->Fw[i], p);
    return out;
  }

  /// Hessian of F in (q, w).
  Mat hessian(double q, std::span<const double> w) const {
    const int K = fiber_dim();
    Mat out(K + 1, K + 1);
    const Point p = point(q, w);
    out(0, 0) = eval(d_->Fqq, p);
    for (int i = 0; i < K; ++i) {
      out(0, i + 1) = out(i + 1, 0) = eval(d_->Fqw[i], p);
      for (int j = 0; j < K; ++j) out(i + 1, j + 1) = eval(d_->Fww[i][j], p);
    }
    return out;
  }

  /// Derivative in t of the fiber gradient (used when tracking in t).
  Vec fiber_gradient_dt(double q, std::span<const double> w) const {
    const int K = fiber_dim();
    Vec out(K);
    const Point p = point(q, w);
    for (int i = 0; i < K; ++i) out(i) = eval(d_->Ftw[i], p);
    return out;
  }

  /// sup of |d_w g| over S^1 x [-R, R]^K, estimated on a lattice.
  double fiber_slope_bound(double R) const {
    const int K = fiber_dim();
    if (K == 0) return 0.0;
    const int per_axis = K <= 2 ? 9 : 5;
    const int n_q = 64;
    std::vector<double> w(K);
    std::vector<int> idx(K, 0);
    double best = 0.0;
    for (int j = 0; j < n_q; ++j) {
      const double q = two_pi * j / n_q;
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        for (int a = 0; a < K; ++a) w[a] = -R + 2.0 * R * idx[a] / (per_axis - 1);
        const Point p = point(q, w);
        double s = 0.0;
        for (int a = 0; a < K; ++a) {
          const double c = eval(d_->gw[a], p);
          s += c * c;
        }
        best = std::max(best, std::sqrt(s));
        int a = 0;
        while (a < K && ++idx[a] == per_axis) idx[a++] = 0;
        if (a == K) break;
      }
    }
    return best;
  }

 private:
  void update_bound() {
    if (explicit_bound_) {
      bound_ = *explicit_bound_;
      return;
    }
    if (fiber_dim() == 0) {
      bound_ = 0.0;
      return;
    }
    // Grow R until it dominates 2 sup|d_w g| + 1 on its own lattice.
    double R = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double need = 2.0 * fiber_slope_bound(R) + 1.0;
      if (need <= R) break;
      R = need;
      if (R > 1e6)
        throw PreconditionError(
            "fiber differential of g does not look bounded; pass an explicit bound radius");
    }
    bound_ = R;
  }

  std::vector<int> q_signs_;
  std::shared_ptr<const detail::FamilyDerivatives> d_;
  std::optional<double> explicit_bound_;
  double bound_ = 0.0;
  double t_ = 0.0;
  double lambda_ = 0.0;
};

/// JSON family description: {"K": 1, "Qsigns": [-1], "g": "w1*sin(q)", "grid": 256}.
struct FamilySpec {
  int K = 0;
  std::vector<int> q_signs;
  std::string g;
  int grid = 256;

  GeneratingFamily build() const {
    if (static_cast<int>(q_signs.size()) != K)
      throw PreconditionError("Qsigns must have exactly K entries");
    return GeneratingFamily::from_text(g, q_signs);
  }
};

inline FamilySpec family_spec_from_json(const nlohmann::json& j) {
  FamilySpec spec;
  try {
    if (j.contains("schema") && j.at("schema").get<int>() != 1)
      throw PreconditionError("unsupported family schema version");
    spec.K = j.at("K").get<int>();
    spec.q_signs = j.value("Qsigns", std::vector<int>{});
    spec.g = j.at("g").get<std::string>();
    spec.grid = j.value("grid", 256);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed family JSON: ") + e.what());
  }
  if (spec.K < 0) throw PreconditionError("K must be >= 0");
  if (spec.q_signs.empty() && spec.K > 0) spec.q_signs.assign(spec.K, 1);
  return spec;
}

inline nlohmann::ordered_json to_json(const FamilySpec& spec) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["K"] = spec.K;
  j["Qsigns"] = spec.q_signs;
  j["g"] = spec.g;
  j["grid"] = spec.grid;
  return j;
}

// ---------------------------------------------------------------------------
// Fiber-critical points

struct FiberCriticalPoint {
  double q = 0.0;
  std::vector<double> w;
  double value = 0.0;
  double p = 0.0;  // d_q F
  double hessian_det = 1.0;  // det d_ww F (1 for K = 0)
};

struct NewtonFailure {
  double q = 0.0;
  std::vector<double> seed;
};

struct FiberCriticalSet {
  std::vector<FiberCriticalPoint> points;
  std::vector<NewtonFailure> failures;
};

inline constexpr double default_tol_newton = 1e-10;

namespace detail {

inline FiberCriticalPoint make_fiber_point(const GeneratingFamily& F, double q,
                                           std::vector<double> w) {
  FiberCriticalPoint pt;
  pt.q = reduce_angle(q);
  pt.w = std::move(w);
  pt.value = F.value(pt.q, pt.w);
  pt.p = F.dq(pt.q, pt.w);
  pt.hessian_det = F.fiber_dim() == 0 ? 1.0 : F.fiber_hessian(pt.q, pt.w).determinant();
  return pt;
}

/// Newton iteration for d_w F(q, .) = 0, polished past the tolerance so that
/// degenerate roots (linear convergence) still land within the dedup radius.
inline std::optional<std::vector<double>> fiber_newton(const GeneratingFamily& F, double q,
                                                       std::vector<double> w, double tol) {
  const int K = F.fiber_dim();
  const double R = F.bound_radius();
  for (int it = 0; it < 200; ++it) {
    const Vec grad = F.fiber_gradient(q, w);
    if (!grad.allFinite()) return std::nullopt;
    const Mat H = F.fiber_hessian(q, w);
    Eigen::FullPivLU<Mat> lu(H);
    if (lu.rank() < K) break;
    Vec step = lu.solve(grad);
    const double len = step.norm();
    if (len > R) step *= R / len;
    for (int a = 0; a < K; ++a) w[a] -= step(a);
    if (step.norm() <= 1e-15 * (1.0 + Eigen::Map<const Vec>(w.data(), K).norm())) break;
  }
  const Vec grad = F.fiber_gradient(q, w);
  if (!(grad.norm() <= tol)) return std::nullopt;
  for (double x : w)
    if (std::abs(x) > R * (1.0 + 1e-9)) return std::nullopt;
  return w;
}

}  // namespace detail

/// Fiber-critical points over a single base angle q.
inline std::vector<FiberCriticalPoint> fiber_critical_points_at(
    const GeneratingFamily& F, double q, double tol_newton = default_tol_newton,
    std::vector<NewtonFailure>* failures = nullptr) {
  const int K = F.fiber_dim();
  std::vector<FiberCriticalPoint> out;
  if (K == 0) {
    out.push_back(detail::make_fiber_point(F, q, {}));
    return out;
  }
  constexpr int per_axis = 5;
  const double R = F.bound_radius();
  std::vector<int> idx(K, 0);
  std::vector<double> seed(K);
  const double dedup = 10.0 * tol_newton;
  for (;;) {
    for (int a = 0; a < K; ++a) seed[a] = -R + 2.0 * R * idx[a] / (per_axis - 1);
    if (auto root = detail::fiber_newton(F, q, seed, tol_newton)) {
      bool duplicate = false;
      for (const auto& existing : out) {
        double d = 0.0;
        for (int a = 0; a < K; ++a) d = std::max(d, std::abs(existing.w[a] - (*root)[a]));
        if (d <= dedup) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) out.push_back(detail::make_fiber_point(F, q, std::move(*root)));
    } else if (failures) {
      failures->push_back({reduce_angle(q), seed});
    }
    int a = 0;
    while (a < K && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == K) break;
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.value != y.value) return x.value < y.value;
    return x.w < y.w;
  });
  return out;
}

inline FiberCriticalSet fiber_critical_set(const GeneratingFamily& F, int n_q,
                                           double tol_newton = default_tol_newton) {
  if (n_q < 64) throw PreconditionError("fiber_critical_set needs n_q >= 64");
  FiberCriticalSet set;
  for (int j = 0; j < n_q; ++j) {
    const double q = two_pi * j / n_q;
    auto pts = fiber_critical_points_at(F, q, tol_newton, &set.failures);
    set.points.insert(set.points.end(), std::make_move_iterator(pts.begin()),
                      std::make_move_iterator(pts.end()));
  }
  return set;
}

inline bool rank_condition_check(const GeneratingFamily& F, const FiberCriticalPoint& pt,
                                 double tol_rank = 1e-8) {
  if (F.fiber_dim() == 0) return true;
  Eigen::JacobiSVD<Mat> svd(F.rank_matrix(pt.q, pt.w));
  return svd.singularValues().minCoeff() > tol_rank;
}

// ---------------------------------------------------------------------------
// Tracing the fiber-critical set B_F

/// A closed component of B_F, sampled in order; q is unwrapped.
struct CriticalCurve {
  std::vector<double> q_lift;
  std::vector<std::vector<double>> w;
  int winding = 0;

  std::size_t size() const { return q_lift.size(); }
};

namespace detail {

inline double curve_distance(double qa, std::span<const double> wa, double qb,
                             std::span<const double> wb) {
  double s = wrap_delta(qa - qb);
  s *= s;
  for (std::size_t a = 0; a < wa.size(); ++a) s += (wa[a] - wb[a]) * (wa[a] - wb[a]);
  return std::sqrt(s);
}

inline Vec curve_tangent(const GeneratingFamily& F, const Vec& x) {
  const int K = F.fiber_dim();
  std::vector<double> w(x.data() + 1, x.data() + 1 + K);
  Eigen::JacobiSVD<Mat> svd(F.rank_matrix(x(0), w), Eigen::ComputeFullV);
  Vec tau = svd.matrixV().col(K);
  return tau / tau.norm();
}

inline std::vector<double> fiber_part(const Vec& x) {
  return std::vector<double>(x.data() + 1, x.data() + x.size());
}

/// Pseudo-arclength continuation of d_w F = 0 starting from a point on it.
inline CriticalCurve trace_curve(const GeneratingFamily& F, const FiberCriticalPoint& seed,
                                 double h0, double tol) {
  const int K = F.fiber_dim();
  Vec x(K + 1);
  x(0) = seed.q;
  for (int a = 0; a < K; ++a) x(a + 1) = seed.w[a];
  const Vec x0 = x;

  Vec tau = curve_tangent(F, x);
  int lead = 0;
  while (lead < K && std::abs(tau(lead)) < 1e-12) ++lead;
  if (tau(lead) < 0) tau = -tau;

  CriticalCurve curve;
  curve.q_lift.push_back(x(0));
  curve.w.push_back(fiber_part(x));

  double h = h0;
  const std::size_t max_steps = static_cast<std::size_t>(400.0 * two_pi / h0) + 1000;
  for (std::size_t step = 0; step < max_steps; ++step) {
    bool accepted = false;
    Vec y;
    Vec tau_new;
    while (!accepted) {
      if (h < h0 * 1e-5)
        throw ConvergenceError("branch tracking failed near q = " +
                               std::to_string(reduce_angle(x(0))));
      y = x + h * tau;
      bool converged = false;
      for (int it = 0; it < 30; ++it) {
        std::vector<double> w = fiber_part(y);
        Vec residual(K + 1);
        residual.head(K) = F.fiber_gradient(y(0), w);
        residual(K) = tau.dot(y - x) - h;
        Mat J(K + 1, K + 1);
        J.topRows(K) = F.rank_matrix(y(0), w);
        J.row(K) = tau.transpose();
        const Vec delta = J.fullPivLu().solve(residual);
        if (!delta.allFinite()) break;
        y -= delta;
        if (delta.norm() <= 1e-13 * (1.0 + y.norm())) {
          converged = F.fiber_gradient(y(0), fiber_part(y)).norm() <= tol;
          break;
        }
      }
      if (converged && (y - x).norm() <= 2.0 * h) {
        tau_new = curve_tangent(F, y);
        if (tau_new.dot(tau) < 0) tau_new = -tau_new;
        accepted = tau_new.dot(tau) >= 0.85;
      }
      if (!accepted) h *= 0.5;
    }
    x = y;
    tau = tau_new;
    h = std::min(h0, 2.0 * h);

    const std::vector<double> w = fiber_part(x);
    const double back = curve_distance(x(0), w, x0(0), seed.w);
    if (curve.size() >= 3 && back < h0) {
      if (back >= 0.25 * h0) {
        curve.q_lift.push_back(x(0));
        curve.w.push_back(w);
      }
      curve.winding = static_cast<int>(std::lround(
          (curve.q_lift.back() - curve.q_lift.front() +
           wrap_delta(curve.q_lift.front() - curve.q_lift.back())) /
          two_pi));
      return curve;
    }
    curve.q_lift.push_back(x(0));
    curve.w.push_back(w);
  }
  throw ConvergenceError("branch tracking did not close (started at q = " +
                         std::to_string(seed.q) + ")");
}

}  // namespace detail

/// All closed components of B_F. For K = 0 this is the base circle itself.
inline std::vector<CriticalCurve> trace_critical_curves(const GeneratingFamily& F, int n_q,
                                                        double tol_newton = default_tol_newton) {
  const double h0 = two_pi / n_q;
  std::vector<CriticalCurve> curves;
  if (F.fiber_dim() == 0) {
    CriticalCurve c;
    for (int j = 0; j < n_q; ++j) {
      c.q_lift.push_back(two_pi * j / n_q);
      c.w.emplace_back();
    }
    c.winding = 1;
    curves.push_back(std::move(c));
    return curves;
  }

  const FiberCriticalSet seeds = fiber_critical_set(F, n_q, tol_newton);
  std::vector<bool> visited(seeds.points.size(), false);
  for (std::size_t s = 0; s < seeds.points.size(); ++s) {
    if (visited[s]) continue;
    CriticalCurve curve;
    double h = h0;
    for (;;) {
      curve = detail::trace_curve(F, seeds.points[s], h, tol_newton);
      if (curve.size() >= LegendrianLoop::min_samples) break;
      h *= 0.25;
    }
    for (std::size_t r = s; r < seeds.points.size(); ++r) {
      if (visited[r]) continue;
      for (std::size_t i = 0; i < curve.size(); ++i) {
        if (detail::curve_distance(seeds.points[r].q, seeds.points[r].w, curve.q_lift[i],
                                   curve.w[i]) <= 2.0 * h0) {
          visited[r] = true;
          break;
        }
      }
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

inline LegendrianLoop loop_from_curve(const GeneratingFamily& F, const CriticalCurve& curve) {
  std::vector<JetPoint> samples;
  samples.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double q = reduce_angle(curve.q_lift[i]);
    samples.emplace_back(q, F.dq(q, curve.w[i]), F.value(q, curve.w[i]));
  }
  return LegendrianLoop(std::move(samples));
}

/// The Legendrian loops (q, d_q F, F) over the components of B_F.
inline std::vector<LegendrianLoop> legendrian_from_family(const GeneratingFamily& F, int n_q,
                                                          double tol_newton = default_tol_newton) {
  std::vector<LegendrianLoop> loops;
  for (const auto& curve : trace_critical_curves(F, n_q, tol_newton))
    loops.push_back(loop_from_curve(F, curve));
  return loops;
}

// ---------------------------------------------------------------------------
// Critical points of F (d_w F = 0 and d_q F = 0)

struct CriticalPoint {
  double q = 0.0;
  std::vector<double> w;
  double value = 0.0;
  bool nondegenerate = true;
  bool whole_curve = false;  // d_q F vanishes along an entire component of B_F
};

struct CriticalValue {
  double value = 0.0;
  int multiplicity = 0;
  bool nondegenerate = true;
};

namespace detail {

inline bool hessian_nondegenerate(const GeneratingFamily& F, double q, std::span<const double> w) {
  Eigen::SelfAdjointEigenSolver<Mat> es(F.hessian(q, w));
  return es.eigenvalues().cwiseAbs().minCoeff() > 1e-6;
}

/// Full Newton on grad F = 0 in (q, w).
inline std::optional<Vec> critical_newton(const GeneratingFamily& F, Vec x, double max_move) {
  const Vec start = x;
  const int K = F.fiber_dim();
  for (int it = 0; it < 60; ++it) {
    std::vector<double> w = fiber_part(x);
    const Vec grad = F.gradient(x(0), w);
    Eigen::FullPivLU<Mat> lu(F.hessian(x(0), w));
    if (lu.rank() < K + 1) return std::nullopt;
    const Vec step = lu.solve(grad);
    x -= step;
    if ((x - start).norm() > max_move) return std::nullopt;
    if (step.norm() <= 1e-14 * (1.0 + x.norm())) break;
  }
  if (F.gradient(x(0), fiber_part(x)).norm() > 1e-9) return std::nullopt;
  return x;
}

inline void add_critical_point(std::vector<CriticalPoint>& out, CriticalPoint pt) {
  for (const auto& e : out) {
    double d = circle_distance(e.q, pt.q);
    for (std::size_t a = 0; a < pt.w.size(); ++a) d += std::abs(e.w[a] - pt.w[a]);
    if (d < 1e-7) return;
  }
  out.push_back(std::move(pt));
}

}  // namespace detail

/// Critical points found as zeros of p = d_q F along each traced component of
/// B_F, Newton-refined in all variables.
inline std::vector<CriticalPoint> critical_points_on_curves(const GeneratingFamily& F,
                                                            const std::vector<CriticalCurve>& curves,
                                                            double h0) {
  const int K = F.fiber_dim();
  std::vector<CriticalPoint> out;
  for (const CriticalCurve& c : curves) {
    const std::size_t n = c.size();
    std::vector<double> p(n);
    double pmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = F.dq(c.q_lift[i], c.w[i]);
      pmax = std::max(pmax, std::abs(p[i]));
    }
    const double zero_tol = 1e-12 * std::max(1.0, pmax);
    std::vector<int> sign(n);
    for (std::size_t i = 0; i < n; ++i) sign[i] = std::abs(p[i]) <= zero_tol ? 0 : (p[i] > 0 ? 1 : -1);

    auto emit = [&](double q, const std::vector<double>& w) {
      Vec x(K + 1);
      x(0) = q;
      for (int a = 0; a < K; ++a) x(a + 1) = w[a];
      CriticalPoint pt;
      if (auto refined = detail::critical_newton(F, x, 4.0 * h0)) {
        pt.q = reduce_angle((*refined)(0));
        pt.w = detail::fiber_part(*refined);
        pt.nondegenerate = detail::hessian_nondegenerate(F, pt.q, pt.w);
      } else {
        pt.q = reduce_angle(q);
        pt.w = w;
        pt.nondegenerate = false;
      }
      pt.value = F.value(pt.q, pt.w);
      detail::add_critical_point(out, std::move(pt));
    };

    if (std::all_of(sign.begin(), sign.end(), [](int s) { return s == 0; })) {
      CriticalPoint pt;
      pt.q = reduce_angle(c.q_lift[0]);
      pt.w = c.w[0];
      pt.value = F.value(pt.q, pt.w);
      pt.nondegenerate = false;
      pt.whole_curve = true;
      out.push_back(std::move(pt));
      continue;
    }
    // Start just after a nonzero sample so that zero runs are never split.
    std::size_t start = 0;
    while (sign[start] == 0) ++start;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (start + k) % n;
      const std::size_t j = (i + 1) % n;
      if (sign[i] != 0 && sign[j] != 0) {
        if (sign[i] != sign[j]) {
          const double s = p[i] / (p[i] - p[j]);
          const double dq = j == 0 ? wrap_delta(c.q_lift[j] - c.q_lift[i]) : c.q_lift[j] - c.q_lift[i];
          std::vector<double> w(K);
          for (int a = 0; a < K; ++a) w[a] = c.w[i][a] + s * (c.w[j][a] - c.w[i][a]);
          emit(c.q_lift[i] + s * dq, w);
        }
      } else if (sign[i] != 0 && sign[j] == 0) {
        // Zero run begins at j; report its middle sample.
        std::size_t len = 0;
        while (sign[(j + len) % n] == 0) ++len;
        const std::size_t mid = (j + len / 2) % n;
        emit(c.q_lift[mid], c.w[mid]);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.q != b.q) return a.q < b.q;
    return a.value < b.value;
  });
  return out;
}

inline std::vector<CriticalPoint> critical_points(const GeneratingFamily& F, int n_q = 1024) {
  return critical_points_on_curves(F, trace_critical_curves(F, n_q), two_pi / n_q);
}

/// Groups critical values that agree to 1e-9 (relative) and counts them.
inline std::vector<CriticalValue> group_critical_values(const std::vector<CriticalPoint>& pts) {
  std::vector<CriticalPoint> sorted = pts;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.value < b.value; });
  std::vector<CriticalValue> out;
  for (const auto& pt : sorted) {
    if (!out.empty() &&
        std::abs(out.back().value - pt.value) <= 1e-9 * std::max(1.0, std::abs(pt.value))) {
      ++out.back().multiplicity;
      out.back().nondegenerate = out.back().nondegenerate && pt.nondegenerate;
    } else {
      out.push_back({pt.value, 1, pt.nondegenerate});
    }
  }
  return out;
}

inline std::vector<CriticalValue> critical_values(const GeneratingFamily& F, int n_q = 1024) {
  return group_critical_values(critical_points(F, n_q));
}

}  // namespace viterbo
