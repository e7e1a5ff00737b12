#pragma once

// The hodograph transform J^1(S^1) -> ST*R^2: the jet (q, p, u) goes to the
// contact element at u e(q) + p e'(q) cooriented by e(q) = (cos q, sin q),
// where e'(q) = (-sin q, cos q).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "viterbo/errors.hpp"
#include "viterbo/jet_space.hpp"

namespace viterbo {

using Vec2 = std::array<double, 2>;

inline Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 unit_perp(double theta) { return {-std::sin(theta), std::cos(theta)}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

/// A cooriented line element: base point x and coorientation angle theta.
struct ContactElement {
  Vec2 x{0.0, 0.0};
  double theta = 0.0;

  ContactElement() = default;
  ContactElement(Vec2 base, double angle) : x(base), theta(reduce_angle(angle)) {}
};

inline ContactElement hodograph_fwd(const JetPoint& pt) {
  const Vec2 e = unit(pt.q()), n = unit_perp(pt.q());
  return ContactElement({pt.u() * e[0] + pt.p() * n[0], pt.u() * e[1] + pt.p() * n[1]}, pt.q());
}

inline JetPoint hodograph_inv(const ContactElement& el) {
  return JetPoint(el.theta, dot(el.x, unit_perp(el.theta)), dot(el.x, unit(el.theta)));
}

inline std::vector<ContactElement> hodograph_fwd(const LegendrianLoop& loop) {
  std::vector<ContactElement> out;
  out.reserve(loop.size());
  for (const JetPoint& pt : loop.samples()) out.push_back(hodograph_fwd(pt));
  return out;
}

/// The 1-jet of q -> <x, e(q)>; every sample is sent to a contact element
/// based at x.
inline LegendrianLoop fiber_as_jet(const Vec2& x, std::size_t n = 256) {
  std::vector<JetPoint> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = two_pi * static_cast<double>(i) / static_cast<double>(n);
    samples.emplace_back(q, dot(x, unit_perp(q)), dot(x, unit(q)));
  }
  return LegendrianLoop(std::move(samples));
}

/// Residual per edge: |<e(theta_mid), x_{i+1} - x_i>|, with the same
/// tolerance rule as check_legendrian.
inline LegendrianReport check_legendrian_st(const std::vector<ContactElement>& curve,
                                            std::optional<double> tol_leg = std::nullopt) {
  const std::size_t n = curve.size();
  if (n < LegendrianLoop::min_samples)
    throw PreconditionError("a curve of contact elements needs at least " +
                            std::to_string(LegendrianLoop::min_samples) + " samples");
  const double tol = tol_leg.value_or(default_legendrian_tolerance(n));
  std::vector<double> chords(n);
  std::vector<double> dtheta(n);
  std::vector<Vec2> dx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ContactElement& a = curve[i];
    const ContactElement& b = curve[(i + 1) % n];
    dtheta[i] = wrap_delta(b.theta - a.theta);
    dx[i] = {b.x[0] - a.x[0], b.x[1] - a.x[1]};
    chords[i] = std::sqrt(dtheta[i] * dtheta[i] + dot(dx[i], dx[i]));
  }
  detail::require_closed(chords, "curve of contact elements");

  LegendrianReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const double mid = curve[i].theta + 0.5 * dtheta[i];
    const double residual = std::abs(dot(unit(mid), dx[i]));
    if (residual > report.max_defect) {
      report.max_defect = residual;
      report.worst_edge = i;
    }
    if (chords[i] > 0.0) report.max_defect_rate = std::max(report.max_defect_rate, residual / chords[i]);
    if (residual > tol * (1.0 + std::abs(dtheta[i]) + std::sqrt(dot(dx[i], dx[i])))) report.pass = false;
  }
  return report;
}

}  // namespace viterbo
