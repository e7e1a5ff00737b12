#pragma once

// Geometry of the 1-jet space of the circle with contact form du - p dq:
// points, discretized Legendrian loops, isotopies and their checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viterbo/errors.hpp"

namespace viterbo {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2pi). Idempotent.
inline double reduce_angle(double q) {
  double r = std::fmod(q, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

/// Wraps an angle increment into (-pi, pi].
inline double wrap_delta(double d) {
  double r = std::remainder(d, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

/// Distance between two angles measured along the circle.
inline double circle_distance(double a, double b) { return std::abs(wrap_delta(a - b)); }

/// A point (q, p, u) of J^1(S^1); q is kept reduced mod 2pi.
class JetPoint {
 public:
  JetPoint() = default;
  JetPoint(double q, double p, double u) : q_(reduce_angle(q)), p_(p), u_(u) {}

  double q() const { return q_; }
  double p() const { return p_; }
  double u() const { return u_; }

  friend bool operator==(const JetPoint&, const JetPoint&) = default;

 private:
  double q_ = 0.0;
  double p_ = 0.0;
  double u_ = 0.0;
};

/// Tangent vector (v_q, v_p, v_u) at a jet point.
struct JetVector {
  double dq = 0.0;
  double dp = 0.0;
  double du = 0.0;
};

/// The contact form du - p dq evaluated on a tangent vector.
inline double contact_form(const JetPoint& point, const JetVector& tangent) {
  return tangent.du - point.p() * tangent.dq;
}

/// Increment from a to b with the q-component lifted (wrapped to (-pi, pi]).
inline JetVector lifted_delta(const JetPoint& a, const JetPoint& b) {
  return {wrap_delta(b.q() - a.q()), b.p() - a.p(), b.u() - a.u()};
}

inline double norm(const JetVector& v) { return std::sqrt(v.dq * v.dq + v.dp * v.dp + v.du * v.du); }

/// Closed, cyclically ordered sampling of a Legendrian curve.
class LegendrianLoop {
 public:
  static constexpr std::size_t min_samples = 16;

  explicit LegendrianLoop(std::vector<JetPoint> samples) : samples_(std::move(samples)) {
    if (samples_.size() < min_samples)
      throw PreconditionError("a loop needs at least " + std::to_string(min_samples) +
                              " samples, got " + std::to_string(samples_.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i)
      total += wrap_delta(next(i).q() - samples_[i].q());
    winding_ = static_cast<int>(std::lround(total / two_pi));
  }

  std::size_t size() const { return samples_.size(); }
  const JetPoint& operator[](std::size_t i) const { return samples_[i]; }
  const JetPoint& next(std::size_t i) const { return samples_[(i + 1) % samples_.size()]; }
  std::span<const JetPoint> samples() const { return samples_; }
  int winding() const { return winding_; }

  /// q-coordinates unwrapped along the loop, starting at samples[0].q().
  std::vector<double> lifted_q() const {
    std::vector<double> out(samples_.size());
    out[0] = samples_[0].q();
    for (std::size_t i = 1; i < samples_.size(); ++i)
      out[i] = out[i - 1] + wrap_delta(samples_[i].q() - samples_[i - 1].q());
    return out;
  }

 private:
  std::vector<JetPoint> samples_;
  int winding_ = 0;
};

/// Frames of a Legendrian isotopy at strictly increasing times.
class Isotopy {
 public:
  Isotopy(std::vector<LegendrianLoop> frames, std::vector<double> times)
      : frames_(std::move(frames)), times_(std::move(times)) {
    if (frames_.size() != times_.size())
      throw PreconditionError("isotopy needs one time stamp per frame");
    if (frames_.size() < 2) throw PreconditionError("isotopy needs at least 2 frames");
    for (std::size_t m = 0; m < frames_.size(); ++m) {
      if (frames_[m].size() != frames_[0].size() || frames_[m].winding() != frames_[0].winding())
        throw PreconditionError("isotopy frames must share sample count and winding (frame " +
                                std::to_string(m) + ")");
      if (m > 0 && !(times_[m] > times_[m - 1]))
        throw PreconditionError("isotopy time stamps must be strictly increasing");
    }
  }

  std::size_t size() const { return frames_.size(); }
  const LegendrianLoop& frame(std::size_t m) const { return frames_[m]; }
  double time(std::size_t m) const { return times_[m]; }
  std::span<const LegendrianLoop> frames() const { return frames_; }
  std::span<const double> times() const { return times_; }

 private:
  std::vector<LegendrianLoop> frames_;
  std::vector<double> times_;
};

// ---------------------------------------------------------------------------
// Checks

/// Default Legendrian tolerance: the square of the mean q-step 2pi/n. Edge
/// residuals of a sampled smooth Legendrian curve are O(h^3); a curve that
/// is transverse to the contact planes leaves O(h) residuals.
inline double default_legendrian_tolerance(std::size_t n_samples) {
  const double h = two_pi / static_cast<double>(n_samples);
  return h * h;
}

struct LegendrianReport {
  double max_defect = 0.0;       // max over edges of |du - pbar dq|
  double max_defect_rate = 0.0;  // max over edges of the residual divided by the chord length
  std::size_t worst_edge = 0;
  bool pass = true;
};

namespace detail {

inline void require_closed(std::span<const double> chords, const char* what) {
  std::vector<double> sorted(chords.begin(), chords.end() - 1);
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double closing = chords.back();
  if (closing > 10.0 * median + 1e-9)
    throw PreconditionError(std::string(what) + " is not closed: closing edge " +
                            std::to_string(closing) + " vs median edge " + std::to_string(median));
}

}  // namespace detail

inline LegendrianReport check_legendrian(const LegendrianLoop& loop,
                                         std::optional<double> tol_leg = std::nullopt) {
  const double tol = tol_leg.value_or(default_legendrian_tolerance(loop.size()));
  const std::size_t n = loop.size();
  std::vector<double> chords(n);
  for (std::size_t i = 0; i < n; ++i) chords[i] = norm(lifted_delta(loop[i], loop.next(i)));
  detail::require_closed(chords, "loop");

  LegendrianReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const JetVector d = lifted_delta(loop[i], loop.next(i));
    const double pbar = 0.5 * (loop[i].p() + loop.next(i).p());
    const double residual = std::abs(d.du - pbar * d.dq);
    if (residual > report.max_defect) {
      report.max_defect = residual;
      report.worst_edge = i;
    }
    if (chords[i] > 0.0) report.max_defect_rate = std::max(report.max_defect_rate, residual / chords[i]);
    if (residual > tol * (1.0 + std::abs(d.dq) + std::abs(d.du))) report.pass = false;
  }
  return report;
}

struct PositivityReport {
  double min_alpha = std::numeric_limits<double>::infinity();
  std::size_t frame = 0;
  std::size_t sample = 0;
  bool pass = false;
};

/// Evaluates the contact form on finite-difference velocities of every sample
/// (centered in the interior, one-sided at the first and last frame).
inline PositivityReport check_positive_isotopy(const Isotopy& iso) {
  PositivityReport report;
  const std::size_t m_count = iso.size();
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t lo = m == 0 ? 0 : m - 1;
    const std::size_t hi = m + 1 == m_count ? m : m + 1;
    const double dt = iso.time(hi) - iso.time(lo);
    const LegendrianLoop& a = iso.frame(lo);
    const LegendrianLoop& b = iso.frame(hi);
    const LegendrianLoop& here = iso.frame(m);
    for (std::size_t i = 0; i < here.size(); ++i) {
      const JetVector d = lifted_delta(a[i], b[i]);
      const JetVector v{d.dq / dt, d.dp / dt, d.du / dt};
      const double alpha = contact_form(here[i], v);
      if (alpha < report.min_alpha) {
        report.min_alpha = alpha;
        report.frame = m;
        report.sample = i;
      }
    }
  }
  report.pass = report.min_alpha > 0.0;
  return report;
}

struct FrontPoint {
  double q = 0.0;       // reduced angle
  double q_lift = 0.0;  // unwrapped along the loop
  double u = 0.0;
};

struct Front {
  std::vector<FrontPoint> points;
  std::vector<std::size_t> cusps;  // sample indices where the q-direction reverses
};

inline Front front_projection(const LegendrianLoop& loop) {
  Front front;
  const std::vector<double> lift = loop.lifted_q();
  const std::size_t n = loop.size();
  front.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) front.points.push_back({loop[i].q(), lift[i], loop[i].u()});

  std::vector<int> sign(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = wrap_delta(loop.next(i).q() - loop[i].q());
    sign[i] = d > 0.0 ? 1 : d < 0.0 ? -1 : 0;
  }
  // Carry the last nonzero direction across stationary edges.
  int last = 0;
  for (std::size_t i = 0; i < n && last == 0; ++i) last = sign[n - 1 - i];
  for (std::size_t i = 0; i < n; ++i) {
    if (sign[i] == 0) continue;
    if (last != 0 && sign[i] != last) front.cusps.push_back(i);
    last = sign[i];
  }
  return front;
}

namespace detail {

/// Distance between segments [a, b] and [c, d] in R^3.
inline double segment_distance(const JetVector& a, const JetVector& b, const JetVector& c,
                               const JetVector& d) {
  auto sub = [](const JetVector& x, const JetVector& y) {
    return JetVector{x.dq - y.dq, x.dp - y.dp, x.du - y.du};
  };
  auto dotv = [](const JetVector& x, const JetVector& y) {
    return x.dq * y.dq + x.dp * y.dp + x.du * y.du;
  };
  const JetVector u = sub(b, a), v = sub(d, c), w = sub(a, c);
  const double A = dotv(u, u), B = dotv(u, v), C = dotv(v, v), D = dotv(u, w), E = dotv(v, w);
  const double den = A * C - B * B;
  double s = 0.0, t = 0.0;
  if (A <= 0.0 && C <= 0.0) return norm(w);
  if (A <= 0.0) {
    t = std::clamp(E / C, 0.0, 1.0);
  } else if (C <= 0.0) {
    s = std::clamp(-D / A, 0.0, 1.0);
  } else {
    s = den > 1e-300 ? std::clamp((B * E - C * D) / den, 0.0, 1.0) : 0.0;
    t = (B * s + E) / C;
    if (t < 0.0) {
      t = 0.0;
      s = std::clamp(-D / A, 0.0, 1.0);
    } else if (t > 1.0) {
      t = 1.0;
      s = std::clamp((B - D) / A, 0.0, 1.0);
    }
  }
  const JetVector gap{w.dq + s * u.dq - t * v.dq, w.dp + s * u.dp - t * v.dp,
                      w.du + s * u.du - t * v.du};
  return norm(gap);
}

}  // namespace detail

/// Smallest distance in (q, p, u), q measured on the circle, between edges
/// of the closed polygon that do not share a vertex.
inline double min_nonadjacent_distance(const LegendrianLoop& loop) {
  const std::size_t n = loop.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const JetVector a{0.0, 0.0, 0.0};
    const JetVector b = lifted_delta(loop[i], loop.next(i));
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const JetVector c = lifted_delta(loop[i], loop[j]);
      const JetVector dcd = lifted_delta(loop[j], loop.next(j));
      const JetVector d{c.dq + dcd.dq, c.dp + dcd.dp, c.du + dcd.du};
      best = std::min(best, detail::segment_distance(a, b, c, d));
    }
  }
  return best;
}

inline bool check_embedded(const LegendrianLoop& loop, double tol) {
  return min_nonadjacent_distance(loop) >= tol;
}

/// Samples j^1 f = (q, f'(q), f(q)) at n equally spaced angles.
inline LegendrianLoop one_jet(const std::function<double(double)>& f,
                              const std::function<double(double)>& df, std::size_t n) {
  std::vector<JetPoint> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = two_pi * static_cast<double>(i) / static_cast<double>(n);
    samples.emplace_back(q, df(q), f(q));
  }
  return LegendrianLoop(std::move(samples));
}

}  // namespace viterbo
