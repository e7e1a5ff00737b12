#pragma once

// Cerf diagrams of one-parameter families F_t: branches of critical values
// followed in t, with crossings, cusps and boundary tangencies; positivity
// of a family through the vertical speed dF_t/dt on the fiber-critical set;
// and the behaviour of the Viterbo numbers along the family.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "viterbo/errors.hpp"
#include "viterbo/expr.hpp"
#include "viterbo/genfam.hpp"
#include "viterbo/parallel.hpp"
#include "viterbo/spectra.hpp"

namespace viterbo {

/// F_t for t in [a, b], sampled at n_t equally spaced times.
struct FamilyPath {
  GeneratingFamily F;
  double a = 0.0;
  double b = 1.0;
  int n_t = 64;

  double time(int j) const { return n_t == 1 ? a : a + (b - a) * j / (n_t - 1); }
  GeneratingFamily at(double t) const { return F.at_time(t); }
};

// ---------------------------------------------------------------------------
// Vertical speed and positivity

/// dF_t/dt at (q, w, t0). Throws when the fiber Hessian is singular there
/// (a vertical point of the generated Legendrian).
inline double vertical_speed(const FamilyPath& path, const FiberCriticalPoint& pt, double t0,
                             double tol = 1e-9) {
  const GeneratingFamily F = path.at(t0);
  if (F.fiber_dim() > 0 && std::abs(F.fiber_hessian(pt.q, pt.w).determinant()) <= tol)
    throw PreconditionError("vertical point at q = " + std::to_string(pt.q) +
                            ": fiber Hessian is singular");
  return F.dt(pt.q, pt.w);
}

struct PositiveFamilyReport {
  double min_speed = std::numeric_limits<double>::infinity();
  double t = 0.0;
  double q = 0.0;
  bool pass = false;
};

/// Minimum of dF_t/dt over the fiber-critical sets of the sampled slices.
inline PositiveFamilyReport check_positive_family(const FamilyPath& path, int n_q = 256) {
  std::vector<PositiveFamilyReport> per_t(path.n_t);
  parallel_for(path.n_t, [&](std::size_t j) {
    const double t = path.time(static_cast<int>(j));
    const GeneratingFamily F = path.at(t);
    PositiveFamilyReport r;
    for (const auto& pt : fiber_critical_set(F, n_q).points) {
      const double s = F.dt(pt.q, pt.w);
      if (s < r.min_speed) r = {s, t, pt.q, false};
    }
    per_t[j] = r;
  });
  PositiveFamilyReport out;
  for (const auto& r : per_t)
    if (r.min_speed < out.min_speed) out = r;
  out.pass = out.min_speed > 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Viterbo numbers along a family

struct ViterboTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> curves;  // curves[k][j] = c_{k+1}(t_j)
  bool strict_increase = false;             // c_k(b) > c_k(a) for every k
  bool weakly_increasing_every_step = false;
  bool strictly_increasing_every_step = false;
  double min_step = std::numeric_limits<double>::infinity();
};

inline ViterboTrajectory viterbo_trajectory(const FamilyPath& path,
                                            const std::optional<Expr>& region = std::nullopt,
                                            const SpectrumGrid& grid = {}) {
  ViterboTrajectory out;
  std::vector<ViterboSpectrum> spectra(path.n_t);
  parallel_for(path.n_t, [&](std::size_t j) {
    const GeneratingFamily F = path.at(path.time(static_cast<int>(j)));
    spectra[j] = region ? viterbo_numbers_with_boundary(F, *region, grid) : viterbo_numbers(F, grid);
  });
  const std::size_t b = spectra.front().size();
  out.curves.assign(b, {});
  for (int j = 0; j < path.n_t; ++j) {
    out.times.push_back(path.time(j));
    if (spectra[j].size() != b) throw ConvergenceError("spectrum length changed along the path");
    for (std::size_t k = 0; k < b; ++k) out.curves[k].push_back(spectra[j][k]);
  }
  out.strict_increase = true;
  out.weakly_increasing_every_step = true;
  out.strictly_increasing_every_step = true;
  for (std::size_t k = 0; k < b; ++k) {
    if (!(out.curves[k].back() > out.curves[k].front())) out.strict_increase = false;
    for (std::size_t j = 1; j < out.curves[k].size(); ++j) {
      const double step = out.curves[k][j] - out.curves[k][j - 1];
      out.min_step = std::min(out.min_step, step);
      if (step < 0.0) out.weakly_increasing_every_step = false;
      if (!(step > 0.0)) out.strictly_increasing_every_step = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cerf diagrams

enum class EventKind { crossing, cusp, boundary_tangency };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::crossing: return "crossing";
    case EventKind::cusp: return "cusp";
    case EventKind::boundary_tangency: return "boundary_tangency";
  }
  return "?";
}

struct CerfEvent {
  double t = 0.0;
  EventKind kind = EventKind::crossing;
  double q = 0.0;
  double z = 0.0;
};

struct BranchSample {
  double t = 0.0;
  double z = 0.0;
  double q = 0.0;
  std::vector<double> w;
};

struct CerfBranch {
  int id = 0;
  bool boundary = false;  // follows a critical point of F on a boundary fiber
  std::vector<BranchSample> samples;
};

struct CerfDiagram {
  std::vector<CerfBranch> branches;
  std::vector<CerfEvent> events;
  std::vector<double> times;     // every slice time used, including refinements
  std::vector<std::string> warnings;
  double dt = 0.0;               // base sampling step
};

struct CerfOptions {
  int n_q = 512;
  /// Treat every slice as a fiber problem over this single base angle; for
  /// toy families that do not depend on q.
  std::optional<double> frozen_q;
  int max_refinement = 3;
};

namespace detail {

struct SlicePoint {
  double q = 0.0;
  std::vector<double> w;
  double z = 0.0;
  bool boundary = false;
};

struct Slice {
  double t = 0.0;
  std::vector<SlicePoint> points;
};

inline Slice compute_slice(const FamilyPath& path, double t, const std::optional<Expr>& region,
                           const BaseGraph* base, const CerfOptions& opt) {
  const GeneratingFamily F = path.at(t);
  Slice s;
  s.t = t;
  if (opt.frozen_q) {
    for (const auto& pt : fiber_critical_points_at(F, *opt.frozen_q))
      s.points.push_back({pt.q, pt.w, pt.value, false});
    return s;
  }
  for (const auto& pt : critical_points(F, opt.n_q)) {
    if (region && !(eval_base(*region, pt.q) > 0.0)) continue;
    s.points.push_back({pt.q, pt.w, pt.value, false});
  }
  if (base) {
    for (double qb : base->boundary_points)
      for (const auto& pt : fiber_critical_points_at(F, qb))
        s.points.push_back({pt.q, pt.w, pt.value, true});
  }
  return s;
}

inline double match_cost(const SlicePoint& a, const SlicePoint& b) {
  double c = std::abs(a.z - b.z) + circle_distance(a.q, b.q);
  for (std::size_t i = 0; i < a.w.size(); ++i) c += std::abs(a.w[i] - b.w[i]);
  return c;
}

struct Matching {
  std::vector<int> next;  // for each point of the earlier slice, index in the later one or -1
  bool ambiguous = false;
};

/// Greedy nearest matching; a pair costing more than 5x the median accepted
/// cost plus `slack` is rejected and the step flagged as ambiguous.
inline Matching match_slices(const Slice& a, const Slice& b, double slack) {
  struct Cand {
    double cost;
    int i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    for (std::size_t j = 0; j < b.points.size(); ++j)
      if (a.points[i].boundary == b.points[j].boundary)
        cands.push_back({match_cost(a.points[i], b.points[j]), static_cast<int>(i), static_cast<int>(j)});
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  Matching m;
  m.next.assign(a.points.size(), -1);
  std::vector<bool> used(b.points.size(), false);
  std::vector<double> costs;
  std::vector<Cand> chosen;
  for (const Cand& c : cands) {
    if (m.next[c.i] >= 0 || used[c.j]) continue;
    m.next[c.i] = c.j;
    used[c.j] = true;
    chosen.push_back(c);
    costs.push_back(c.cost);
  }
  if (!costs.empty()) {
    std::nth_element(costs.begin(), costs.begin() + costs.size() / 2, costs.end());
    const double threshold = 5.0 * costs[costs.size() / 2] + slack;
    for (const Cand& c : chosen) {
      if (c.cost > threshold) {
        m.next[c.i] = -1;
        m.ambiguous = true;
      }
    }
  }
  if (a.points.size() != b.points.size()) m.ambiguous = true;
  return m;
}

struct Endpoint {
  double t;
  double q;
  double z;
  bool birth;
};

}  // namespace detail

/// Follows the critical values of F_t across the sampled times. With a
/// region function f the diagram lives over M = {f >= 0} and also carries
/// the boundary branches.
inline CerfDiagram cerf_diagram(const FamilyPath& path, const std::optional<Expr>& region = std::nullopt,
                                const CerfOptions& opt = {}) {
  if (path.n_t < 32) throw PreconditionError("a Cerf diagram needs n_t >= 32");
  std::optional<BaseGraph> base;
  if (region) base = region_graph(*region, opt.n_q);
  const BaseGraph* base_ptr = base ? &*base : nullptr;

  std::vector<detail::Slice> slices(path.n_t);
  parallel_for(path.n_t, [&](std::size_t j) {
    slices[j] = detail::compute_slice(path, path.time(static_cast<int>(j)), region, base_ptr, opt);
  });

  CerfDiagram out;
  out.dt = (path.b - path.a) / (path.n_t - 1);
  std::vector<detail::Endpoint> ends;
  std::vector<int> owner;  // branch index of each point of the current slice

  auto open_branch = [&](const detail::SlicePoint& p, double t) {
    CerfBranch br;
    br.id = static_cast<int>(out.branches.size());
    br.boundary = p.boundary;
    br.samples.push_back({t, p.z, p.q, p.w});
    out.branches.push_back(std::move(br));
    return static_cast<int>(out.branches.size()) - 1;
  };

  out.times.push_back(slices[0].t);
  for (const auto& p : slices[0].points) owner.push_back(open_branch(p, slices[0].t));

  // Advances the current slice `cur` to `nxt`, halving the step on ambiguity.
  std::function<void(const detail::Slice&, const detail::Slice&, int)> advance =
      [&](const detail::Slice& cur, const detail::Slice& nxt, int depth) {
        // Slack: what a branch of moderate slope may move in one step.
        const double slack = 4.0 * std::abs(nxt.t - cur.t) + 2.0 * two_pi / opt.n_q;
        detail::Matching m = detail::match_slices(cur, nxt, slack);
        if (m.ambiguous && depth < opt.max_refinement) {
          const detail::Slice mid =
              detail::compute_slice(path, 0.5 * (cur.t + nxt.t), region, base_ptr, opt);
          advance(cur, mid, depth + 1);
          advance(mid, nxt, depth + 1);
          return;
        }
        if (m.ambiguous && cur.points.size() == nxt.points.size())
          out.warnings.push_back("unresolved branch matching near t = " + std::to_string(nxt.t));
        std::vector<int> next_owner(nxt.points.size(), -1);
        for (std::size_t i = 0; i < cur.points.size(); ++i) {
          if (m.next[i] >= 0) {
            const auto& p = nxt.points[m.next[i]];
            out.branches[owner[i]].samples.push_back({nxt.t, p.z, p.q, p.w});
            next_owner[m.next[i]] = owner[i];
          } else {
            const auto& p = cur.points[i];
            if (!p.boundary) ends.push_back({cur.t, p.q, p.z, false});
          }
        }
        for (std::size_t j = 0; j < nxt.points.size(); ++j) {
          if (next_owner[j] >= 0) continue;
          const auto& p = nxt.points[j];
          next_owner[j] = open_branch(p, nxt.t);
          if (!p.boundary) ends.push_back({nxt.t, p.q, p.z, true});
        }
        owner = std::move(next_owner);
        out.times.push_back(nxt.t);
      };
  for (int j = 0; j + 1 < path.n_t; ++j) advance(slices[j], slices[j + 1], 0);

  // Births and deaths: near the boundary of M they are tangencies, otherwise
  // cusps; ends within two base steps and 0.25 in q are one event.
  const double near_boundary = 2.0 * two_pi / opt.n_q + 1e-9;
  std::vector<bool> consumed(ends.size(), false);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (consumed[i]) continue;
    consumed[i] = true;
    CerfEvent ev{ends[i].t, EventKind::cusp, ends[i].q, ends[i].z};
    for (std::size_t k = i + 1; k < ends.size(); ++k) {
      if (!consumed[k] && std::abs(ends[k].t - ends[i].t) <= 2.0 * out.dt + 1e-12 &&
          circle_distance(ends[k].q, ends[i].q) <= 0.25) {
        consumed[k] = true;
        if (ends[k].t < ev.t) ev.t = ends[k].t;
      }
    }
    if (base) {
      for (double qb : base->boundary_points)
        if (circle_distance(qb, ev.q) <= near_boundary) ev.kind = EventKind::boundary_tangency;
    }
    out.events.push_back(ev);
  }

  // Crossings: sign changes of the difference of two branches on shared times.
  const double scale = 1e-9;
  for (std::size_t a = 0; a < out.branches.size(); ++a) {
    for (std::size_t b = a + 1; b < out.branches.size(); ++b) {
      const auto& A = out.branches[a].samples;
      const auto& B = out.branches[b].samples;
      std::size_t i = 0, j = 0;
      double prev_d = 0.0, prev_t = 0.0, prev_z = 0.0;
      bool have_prev = false;
      while (i < A.size() && j < B.size()) {
        if (A[i].t < B[j].t) {
          ++i;
          have_prev = false;
          continue;
        }
        if (B[j].t < A[i].t) {
          ++j;
          have_prev = false;
          continue;
        }
        const double d = A[i].z - B[j].z;
        const double tol = scale * (1.0 + std::abs(A[i].z));
        if (have_prev && std::abs(d) > tol && std::abs(prev_d) > tol && (d > 0) != (prev_d > 0)) {
          const double s = prev_d / (prev_d - d);
          const double t = prev_t + s * (A[i].t - prev_t);
          out.events.push_back({t, EventKind::crossing, A[i].q, prev_z + s * (A[i].z - prev_z)});
        }
        if (std::abs(d) > tol) {
          prev_d = d;
          prev_t = A[i].t;
          prev_z = A[i].z;
          have_prev = true;
        }
        ++i;
        ++j;
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(),
            [](const CerfEvent& x, const CerfEvent& y) { return x.t < y.t; });
  return out;
}

struct SlopeReport {
  double min_slope = std::numeric_limits<double>::infinity();
  double max_slope = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  std::optional<bool> pass;  // no verdict unless the path was certified positive
};

/// Finite-difference slopes along every branch, skipping segments within two
/// base steps of an event.
inline SlopeReport slope_check(const CerfDiagram& d, bool positive) {
  SlopeReport r;
  const double radius = 2.0 * d.dt + 1e-12;
  auto near_event = [&](double t) {
    for (const auto& e : d.events)
      if (std::abs(e.t - t) <= radius) return true;
    return false;
  };
  for (const auto& br : d.branches) {
    for (std::size_t i = 1; i < br.samples.size(); ++i) {
      const auto& p = br.samples[i - 1];
      const auto& c = br.samples[i];
      if (near_event(p.t) || near_event(c.t)) continue;
      const double s = (c.z - p.z) / (c.t - p.t);
      r.min_slope = std::min(r.min_slope, s);
      r.max_slope = std::max(r.max_slope, s);
      ++r.checked;
    }
  }
  if (positive) r.pass = r.checked == 0 || r.min_slope > 0.0;
  return r;
}

}  // namespace viterbo
