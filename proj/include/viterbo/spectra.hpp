#pragma once

// Viterbo numbers c_k(F) and their boundary-relative version c_{k,M}(F),
// M = {f >= 0}, from the persistent homology of the lower-star filtration of
// F on a cubical grid over (S^1 or M) x [-R, R]^K, relative to F^{-C}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "viterbo/errors.hpp"
#include "viterbo/expr.hpp"
#include "viterbo/genfam.hpp"
#include "viterbo/jet_space.hpp"
#include "viterbo/parallel.hpp"
#include "viterbo/persistence.hpp"

namespace viterbo {

// ---------------------------------------------------------------------------
// Base graphs: the circle or a union of arcs of it

struct BaseNode {
  double q = 0.0;
  bool boundary = false;
};

struct BaseGraph {
  std::vector<BaseNode> nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  int arcs = 0;  // 0 for the whole circle
  std::vector<double> boundary_points;

  bool whole_circle() const { return arcs == 0; }
  /// Total Betti number over the two-element field.
  int betti() const { return whole_circle() ? 2 : arcs; }
};

inline BaseGraph circle_graph(int n_q) {
  if (n_q < 3) throw PreconditionError("circle graph needs at least 3 nodes");
  BaseGraph g;
  for (int i = 0; i < n_q; ++i) {
    g.nodes.push_back({two_pi * i / n_q, false});
    g.edges.emplace_back(i, (i + 1) % n_q);
  }
  return g;
}

namespace detail {

inline void require_base_only(const Expr& f) {
  for (const Variable& v : free_variables(f))
    if (v.kind != VarKind::q)
      throw PreconditionError("region function may only depend on q, found " + v.name());
}

inline double eval_base(const Expr& f, double q) { return eval(f, Point{q, 0.0, 0.0, {}}); }

/// Root of f on [a, b] given f(a) > 0 >= f(b) (or the reverse), by bisection.
inline double bisect_root(const Expr& f, double a, double b) {
  const bool a_positive = eval_base(f, a) > 0.0;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    if ((eval_base(f, m) > 0.0) == a_positive)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// The set {f >= 0} as a graph: grid nodes where f > 0 plus the exact arc
/// endpoints, which carry the boundary flag. Throws if 0 is not a regular
/// value on the grid or the region is empty.
inline BaseGraph region_graph(const Expr& f, int n_q, double tol_regular = 1e-9) {
  if (n_q < 64) throw PreconditionError("region grid needs n_q >= 64");
  detail::require_base_only(f);
  const Expr df = differentiate(f, Variable::base());
  std::vector<double> q(n_q), v(n_q);
  for (int i = 0; i < n_q; ++i) {
    q[i] = two_pi * i / n_q;
    v[i] = detail::eval_base(f, q[i]);
    if (std::abs(v[i]) < tol_regular && std::abs(detail::eval_base(df, q[i])) < tol_regular)
      throw PreconditionError("0 is not a regular value of the region function near q = " +
                              std::to_string(q[i]));
  }
  const auto inside = [&](int i) { return v[((i % n_q) + n_q) % n_q] > 0.0; };
  int first_out = -1;
  for (int i = 0; i < n_q; ++i)
    if (!inside(i)) {
      first_out = i;
      break;
    }
  if (first_out < 0) return circle_graph(n_q);

  BaseGraph g;
  const double h = two_pi / n_q;
  for (int k = 1; k <= n_q; ++k) {
    const int i = first_out + k;
    if (!inside(i) || inside(i - 1)) continue;
    // An arc starts between i - 1 and i; walk to its end.
    int j = i;
    while (inside(j + 1)) ++j;
    const double lo = detail::bisect_root(f, (i - 1) * h, i * h);
    const double hi = detail::bisect_root(f, j * h, (j + 1) * h);
    const auto start = static_cast<std::uint32_t>(g.nodes.size());
    g.nodes.push_back({reduce_angle(lo), true});
    for (int m = i; m <= j; ++m) {
      if (m * h - lo < 1e-12 || hi - m * h < 1e-12) continue;
      g.nodes.push_back({reduce_angle(m * h), false});
    }
    g.nodes.push_back({reduce_angle(hi), true});
    for (auto a = start; a + 1 < g.nodes.size(); ++a) g.edges.emplace_back(a, a + 1);
    g.boundary_points.push_back(reduce_angle(lo));
    g.boundary_points.push_back(reduce_angle(hi));
    ++g.arcs;
  }
  if (g.arcs == 0) throw PreconditionError("region {f >= 0} is empty on the grid");
  return g;
}

/// Total Betti number of {f >= 0} over the two-element field.
inline int betti_of_region(const Expr& f, int n_q = 1024) { return region_graph(f, n_q).betti(); }

// ---------------------------------------------------------------------------
// Product cubical complex and its filtration

struct FiltrationBounds {
  double C = 0.0;  // cells with all values <= -C form the relative subcomplex
  double A = 0.0;
};

struct SpectrumGrid {
  int n_q = 256;
  int n_w = 33;  // points per fiber axis, odd so that w = 0 is a node
};

/// Lower-star filtration of F on base x fiber grid, with the relative
/// subcomplex already quotiented out. Each cell remembers the grid vertex
/// attaining its value.
struct ProductFiltration {
  FilteredComplex complex;
  std::vector<std::uint32_t> witness;  // per position: vertex id
  BaseGraph base;
  int fiber_dim = 0;
  int n_w = 1;
  double R = 0.0;
  FiltrationBounds bounds;

  std::size_t vertices_per_node() const {
    std::size_t m = 1;
    for (int a = 0; a < fiber_dim; ++a) m *= n_w;
    return m;
  }
  double vertex_q(std::uint32_t v) const { return base.nodes[v / vertices_per_node()].q; }
  bool vertex_on_boundary(std::uint32_t v) const {
    return base.nodes[v / vertices_per_node()].boundary;
  }
  std::vector<double> vertex_w(std::uint32_t v) const {
    std::vector<double> w(fiber_dim);
    std::size_t r = v % vertices_per_node();
    for (int a = 0; a < fiber_dim; ++a) {
      const int idx = static_cast<int>(r % n_w);
      r /= n_w;
      w[a] = n_w == 1 ? 0.0 : -R + 2.0 * R * idx / (n_w - 1);
    }
    return w;
  }
};

inline ProductFiltration build_filtration(const GeneratingFamily& F, BaseGraph base, int n_w) {
  const int K = F.fiber_dim();
  if (K > 0 && n_w < 33) throw PreconditionError("need n_w >= 33 points per fiber axis");
  if (K > 0 && n_w % 2 == 0) throw PreconditionError("n_w must be odd");
  if (K == 0) n_w = 1;
  if (base.nodes.empty()) throw PreconditionError("empty base region");

  ProductFiltration out;
  out.fiber_dim = K;
  out.n_w = n_w;
  out.R = F.bound_radius();

  const std::size_t N = base.nodes.size();
  const std::size_t E = base.edges.size();
  std::size_t V = 1, M = 1;  // fiber vertices and fiber cells per base cell
  const std::size_t m = K > 0 ? static_cast<std::size_t>(2 * n_w - 1) : 1;
  for (int a = 0; a < K; ++a) {
    V *= n_w;
    M *= m;
  }
  out.base = std::move(base);
  const BaseGraph& B = out.base;

  // Vertex values and the bound C.
  std::vector<double> vval(N * V), gabs(N * V);
  parallel_for(N, [&](std::size_t node) {
    std::vector<double> w(K);
    for (std::size_t r = 0; r < V; ++r) {
      std::size_t x = r;
      for (int a = 0; a < K; ++a) {
        w[a] = -out.R + 2.0 * out.R * static_cast<double>(x % n_w) / (n_w - 1);
        x /= n_w;
      }
      vval[node * V + r] = F.value(B.nodes[node].q, w);
      gabs[node * V + r] = std::abs(F.bounded_value(B.nodes[node].q, w));
    }
  });
  const double sup_g = *std::max_element(gabs.begin(), gabs.end());
  // The R^2 term keeps -C below every fiber-critical value when Q has
  // negative directions; for K = 0 it vanishes.
  out.bounds.C = 2.0 * sup_g + 1.0 + out.R * out.R;
  out.bounds.A = out.bounds.C;

  std::vector<std::size_t> stride(K);
  for (int a = 0; a < K; ++a) stride[a] = a == 0 ? 1 : stride[a - 1] * m;
  std::vector<bool> negative(K);
  for (int a = 0; a < K; ++a) negative[a] = F.q_signs()[a] < 0;

  const std::size_t total = (N + E) * M;
  std::vector<double> cval(total);
  std::vector<std::uint32_t> carg(total);
  std::vector<std::uint8_t> cdim(total);
  std::vector<std::uint8_t> relative(total);
  parallel_for(N + E, [&](std::size_t bc) {
    std::uint32_t ends[2];
    int n_ends = 1;
    if (bc < N) {
      ends[0] = static_cast<std::uint32_t>(bc);
    } else {
      ends[0] = B.edges[bc - N].first;
      ends[1] = B.edges[bc - N].second;
      n_ends = 2;
    }
    std::vector<std::size_t> lo(K), hi(K);
    for (std::size_t fc = 0; fc < M; ++fc) {
      const std::size_t id = bc * M + fc;
      int dim = n_ends - 1;
      bool on_negative_face = false;
      std::size_t x = fc;
      for (int a = 0; a < K; ++a) {
        const std::size_t d = x % m;
        x /= m;
        lo[a] = d / 2;
        hi[a] = (d + 1) / 2;
        if (d % 2) ++dim;
        if (negative[a] && d % 2 == 0 && (d == 0 || d == m - 1)) on_negative_face = true;
      }
      double best = -std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      // Enumerate the 2^(#odd) fiber corners for each base end.
      for (int e = 0; e < n_ends; ++e) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << K); ++mask) {
          std::size_t r = 0, scale = 1;
          bool dup = false;
          for (int a = 0; a < K; ++a) {
            const bool up = (mask >> a) & 1;
            if (up && lo[a] == hi[a]) dup = true;
            r += (up ? hi[a] : lo[a]) * scale;
            scale *= n_w;
          }
          if (dup) continue;
          const auto v = static_cast<std::uint32_t>(ends[e] * V + r);
          if (vval[v] > best || (vval[v] == best && v < arg)) {
            best = vval[v];
            arg = v;
          }
        }
      }
      cval[id] = best;
      carg[id] = arg;
      cdim[id] = static_cast<std::uint8_t>(dim);
      relative[id] = on_negative_face || best <= -out.bounds.C;
    }
  });

  std::vector<std::uint32_t> order;
  order.reserve(total);
  for (std::size_t id = 0; id < total; ++id)
    if (!relative[id]) order.push_back(static_cast<std::uint32_t>(id));
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (cval[a] != cval[b]) return cval[a] < cval[b];
    if (cdim[a] != cdim[b]) return cdim[a] < cdim[b];
    return a < b;
  });
  constexpr std::uint32_t absent = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> position(total, absent);
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<std::uint32_t>(i);

  FilteredComplex& X = out.complex;
  X.values.reserve(order.size());
  X.dims.reserve(order.size());
  X.offsets.reserve(order.size() + 1);
  out.witness.reserve(order.size());
  std::vector<std::uint32_t> bd;
  for (std::uint32_t id : order) {
    bd.clear();
    const std::size_t bc = id / M, fc = id % M;
    auto push = [&](std::size_t face) {
      if (position[face] != absent) bd.push_back(position[face]);
    };
    if (bc >= N) {
      push(B.edges[bc - N].first * M + fc);
      push(B.edges[bc - N].second * M + fc);
    }
    std::size_t x = fc;
    for (int a = 0; a < K; ++a) {
      const std::size_t d = x % m;
      x /= m;
      if (d % 2) {
        push(bc * M + fc - stride[a]);
        push(bc * M + fc + stride[a]);
      }
    }
    X.add_cell(cval[id], cdim[id], bd);
    out.witness.push_back(carg[id]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectra

struct SpectralValue {
  double value = 0.0;
  int degree = 0;  // homology degree after the shift by ind Q
  bool boundary = false;  // witness vertex lies on the boundary of the region
  double q = 0.0;
  std::vector<double> w;
};

struct ViterboSpectrum {
  std::vector<SpectralValue> values;  // c_1 <= ... <= c_b
  int index = 0;
  FiltrationBounds bounds;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k].value; }
};

inline ViterboSpectrum spectrum_of(const ProductFiltration& pf, int index) {
  const PersistenceDiagram dgm = persistence(pf.complex);
  const int b = pf.base.betti();
  if (static_cast<int>(dgm.essentials.size()) != b)
    throw ConvergenceError("found " + std::to_string(dgm.essentials.size()) +
                           " essential classes, expected " + std::to_string(b) +
                           "; refine the grid or check the bound radius");
  ViterboSpectrum s;
  s.index = index;
  s.bounds = pf.bounds;
  for (const EssentialClass& e : dgm.essentials) {
    const std::uint32_t v = pf.witness[e.cell];
    s.values.push_back({e.birth, e.dim - index, pf.vertex_on_boundary(v), pf.vertex_q(v),
                        pf.vertex_w(v)});
  }
  std::stable_sort(s.values.begin(), s.values.end(),
                   [](const auto& a, const auto& b) { return a.value < b.value; });
  return s;
}

inline ViterboSpectrum viterbo_numbers(const GeneratingFamily& F, const SpectrumGrid& grid = {}) {
  if (grid.n_q < 64) throw PreconditionError("spectrum needs n_q >= 64");
  return spectrum_of(build_filtration(F, circle_graph(grid.n_q), grid.n_w), F.index());
}

inline ViterboSpectrum viterbo_numbers_with_boundary(const GeneratingFamily& F, const Expr& f,
                                                     const SpectrumGrid& grid = {}) {
  return spectrum_of(build_filtration(F, region_graph(f, grid.n_q), grid.n_w), F.index());
}

// ---------------------------------------------------------------------------
// Generalized critical values

enum class CriticalKind { interior, boundary };

struct GeneralizedCriticalValue {
  double value = 0.0;
  CriticalKind kind = CriticalKind::interior;
  double q = 0.0;
  std::vector<double> w;
  bool nondegenerate = true;
};

/// Critical values of F on {f >= 0} x R^K together with the critical values
/// of F restricted to each boundary fiber, sorted by value.
inline std::vector<GeneralizedCriticalValue> generalized_critical_values(const GeneratingFamily& F,
                                                                         const Expr& f,
                                                                         int n_q = 1024) {
  const BaseGraph region = region_graph(f, n_q);
  const double h0 = two_pi / n_q;
  std::vector<GeneralizedCriticalValue> out;
  for (const CriticalCurve& curve : trace_critical_curves(F, n_q)) {
    for (const CriticalPoint& pt : critical_points_on_curves(F, {curve}, h0)) {
      bool in_region = detail::eval_base(f, pt.q) > 0.0;
      if (pt.whole_curve) {
        for (double q : curve.q_lift) in_region = in_region || detail::eval_base(f, q) >= 0.0;
      }
      if (in_region) out.push_back({pt.value, CriticalKind::interior, pt.q, pt.w, pt.nondegenerate});
    }
  }
  for (double qb : region.boundary_points) {
    for (const FiberCriticalPoint& pt : fiber_critical_points_at(F, qb))
      out.push_back({pt.value, CriticalKind::boundary, pt.q, pt.w, std::abs(pt.hessian_det) > 1e-9});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.q < b.q;
  });
  return out;
}

}  // namespace viterbo
