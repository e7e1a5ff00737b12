#pragma once

// Shared helpers for the test suites: random expressions and trig
// polynomials, and brute-force oracles that do not touch the library's
// filtration code.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "viterbo/expr.hpp"
#include "viterbo/jet_space.hpp"

namespace viterbo::testing {

/// Random expression over q, t, w1, w2 whose values stay moderate on [-1, 1].
class RandomExpr {
 public:
  explicit RandomExpr(unsigned seed) : rng_(seed) {}

  Expr operator()(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 11);
    switch (pick(rng_)) {
      case 0: return Expr::constant(std::round(uniform(-3, 3) * 100) / 100);
      case 1: return Expr::variable(variable());
      case 2: return Expr::binary(Op::add, (*this)(depth - 1), (*this)(depth - 1));
      case 3: return Expr::binary(Op::sub, (*this)(depth - 1), (*this)(depth - 1));
      case 4:
      case 5: return Expr::binary(Op::mul, (*this)(depth - 1), (*this)(depth - 1));
      case 6: {
        // Denominator bounded away from zero.
        Expr den = Expr::binary(Op::add, Expr::constant(2.0), Expr::unary(Op::cos, (*this)(depth - 1)));
        return Expr::binary(Op::div, (*this)(depth - 1), den);
      }
      case 7: {
        std::uniform_int_distribution<int> e(-2, 3);
        const int n = e(rng_);
        if (n < 0)
          return Expr::power(
              Expr::binary(Op::add, Expr::constant(1.5), Expr::unary(Op::sin, (*this)(depth - 1))), n);
        return Expr::power((*this)(depth - 1), n);
      }
      case 8: return Expr::unary(Op::neg, (*this)(depth - 1));
      case 9: return Expr::unary(Op::sin, (*this)(depth - 1));
      case 10: return Expr::unary(Op::cos, (*this)(depth - 1));
      default: return Expr::unary(Op::exp, Expr::unary(Op::sin, (*this)(depth - 1)));
    }
  }

  Variable variable() {
    std::uniform_int_distribution<int> pick(0, 3);
    switch (pick(rng_)) {
      case 0: return Variable::base();
      case 1: return Variable::time();
      case 2: return Variable::fiber(1);
      default: return Variable::fiber(2);
    }
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};

/// a0 + sum_k (a_k cos kq + b_k sin kq) as expression text.
inline std::string random_trig_polynomial(std::mt19937& rng, int max_degree) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(1, max_degree);
  const int d = deg(rng);
  std::string s = std::to_string(coef(rng));
  for (int k = 1; k <= d; ++k) {
    s += "+" + std::to_string(coef(rng)) + "*cos(" + std::to_string(k) + "*q)";
    s += "+" + std::to_string(coef(rng)) + "*sin(" + std::to_string(k) + "*q)";
  }
  return s;
}

/// Number of connected components of {f <= c} sampled on a circle, counted
/// directly from the sample signs (brute-force sublevel Betti-0).
inline int sublevel_components(const std::vector<double>& values, double c) {
  const std::size_t n = values.size();
  std::vector<bool> in(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = values[i] <= c;
  if (std::all_of(in.begin(), in.end(), [](bool b) { return b; })) return 1;
  int runs = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (in[i] && !in[(i + n - 1) % n]) ++runs;
  return runs;
}

/// Minimum of a function over [a, b] by dense sampling plus golden-section polish.
template <typename Fn>
double dense_minimum(Fn f, double a, double b, int samples = 20000) {
  double best = f(a);
  double arg = a;
  for (int i = 0; i <= samples; ++i) {
    const double x = a + (b - a) * i / samples;
    const double v = f(x);
    if (v < best) {
      best = v;
      arg = x;
    }
  }
  double lo = std::max(a, arg - (b - a) / samples), hi = std::min(b, arg + (b - a) / samples);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (f(x1) < f(x2)) hi = x2; else lo = x1;
  }
  return std::min(best, f(0.5 * (lo + hi)));
}

}  // namespace viterbo::testing
