// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion with
// the measured quantities and wall time; exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "viterbo/cerf.hpp"
#include "viterbo/genfam.hpp"
#include "viterbo/hodograph.hpp"
#include "viterbo/scenarios.hpp"
#include "viterbo/spectra.hpp"

using namespace viterbo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void check(int id, const char* name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0 && secs >= time_limit_s) {
    o.pass = false;
    o.detail += fmt("; over time limit %.0f s", time_limit_s);
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %-34s %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

GeneratingFamily fam(const std::string& g, std::vector<int> signs = {}) {
  return GeneratingFamily::from_text(g, std::move(signs));
}

}  // namespace

int main() {
  check(1, "support function spectrum", 1.0, [] {
    const int n = 4096;
    const auto s = viterbo_numbers(fam("3*cos(q) + 4*sin(q)"), {n, 33});
    const double tol = 2 * (two_pi / n) * 5.0;
    Outcome o;
    o.pass = s.size() == 2 && std::abs(s[0] + 5) <= tol && std::abs(s[1] - 5) <= tol;
    o.detail = "c1=" + fmt("%.6f", s[0]) + " c2=" + fmt("%.6f", s[1]) + " tol=" + fmt("%.4f", tol);
    return o;
  });

  check(2, "zero function spectrum", 0, [] {
    const auto s = viterbo_numbers(fam("0"));
    Outcome o;
    o.pass = s.size() == 2 && s[0] == 0.0 && s[1] == 0.0;
    o.detail = "c1=" + fmt("%g", s[0]) + " c2=" + fmt("%g", s[1]);
    return o;
  });

  check(3, "K=0 min/max equivalence", 5.0, [] {
    std::mt19937 rng(20240501);
    const int n = 256;
    int agree = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const auto F = fam(testing::random_trig_polynomial(rng, 5));
      const auto s = viterbo_numbers(F, {n, 33});
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int j = 0; j < n; ++j) {
        const double v = F.value(two_pi * j / n, {});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      agree += s.size() == 2 && s[0] == lo && s[1] == hi;
    }
    return Outcome{agree == 50, std::to_string(agree) + "/50 exact"};
  });

  check(4, "stabilization by +-w^2", 60.0, [] {
    std::mt19937 rng(777);
    double worst = 0.0;
    bool degrees = true;
    for (int trial = 0; trial < 10; ++trial) {
      const std::string g = testing::random_trig_polynomial(rng, 4);
      const auto base = viterbo_numbers(fam(g));
      for (int sign : {1, -1}) {
        const auto s = viterbo_numbers(fam(g, {sign}), {256, 129});
        if (s.size() != 2) return Outcome{false, "wrong number of values"};
        for (int k = 0; k < 2; ++k) {
          worst = std::max(worst, std::abs(s[k] - base[k]));
          degrees &= s.values[k].degree == k;
        }
      }
    }
    return Outcome{worst <= 0.02 && degrees, "max |dc|=" + fmt("%.2e", worst) + " tol=0.02"};
  });

  check(5, "monotonicity along positive path", 0, [] {
    const FamilyPath path{fam("cos(q) + t*(2 + sin(q))"), 0.0, 1.0, 64};
    const auto pos = check_positive_family(path);
    const auto tr = viterbo_trajectory(path);
    double lo = 1e300, hi = -1e300;
    for (const auto& c : tr.curves) {
      lo = std::min(lo, c.back() - c.front());
      hi = std::max(hi, c.back() - c.front());
    }
    Outcome o;
    o.pass = pos.pass && pos.min_speed == 1.0 && tr.strictly_increasing_every_step && lo >= 1.0 &&
             hi <= 3.0;
    o.detail = "min_speed=" + fmt("%g", pos.min_speed) + " increase in [" + fmt("%.4f", lo) + ", " +
               fmt("%.4f", hi) + "]" + (tr.strictly_increasing_every_step ? " strict every step" : " NOT strict");
    return o;
  });

  check(6, "positive loop of embeddings", 5.0, [] {
    const Isotopy iso = build_positive_loop(0.1);
    const auto pos = check_positive_isotopy(iso);
    double defect = 0.0, gap = 1e300, scale = 0.0;
    bool legendrian = true;
    for (const auto& fr : iso.frames()) {
      const auto r = check_legendrian(fr);
      defect = std::max(defect, r.max_defect);
      legendrian &= r.pass;
      gap = std::min(gap, min_nonadjacent_distance(fr));
      for (const auto& pt : fr.samples()) scale = std::max({scale, std::abs(pt.p()), std::abs(pt.u())});
    }
    const double closure = frame_distance(iso.frame(0), iso.frame(iso.size() - 1));
    const double machine = 16 * std::numeric_limits<double>::epsilon() * (two_pi + scale);
    Outcome o;
    o.pass = pos.min_alpha >= 0.1 && legendrian && defect < 1e-6 && gap > 1e-6 && closure <= machine;
    o.detail = "min_alpha=" + fmt("%.4f", pos.min_alpha) + " defect=" + fmt("%.1e", defect) +
               " min_gap=" + fmt("%.3f", gap) + " closure=" + fmt("%.1e", closure);
    return o;
  });

  check(7, "Lambda_k counts for j1(1)", 0, [] {
    const auto L = one_jet([](double) { return 1.0; }, [](double) { return 0.0; }, 512);
    std::string counts;
    bool ok = true;
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const auto r = lambda_k_intersections(L, k);
      ok &= r.count == static_cast<std::size_t>(2 * k) && !r.has_tangential && !r.degenerate;
      for (const auto& p : r.points) worst = std::max(worst, p.residual);
      counts += (k > 1 ? "," : "") + std::to_string(r.count);
    }
    return Outcome{ok && worst < 1e-8, "counts=" + counts + " max_residual=" + fmt("%.1e", worst)};
  });

  check(8, "lambda-scan on three arcs", 30.0, [] {
    const auto s = lambda_scan(fam("2 + 0.3*sin(q)"), parse("cos(3*q)", 0), 10.0, 2000);
    bool start = true, end = true, oracle = true;
    for (const auto& c : s.curves) {
      start &= c.front() > 0.0;
      end &= c.back() < 0.0;
    }
    double worst = 0.0;
    for (const auto& x : s.crossings) {
      oracle &= x.verified && x.interior && x.residual <= 1e-6;
      worst = std::max(worst, x.residual);
    }
    std::string ls;
    for (double l : s.distinct_lambdas) ls += (ls.empty() ? "" : ",") + fmt("%.6f", l);
    Outcome o;
    o.pass = s.betti == 3 && s.distinct_lambdas.size() == 3 && oracle && start && end &&
             std::all_of(s.distinct_lambdas.begin(), s.distinct_lambdas.end(), [](double l) { return l > 0; });
    o.detail = "b=" + std::to_string(s.betti) + " lambda*={" + ls + "} max_residual=" + fmt("%.1e", worst);
    return o;
  });

  check(9, "two points for a raised fiber", 0, [] {
    const FamilyPath raise{fam("t"), 0.0, 1.0, 32};
    const auto r = theorem5_experiment({0.0, 0.0}, {1.0, 0.0}, raise);
    int plus = 0, minus = 0;
    for (const auto& p : r.points) (p.side > 0 ? plus : minus) += 1;
    return Outcome{r.count == 2 && plus == 1 && minus == 1,
                   "count=" + std::to_string(r.count) + " (+f: " + std::to_string(plus) +
                       ", -f: " + std::to_string(minus) + ")"};
  });

  check(10, "hodograph round trip", 0, [] {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> angle(-10, 10), coord(-100, 100);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const JetPoint j(angle(rng), coord(rng), coord(rng));
      const JetPoint back = hodograph_inv(hodograph_fwd(j));
      worst = std::max({worst, circle_distance(back.q(), j.q()), std::abs(back.p() - j.p()) / (1 + std::abs(j.p())),
                        std::abs(back.u() - j.u()) / (1 + std::abs(j.u()))});
      const ContactElement e({coord(rng), coord(rng)}, angle(rng));
      const ContactElement again = hodograph_fwd(hodograph_inv(e));
      worst = std::max({worst, circle_distance(again.theta, e.theta),
                        std::abs(again.x[0] - e.x[0]) / (1 + std::abs(e.x[0])),
                        std::abs(again.x[1] - e.x[1]) / (1 + std::abs(e.x[1]))});
    }
    int loops = 0, passing = 0;
    std::mt19937 fams(123);
    for (int i = 0; i < 10; ++i) {
      for (const auto& L : legendrian_from_family(fam(testing::random_trig_polynomial(fams, 4)), 512)) {
        ++loops;
        passing += check_legendrian_st(hodograph_fwd(L)).pass;
      }
    }
    return Outcome{worst <= 1e-12 && loops >= 10 && passing == loops,
                   "max_rel_err=" + fmt("%.1e", worst) + " st-Legendrian " + std::to_string(passing) + "/" +
                       std::to_string(loops)};
  });

  check(11, "symbolic vs numeric derivatives", 0, [] {
    testing::RandomExpr gen(31337);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Expr e = gen(4);
      const Variable v = gen.variable();
      const Expr d = differentiate(e, v);
      Bindings b;
      b.set(Variable::base(), gen.uniform(-1, 1)).set(Variable::time(), gen.uniform(-1, 1));
      b.set(Variable::fiber(1), gen.uniform(-1, 1)).set(Variable::fiber(2), gen.uniform(-1, 1));
      const double h = 1e-5, x0 = *b.get(v);
      Bindings plus = b, minus = b;
      plus.set(v, x0 + h);
      minus.set(v, x0 - h);
      const double fd = (eval(e, plus) - eval(e, minus)) / (2 * h);
      const double sym = eval(d, b);
      worst = std::max(worst, std::abs(sym - fd) / std::max(1.0, std::abs(sym)));
    }
    return Outcome{worst < 1e-6, "max_rel_err=" + fmt("%.1e", worst) + " over 100 expressions"};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
