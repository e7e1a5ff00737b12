#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "viterbo/genfam.hpp"

namespace viterbo {
namespace {

std::vector<double> values_of(const std::vector<CriticalValue>& cv) {
  std::vector<double> out;
  for (const auto& v : cv) out.push_back(v.value);
  return out;
}

TEST(GeneratingFamily, IndexAndValidation) {
  const auto F = GeneratingFamily::from_text("0.1*sin(q)", {1, -1, -1});
  EXPECT_EQ(F.fiber_dim(), 3);
  EXPECT_EQ(F.index(), 2);
  EXPECT_THROW(GeneratingFamily({2}, parse("q", 1)), PreconditionError);
  EXPECT_THROW(GeneratingFamily::from_text("w2", {1}), ParseError);
}

TEST(GeneratingFamily, BoundRadiusDominatesSlope) {
  const auto F = GeneratingFamily::from_text("3*cos(w1 + q)", {1});
  EXPECT_GE(F.bound_radius(), 2.0 * 3.0 + 1.0 - 1e-9);
  EXPECT_GE(F.bound_radius(), 2.0 * F.fiber_slope_bound(F.bound_radius()) + 1.0 - 1e-9);
  EXPECT_THROW(GeneratingFamily::from_text("w1^3", {1}), PreconditionError);
  EXPECT_NO_THROW(GeneratingFamily::from_text("w1^3", {1}, 4.0));
}

TEST(FamilySpec, JsonRoundTrip) {
  const auto j = nlohmann::json::parse(R"j({"K": 2, "Qsigns": [1, -1], "g": "w1*sin(q)", "grid": 128})j");
  const FamilySpec spec = family_spec_from_json(j);
  EXPECT_EQ(spec.K, 2);
  EXPECT_EQ(spec.grid, 128);
  const FamilySpec again = family_spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
  EXPECT_EQ(again.q_signs, spec.q_signs);
  EXPECT_EQ(again.g, spec.g);
  EXPECT_EQ(spec.build().index(), 1);
  EXPECT_THROW(family_spec_from_json(nlohmann::json::parse(R"({"g": "q"})")), PreconditionError);
  EXPECT_THROW(family_spec_from_json(nlohmann::json::parse(R"({"K": 1, "g": "q", "schema": 2})")),
               PreconditionError);
  EXPECT_THROW((FamilySpec{1, {1, 1}, "q", 64}.build()), PreconditionError);
}

TEST(FiberCriticalSet, ZeroFiberDimension) {
  const auto F = GeneratingFamily::from_text("cos(q)", {});
  const auto set = fiber_critical_set(F, 64);
  ASSERT_EQ(set.points.size(), 64u);
  for (const auto& pt : set.points) {
    EXPECT_TRUE(pt.w.empty());
    EXPECT_EQ(pt.value, std::cos(pt.q));
    EXPECT_EQ(pt.p, -std::sin(pt.q));
  }
  EXPECT_THROW(fiber_critical_set(F, 32), PreconditionError);
}

TEST(FiberCriticalSet, PureQuadratic) {
  const auto F = GeneratingFamily::from_text("0", {1});
  const auto set = fiber_critical_set(F, 64);
  ASSERT_EQ(set.points.size(), 64u);
  for (const auto& pt : set.points) EXPECT_NEAR(pt.w[0], 0.0, 1e-14);
}

TEST(FiberCriticalSet, NegativeSquareWithLinearCoupling) {
  // d_w(-w^2 + w sin q) = 0 gives w = sin(q)/2 and F = sin(q)^2/4.
  const auto F = GeneratingFamily::from_text("w1*sin(q)", {-1});
  const auto set = fiber_critical_set(F, 128);
  ASSERT_EQ(set.points.size(), 128u);
  EXPECT_TRUE(set.failures.empty());
  double prev = -1;
  for (const auto& pt : set.points) {
    EXPECT_GT(pt.q, prev);
    prev = pt.q;
    EXPECT_NEAR(pt.w[0], std::sin(pt.q) / 2, 1e-12);
    EXPECT_NEAR(pt.value, std::sin(pt.q) * std::sin(pt.q) / 4, 1e-12);
    EXPECT_NEAR(pt.hessian_det, -2.0, 1e-14);
  }
}

TEST(FiberCriticalSet, PointsStayInsideBoundBall) {
  for (const char* g : {"3*cos(w1 + q)", "2*sin(w1)*cos(q) + 0.5*w2*sin(q)", "sin(w1 - w2 + q)"}) {
    const auto F = GeneratingFamily::from_text(g, g[0] == '3' ? std::vector<int>{1}
                                                              : std::vector<int>{1, -1});
    const double R = F.bound_radius();
    const auto set = fiber_critical_set(F, 64);
    EXPECT_FALSE(set.points.empty());
    for (const auto& pt : set.points) {
      for (double x : pt.w) EXPECT_LE(std::abs(x), R);
      EXPECT_LE(F.fiber_gradient(pt.q, pt.w).norm(), default_tol_newton);
    }
  }
}

TEST(FiberCriticalSet, FoldedFamilyHasSeveralRootsSomewhere) {
  // 2w - 3 sin(w + q) = 0 has three roots for some q.
  const auto F = GeneratingFamily::from_text("3*cos(w1 + q)", {1});
  const auto set = fiber_critical_set(F, 128);
  std::map<double, int> per_q;
  for (const auto& pt : set.points) ++per_q[pt.q];
  int most = 0;
  for (const auto& [q, c] : per_q) most = std::max(most, c);
  EXPECT_EQ(most, 3);
}

TEST(RankCondition, Examples) {
  const auto F0 = GeneratingFamily::from_text("cos(q)", {});
  EXPECT_TRUE(rank_condition_check(F0, fiber_critical_points_at(F0, 0.3).front()));

  const auto F1 = GeneratingFamily::from_text("w1*sin(q)", {1});
  for (const auto& pt : fiber_critical_set(F1, 64).points) EXPECT_TRUE(rank_condition_check(F1, pt));

  // w^3 - 3 w cos q at cos q = 0: (F_wq, F_ww) = (3 sin q, 0) = (3, 0).
  const auto F2 = GeneratingFamily::from_text("w1^3 - w1^2 - 3*w1*cos(q)", {1}, 3.0);
  FiberCriticalPoint birth;
  birth.q = std::numbers::pi / 2;
  birth.w = {0.0};
  const Mat m = F2.rank_matrix(birth.q, birth.w);
  EXPECT_NEAR(m(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(m(0, 1), 0.0, 1e-12);
  EXPECT_TRUE(rank_condition_check(F2, birth));

  // F = w^3 at w = 0: both columns vanish.
  const auto F3 = GeneratingFamily::from_text("w1^3 - w1^2", {1}, 3.0);
  FiberCriticalPoint flat;
  flat.q = 1.0;
  flat.w = {0.0};
  EXPECT_FALSE(rank_condition_check(F3, flat));
}

TEST(LegendrianFromFamily, ZeroFiberIsOneJet) {
  const auto F = GeneratingFamily::from_text("cos(q)", {});
  const auto loops = legendrian_from_family(F, 256);
  ASSERT_EQ(loops.size(), 1u);
  const auto& L = loops[0];
  ASSERT_EQ(L.size(), 256u);
  for (std::size_t i = 0; i < L.size(); ++i) {
    EXPECT_NEAR(L[i].q(), two_pi * i / 256, 1e-12);
    EXPECT_EQ(L[i].u(), std::cos(L[i].q()));
    EXPECT_EQ(L[i].p(), -std::sin(L[i].q()));
  }
  EXPECT_TRUE(check_legendrian(L).pass);
}

TEST(LegendrianFromFamily, SupportFunctionLoop) {
  const auto F = GeneratingFamily::from_text("3*cos(q) + 4*sin(q)", {});
  const auto loops = legendrian_from_family(F, 512);
  ASSERT_EQ(loops.size(), 1u);
  double lo = 1e9, hi = -1e9;
  for (const auto& x : loops[0].samples()) {
    lo = std::min(lo, x.u());
    hi = std::max(hi, x.u());
  }
  EXPECT_NEAR(lo, -5.0, 1e-3);
  EXPECT_NEAR(hi, 5.0, 1e-3);
  EXPECT_GE(lo, -5.0);
  EXPECT_LE(hi, 5.0);
}

TEST(LegendrianFromFamily, EliminatedFiberVariable) {
  // Closed form: u = sin^2 q / 4 and p = d/dq of that = sin q cos q / 2.
  const auto F = GeneratingFamily::from_text("w1*sin(q)", {-1});
  const auto loops = legendrian_from_family(F, 256);
  ASSERT_EQ(loops.size(), 1u);
  const auto& L = loops[0];
  EXPECT_EQ(L.winding(), 1);
  for (const auto& x : L.samples()) {
    const double s = std::sin(x.q()), c = std::cos(x.q());
    EXPECT_NEAR(x.u(), s * s / 4, 1e-10);
    EXPECT_NEAR(x.p(), s * c / 2, 1e-10);
  }
  EXPECT_TRUE(check_legendrian(L).pass);
}

TEST(LegendrianFromFamily, LoopsPassLegendrianCheck) {
  for (const auto& [g, signs] : std::vector<std::pair<const char*, std::vector<int>>>{
           {"3*cos(w1 + q)", {1}},
           {"0.3*w1*sin(q) + 0.2*w2*cos(q)", {1, -1}},
           {"2*sin(w1)*cos(q) + 0.5*w2*sin(q)", {1, -1}},
           {"cos(2*q) + 0.5*sin(w1)", {-1}}}) {
    const auto F = GeneratingFamily::from_text(g, signs);
    const auto loops = legendrian_from_family(F, 256);
    ASSERT_FALSE(loops.empty()) << g;
    for (const auto& L : loops) {
      EXPECT_GE(L.size(), LegendrianLoop::min_samples);
      EXPECT_TRUE(check_legendrian(L).pass) << g << " defect " << check_legendrian(L).max_defect;
    }
  }
}

TEST(LegendrianFromFamily, FoldedFamilyHasCusps) {
  const auto F = GeneratingFamily::from_text("3*cos(w1 + q)", {1});
  const auto loops = legendrian_from_family(F, 256);
  ASSERT_EQ(loops.size(), 1u);
  EXPECT_EQ(loops[0].winding(), 1);
  const Front front = front_projection(loops[0]);
  EXPECT_GE(front.cusps.size(), 2u);
  EXPECT_EQ(front.cusps.size() % 2, 0u);
}

TEST(CriticalValues, SupportFunction) {
  const auto F = GeneratingFamily::from_text("3*cos(q) + 4*sin(q)", {});
  const auto cv = critical_values(F);
  ASSERT_EQ(cv.size(), 2u);
  EXPECT_NEAR(cv[0].value, -5.0, 1e-12);
  EXPECT_NEAR(cv[1].value, 5.0, 1e-12);
  EXPECT_TRUE(cv[0].nondegenerate);
  EXPECT_TRUE(cv[1].nondegenerate);
}

TEST(CriticalValues, ZeroFunction) {
  const auto cv = critical_values(GeneratingFamily::from_text("0", {}));
  ASSERT_EQ(cv.size(), 1u);
  EXPECT_EQ(cv[0].value, 0.0);
  EXPECT_FALSE(cv[0].nondegenerate);
}

TEST(CriticalValues, TripleCosine) {
  const auto cv = critical_values(GeneratingFamily::from_text("cos(3*q)", {}));
  ASSERT_EQ(cv.size(), 2u);
  EXPECT_NEAR(cv[0].value, -1.0, 1e-12);
  EXPECT_NEAR(cv[1].value, 1.0, 1e-12);
  EXPECT_EQ(cv[0].multiplicity, 3);
  EXPECT_EQ(cv[1].multiplicity, 3);
}

TEST(CriticalValues, TwoFiberVariablesClosedForm) {
  // w1 = -0.15 sin q, w2 = 0.1 cos q, reduced function -0.0225 sin^2 q + 0.01 cos^2 q.
  const auto F = GeneratingFamily::from_text("0.3*w1*sin(q) + 0.2*w2*cos(q)", {1, -1});
  const auto cv = critical_values(F);
  ASSERT_EQ(cv.size(), 2u);
  EXPECT_NEAR(cv[0].value, -0.0225, 1e-12);
  EXPECT_NEAR(cv[1].value, 0.01, 1e-12);
  EXPECT_EQ(cv[0].multiplicity, 2);
  EXPECT_EQ(cv[1].multiplicity, 2);
}

TEST(CriticalValues, Stabilization) {
  const auto base = values_of(critical_values(GeneratingFamily::from_text("cos(q) + 0.3*sin(2*q)", {})));
  for (const auto& signs : std::vector<std::vector<int>>{{1}, {-1}, {1, -1}}) {
    const auto F = GeneratingFamily::from_text("cos(q) + 0.3*sin(2*q)", signs);
    const auto stab = values_of(critical_values(F));
    ASSERT_EQ(stab.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(stab[i], base[i], 1e-10);
    EXPECT_EQ(F.index(), static_cast<int>(std::count(signs.begin(), signs.end(), -1)));
  }
}

TEST(CriticalValues, MatchLoopCrossingsOfZeroSection) {
  // Critical values are the u-values where the Legendrian crosses p = 0.
  for (const auto& [g, signs] : std::vector<std::pair<const char*, std::vector<int>>>{
           {"3*cos(w1 + q)", {1}},
           {"2*sin(w1)*cos(q) + 0.5*w2*sin(q)", {1, -1}},
           {"cos(2*q) + 0.5*sin(w1)", {-1}}}) {
    const auto F = GeneratingFamily::from_text(g, signs);
    const auto cv = values_of(critical_values(F));
    std::vector<double> crossings;
    for (const auto& L : legendrian_from_family(F, 1024)) {
      for (std::size_t i = 0; i < L.size(); ++i) {
        const auto& a = L[i];
        const auto& b = L.next(i);
        if ((a.p() < 0) != (b.p() < 0)) {
          const double s = a.p() / (a.p() - b.p());
          crossings.push_back(a.u() + s * (b.u() - a.u()));
        }
      }
    }
    std::sort(crossings.begin(), crossings.end());
    std::vector<double> all;
    for (const auto& v : critical_values(F)) all.insert(all.end(), v.multiplicity, v.value);
    ASSERT_EQ(crossings.size(), all.size()) << g;
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_NEAR(crossings[i], all[i], 1e-4) << g;
    EXPECT_FALSE(cv.empty());
  }
}

}  // namespace
}  // namespace viterbo
