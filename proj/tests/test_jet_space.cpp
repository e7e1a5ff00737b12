#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "viterbo/jet_space.hpp"

namespace viterbo {
namespace {

LegendrianLoop zero_section(std::size_t n) {
  return one_jet([](double) { return 0.0; }, [](double) { return 0.0; }, n);
}

LegendrianLoop jet_of_cos(std::size_t n) {
  return one_jet([](double q) { return std::cos(q); }, [](double q) { return -std::sin(q); }, n);
}

TEST(JetPoint, AngleReductionIsIdempotent) {
  for (double q : {-7.0, -two_pi, 0.0, 1.0, two_pi, 13.5, 1e6}) {
    const double r = reduce_angle(q);
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, two_pi);
    EXPECT_EQ(reduce_angle(r), r);
  }
  EXPECT_EQ(JetPoint(two_pi + 0.5, 1, 2).q(), reduce_angle(0.5 + two_pi));
}

TEST(ContactForm, Examples) {
  EXPECT_EQ(contact_form(JetPoint(0, 0, 0), {0, 0, 1}), 1.0);
  const double eps = 0.1;
  EXPECT_NEAR(contact_form(JetPoint(0, 3 * eps, 0), {-1, 0, -eps}), 2 * eps, 1e-15);
  EXPECT_EQ(contact_form(JetPoint(0, 1, 0), {1, 5, 1}), 0.0);
}

TEST(ContactForm, LinearInTangent) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const JetPoint x(u(rng), u(rng), u(rng));
    const JetVector a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const double s = u(rng);
    const JetVector comb{a.dq + s * b.dq, a.dp + s * b.dp, a.du + s * b.du};
    EXPECT_NEAR(contact_form(x, comb), contact_form(x, a) + s * contact_form(x, b), 1e-11);
  }
}

TEST(CheckLegendrian, ZeroSection) {
  const auto r = check_legendrian(zero_section(256));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_defect, 0.0);
}

TEST(CheckLegendrian, JetOfCosine) {
  // Trapezoid residual on one edge is at most h^3/12 * sup|(u')''| with
  // u' = p q' = -sin q, so the oracle bound is h^3/12.
  const std::size_t n = 256;
  const double h = two_pi / n;
  const auto r = check_legendrian(jet_of_cos(n));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_defect, h * h * h / 12.0 * (1 + 1e-6));
  EXPECT_GE(r.max_defect, 0.5 * h * h * h / 12.0);
  EXPECT_LE(r.max_defect, 1.0 / (256.0 * 256.0));
}

TEST(CheckLegendrian, DefectRateIsSecondOrder) {
  const double coarse = check_legendrian(jet_of_cos(256)).max_defect_rate;
  const double fine = check_legendrian(jet_of_cos(512)).max_defect_rate;
  EXPECT_NEAR(coarse / fine, 4.0, 0.1);
}

TEST(CheckLegendrian, NonLegendrianFails) {
  std::vector<JetPoint> s;
  for (int i = 0; i < 256; ++i) {
    const double q = two_pi * i / 256;
    s.emplace_back(q, 0.0, std::sin(q));
  }
  EXPECT_FALSE(check_legendrian(LegendrianLoop(s)).pass);
}

TEST(CheckLegendrian, OpenCurveIsRejected) {
  std::vector<JetPoint> s;
  for (int i = 0; i < 64; ++i) s.emplace_back(std::numbers::pi * i / 64, 0.0, 0.0);
  EXPECT_THROW(check_legendrian(LegendrianLoop(s)), PreconditionError);
}

TEST(LegendrianLoop, TooFewSamples) {
  std::vector<JetPoint> s(8);
  EXPECT_THROW(LegendrianLoop{s}, PreconditionError);
}

TEST(LegendrianLoop, Winding) {
  EXPECT_EQ(zero_section(64).winding(), 1);
  std::vector<JetPoint> s;
  for (int i = 0; i < 64; ++i) s.emplace_back(0.3 * std::sin(two_pi * i / 64), 0, 0);
  EXPECT_EQ(LegendrianLoop(s).winding(), 0);
}

Isotopy vertical_raise(double sign, std::size_t n_frames = 11) {
  std::vector<LegendrianLoop> frames;
  std::vector<double> times;
  for (std::size_t m = 0; m < n_frames; ++m) {
    const double t = static_cast<double>(m) / (n_frames - 1);
    frames.push_back(one_jet([=](double) { return sign * t; }, [](double) { return 0.0; }, 64));
    times.push_back(t);
  }
  return Isotopy(std::move(frames), std::move(times));
}

TEST(CheckPositiveIsotopy, VerticalRaise) {
  const auto r = check_positive_isotopy(vertical_raise(1.0));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.min_alpha, 1.0, 1e-12);
}

TEST(CheckPositiveIsotopy, VerticalDescentFails) {
  const auto r = check_positive_isotopy(vertical_raise(-1.0));
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.min_alpha, -1.0, 1e-12);
}

TEST(CheckPositiveIsotopy, ContactFlowOnHighCovector) {
  // (q, p, u) -> (q - t, p, u - t eps) on points with p = 0.5 has alpha = p - eps.
  const double eps = 0.1;
  std::vector<LegendrianLoop> frames;
  std::vector<double> times;
  for (int m = 0; m <= 20; ++m) {
    const double t = 0.05 * m;
    std::vector<JetPoint> s;
    for (int i = 0; i < 64; ++i) s.emplace_back(two_pi * i / 64 - t, 0.5, -t * eps);
    frames.emplace_back(s);
    times.push_back(t);
  }
  const auto r = check_positive_isotopy(Isotopy(frames, times));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.min_alpha, 0.5 - eps, 1e-9);
  EXPECT_GE(r.min_alpha, eps);
}

TEST(CheckPositiveIsotopy, InvariantUnderTimeRescaling) {
  for (double sign : {1.0, -1.0}) {
    const Isotopy iso = vertical_raise(sign);
    std::vector<LegendrianLoop> frames(iso.frames().begin(), iso.frames().end());
    std::vector<double> times;
    for (double t : iso.times()) times.push_back(3.7 * t + 2.0);
    const Isotopy rescaled(frames, times);
    EXPECT_EQ(check_positive_isotopy(iso).pass, check_positive_isotopy(rescaled).pass);
  }
}

TEST(CheckPositiveIsotopy, MismatchedFrames) {
  std::vector<LegendrianLoop> frames{zero_section(64), zero_section(32)};
  EXPECT_THROW(Isotopy(frames, {0.0, 1.0}), PreconditionError);
  std::vector<LegendrianLoop> same{zero_section(64), zero_section(64)};
  EXPECT_THROW(Isotopy(same, {1.0, 1.0}), PreconditionError);
  std::vector<LegendrianLoop> one{zero_section(64)};
  EXPECT_THROW(Isotopy(one, {0.0}), PreconditionError);
}

TEST(FrontProjection, GraphsHaveNoCusps) {
  const Front zero = front_projection(zero_section(128));
  EXPECT_TRUE(zero.cusps.empty());
  for (const auto& p : zero.points) EXPECT_EQ(p.u, 0.0);
  const Front c = front_projection(jet_of_cos(128));
  EXPECT_TRUE(c.cusps.empty());
  for (const auto& p : c.points) EXPECT_NEAR(p.u, std::cos(p.q), 1e-15);
}

TEST(FrontProjection, FoldedCurveHasTwoCusps) {
  // q(s) = s + 2 sin s reverses direction where 1 + 2 cos s changes sign.
  std::vector<JetPoint> s;
  for (int i = 0; i < 200; ++i) {
    const double t = two_pi * (i + 0.5) / 200;
    s.emplace_back(t + 2 * std::sin(t), 1.0, 0.0);
  }
  EXPECT_EQ(front_projection(LegendrianLoop(s)).cusps.size(), 2u);
}

TEST(CheckEmbedded, Examples) {
  EXPECT_TRUE(check_embedded(zero_section(128), 1e-6));
  EXPECT_TRUE(check_embedded(jet_of_cos(128), 1e-6));

  // Figure eight in the (q, p) plane: passes through the origin at s = 0 and s = pi.
  std::vector<JetPoint> eight;
  for (int i = 0; i < 128; ++i) {
    const double s = two_pi * i / 128;
    eight.emplace_back(0.5 * std::sin(s), 0.5 * std::sin(2 * s), 0.0);
  }
  EXPECT_FALSE(check_embedded(LegendrianLoop(eight), 1e-6));
}

}  // namespace
}  // namespace viterbo
