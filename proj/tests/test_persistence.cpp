#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "viterbo/persistence.hpp"

namespace viterbo {
namespace {

/// Lower-star filtration of a cycle (closed = true) or a path.
FilteredComplex graph_filtration(const std::vector<double>& v, bool closed) {
  struct Cell {
    double value;
    int dim;
    std::size_t a, b;
  };
  const std::size_t n = v.size();
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < n; ++i) cells.push_back({v[i], 0, i, i});
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = (i + 1) % n;
    cells.push_back({std::max(v[i], v[j]), 1, i, j});
  }
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (cells[x].value != cells[y].value) return cells[x].value < cells[y].value;
    return cells[x].dim < cells[y].dim;
  });
  std::vector<std::uint32_t> pos(n);
  FilteredComplex X;
  for (std::size_t k : order) {
    const Cell& c = cells[k];
    if (c.dim == 0) {
      pos[c.a] = static_cast<std::uint32_t>(X.size());
      X.add_cell(c.value, 0, {});
    } else {
      const std::uint32_t bd[2] = {pos[c.a], pos[c.b]};
      X.add_cell(c.value, 1, bd);
    }
  }
  return X;
}

std::vector<double> sample(double (*f)(double), int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = f(2 * std::numbers::pi * i / n);
  return v;
}

TEST(Persistence, CircleFilteredByCosine) {
  const auto X = graph_filtration(sample([](double q) { return std::cos(q); }, 64), true);
  ASSERT_TRUE(is_valid_filtration(X));
  const auto dgm = persistence(X);
  ASSERT_EQ(dgm.essentials.size(), 2u);
  EXPECT_EQ(dgm.essentials[0].dim, 0);
  EXPECT_EQ(dgm.essentials[0].birth, -1.0);
  EXPECT_EQ(dgm.essentials[1].dim, 1);
  EXPECT_EQ(dgm.essentials[1].birth, 1.0);
  for (const auto& p : dgm.pairs) EXPECT_EQ(p.birth, p.death);
}

TEST(Persistence, IncreasingInterval) {
  std::vector<double> v(20);
  for (int i = 0; i < 20; ++i) v[i] = 0.5 * i - 3;
  const auto dgm = persistence(graph_filtration(v, false));
  ASSERT_EQ(dgm.essentials.size(), 1u);
  EXPECT_EQ(dgm.essentials[0].dim, 0);
  EXPECT_EQ(dgm.essentials[0].birth, -3.0);
}

TEST(Persistence, CircleFilteredByTripleCosine) {
  // n = 96 puts grid points on every extremum of cos 3q.
  const auto dgm = persistence(graph_filtration(sample([](double q) { return std::cos(3 * q); }, 96), true));
  ASSERT_EQ(dgm.essentials.size(), 2u);
  EXPECT_NEAR(dgm.essentials[0].birth, -1.0, 1e-15);
  EXPECT_EQ(dgm.essentials[0].dim, 0);
  EXPECT_NEAR(dgm.essentials[1].birth, 1.0, 1e-15);
  EXPECT_EQ(dgm.essentials[1].dim, 1);
  int finite = 0;
  for (const auto& p : dgm.pairs) {
    if (p.death > p.birth) {
      ++finite;
      EXPECT_EQ(p.dim, 0);
      EXPECT_NEAR(p.birth, -1.0, 1e-15);
      EXPECT_NEAR(p.death, 1.0, 1e-15);
    }
  }
  EXPECT_EQ(finite, 2);
}

TEST(Persistence, SublevelBettiMatchesBruteForce) {
  std::mt19937 rng(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> v(80);
    for (auto& x : v) x = noise(rng);
    const auto dgm = persistence(graph_filtration(v, true));
    std::vector<double> levels = v;
    std::sort(levels.begin(), levels.end());
    for (double c : levels) {
      int b0 = 0, b1 = 0;
      for (const auto& p : dgm.pairs)
        if (p.birth <= c && p.death > c) (p.dim == 0 ? b0 : b1)++;
      for (const auto& e : dgm.essentials)
        if (e.birth <= c) (e.dim == 0 ? b0 : b1)++;
      EXPECT_EQ(b0, testing::sublevel_components(v, c));
      EXPECT_EQ(b1, c >= levels.back() ? 1 : 0);
    }
  }
}

TEST(Persistence, TwoDimensionalSquareBoundary) {
  // Filled square: 4 vertices, 4 edges, 1 face. Only H_0 survives.
  // Order: v0 v1 e01 v2 e12 v3 e23 e03 face.
  FilteredComplex X;
  X.add_cell(0, 0, {});
  X.add_cell(1, 0, {});
  const std::uint32_t e01[2] = {0, 1};
  X.add_cell(1, 1, e01);
  X.add_cell(2, 0, {});
  const std::uint32_t e12[2] = {1, 3};
  X.add_cell(2, 1, e12);
  X.add_cell(3, 0, {});
  const std::uint32_t e23[2] = {3, 5};
  X.add_cell(3, 1, e23);
  const std::uint32_t e03[2] = {0, 5};
  X.add_cell(3, 1, e03);
  const std::uint32_t face[4] = {2, 4, 6, 7};
  X.add_cell(3, 2, face);
  ASSERT_TRUE(is_valid_filtration(X));
  const auto dgm = persistence(X);
  ASSERT_EQ(dgm.essentials.size(), 1u);
  EXPECT_EQ(dgm.essentials[0].dim, 0);
  EXPECT_EQ(dgm.pairs.size(), 4u);
}

TEST(Persistence, DetectsInvalidFiltration) {
  FilteredComplex X;
  X.add_cell(1.0, 0, {});
  const std::uint32_t bd[1] = {0};
  X.add_cell(0.5, 1, bd);
  EXPECT_FALSE(is_valid_filtration(X));
}

}  // namespace
}  // namespace viterbo
