#pragma once

// Persistent homology over the field with two elements of a filtered cell
// complex given by its boundary matrix in filtration order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "viterbo/errors.hpp"

namespace viterbo {

/// Cells listed in filtration order. The boundary of cell i is
/// faces[offsets[i] .. offsets[i+1]), given as positions in the same order.
struct FilteredComplex {
  std::vector<double> values;
  std::vector<int> dims;
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> faces;

  std::size_t size() const { return values.size(); }
  std::span<const std::uint32_t> boundary(std::size_t i) const {
    return {faces.data() + offsets[i], faces.data() + offsets[i + 1]};
  }

  /// Appends a cell; its faces must already be present.
  void add_cell(double value, int dim, std::span<const std::uint32_t> boundary_positions) {
    values.push_back(value);
    dims.push_back(dim);
    faces.insert(faces.end(), boundary_positions.begin(), boundary_positions.end());
    offsets.push_back(static_cast<std::uint32_t>(faces.size()));
  }
};

/// True when every face precedes its cell, has dimension one less and a
/// value no larger.
inline bool is_valid_filtration(const FilteredComplex& X) {
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (i > 0 && X.values[i] < X.values[i - 1]) return false;
    for (std::uint32_t f : X.boundary(i)) {
      if (f >= i || X.dims[f] != X.dims[i] - 1 || X.values[f] > X.values[i]) return false;
    }
  }
  return true;
}

struct PersistencePair {
  int dim = 0;  // degree of the class that is born
  double birth = 0.0;
  double death = 0.0;
  std::size_t birth_cell = 0;
  std::size_t death_cell = 0;
};

struct EssentialClass {
  int dim = 0;
  double birth = 0.0;
  std::size_t cell = 0;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  std::vector<EssentialClass> essentials;  // sorted by birth position
};

/// Standard column reduction with clearing, highest dimension first.
inline PersistenceDiagram persistence(const FilteredComplex& X) {
  const std::size_t n = X.size();
  constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> owner(n, none);  // owner[low] = column whose lowest entry is low
  std::vector<std::vector<std::uint32_t>> reduced(n);
  std::vector<bool> cleared(n, false);
  int top = 0;
  for (int d : X.dims) top = std::max(top, d);

  std::vector<std::uint32_t> col, scratch;
  for (int d = top; d >= 1; --d) {
    for (std::size_t j = 0; j < n; ++j) {
      if (X.dims[j] != d || cleared[j]) continue;
      const auto bd = X.boundary(j);
      col.assign(bd.begin(), bd.end());
      std::sort(col.begin(), col.end());
      while (!col.empty() && owner[col.back()] != none) {
        const auto& other = reduced[owner[col.back()]];
        scratch.clear();
        std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                      std::back_inserter(scratch));
        col.swap(scratch);
      }
      if (!col.empty()) {
        owner[col.back()] = static_cast<std::uint32_t>(j);
        cleared[col.back()] = true;
        reduced[j] = col;
      }
    }
  }

  PersistenceDiagram out;
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] != none) {
      const std::size_t j = owner[i];
      out.pairs.push_back({X.dims[i], X.values[i], X.values[j], i, j});
    } else if (reduced[i].empty()) {
      out.essentials.push_back({X.dims[i], X.values[i], i});
    }
  }
  return out;
}

}  // namespace viterbo
