#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hdg/matrix.hpp"

namespace hdg {

/// Extents of a three-index coefficient array; index 0 runs fastest.
struct Shape3 {
  std::size_t n0 = 1;
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  [[nodiscard]] constexpr std::size_t size() const noexcept { return n0 * n1 * n2; }
};

/// One-dimensional contraction along `axis`:
///   out[.., i', ..] (+)= sum_i A(i', i) * in[.., i, ..].
/// `in` has shape `shape` with shape[axis] == A.cols(); `out` has the same
/// shape with that extent replaced by A.rows(). Counts (2k-1) flops per
/// output entry (k = A.cols()), plus one per entry when accumulating.
void contract(int axis, const Matrix& a, Shape3 shape, std::span<const double> in,
              std::span<double> out, bool accumulate = false);

/// (C (x) B (x) A) x evaluated as three successive contractions, A acting
/// on the fastest index. Non-square factors are allowed. Throws hdg::Error
/// when x.size() != A.cols() * B.cols() * C.cols().
[[nodiscard]] std::vector<double> apply_tp3(const Matrix& a, const Matrix& b, const Matrix& c,
                                            std::span<const double> x);

/// (B (x) A) x on an n x n face block, in place; `scratch` needs n*n entries.
void apply_tp2_square(const Matrix& a, const Matrix& b, std::span<double> x,
                      std::span<double> scratch);

}  // namespace hdg
