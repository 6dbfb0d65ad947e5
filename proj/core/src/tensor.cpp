#include "hdg/tensor.hpp"

#include <string>

#include "hdg/error.hpp"
#include "hdg/flops.hpp"

namespace hdg {

void contract(int axis, const Matrix& a, Shape3 shape, std::span<const double> in,
              std::span<double> out, bool accumulate) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  const double* pa = a.data().data();
  const double* x = in.data();
  double* y = out.data();

  if (axis == 0) {
    const std::size_t lines = shape.n1 * shape.n2;
    for (std::size_t l = 0; l < lines; ++l) {
      const double* xl = x + l * k;
      double* yl = y + l * m;
      for (std::size_t i = 0; i < m; ++i) {
        const double* ai = pa + i * k;
        double s = ai[0] * xl[0];
        for (std::size_t j = 1; j < k; ++j) s += ai[j] * xl[j];
        yl[i] = accumulate ? yl[i] + s : s;
      }
    }
    flops::add(lines * m * (2 * k - 1 + (accumulate ? 1 : 0)));
    return;
  }

  // Contract a middle (axis 1) or slow (axis 2) index with contiguous rows
  // of length `inner` as the innermost loop.
  const std::size_t inner = axis == 1 ? shape.n0 : shape.n0 * shape.n1;
  const std::size_t outer = axis == 1 ? shape.n2 : 1;
  for (std::size_t o = 0; o < outer; ++o) {
    const double* xo = x + o * k * inner;
    double* yo = y + o * m * inner;
    for (std::size_t i = 0; i < m; ++i) {
      double* yrow = yo + i * inner;
      const double* ai = pa + i * k;
      {
        const double c = ai[0];
        const double* xr = xo;
        if (accumulate)
          for (std::size_t r = 0; r < inner; ++r) yrow[r] += c * xr[r];
        else
          for (std::size_t r = 0; r < inner; ++r) yrow[r] = c * xr[r];
      }
      for (std::size_t j = 1; j < k; ++j) {
        const double c = ai[j];
        const double* xr = xo + j * inner;
        for (std::size_t r = 0; r < inner; ++r) yrow[r] += c * xr[r];
      }
    }
  }
  flops::add(outer * inner * m * (2 * k - 1 + (accumulate ? 1 : 0)));
}

std::vector<double> apply_tp3(const Matrix& a, const Matrix& b, const Matrix& c,
                              std::span<const double> x) {
  const Shape3 s0{a.cols(), b.cols(), c.cols()};
  if (x.size() != s0.size())
    throw Error("apply_tp3: input has " + std::to_string(x.size()) + " entries, expected " +
                std::to_string(s0.size()));
  const Shape3 s1{a.rows(), b.cols(), c.cols()};
  const Shape3 s2{a.rows(), b.rows(), c.cols()};
  std::vector<double> t1(s1.size());
  std::vector<double> t2(s2.size());
  std::vector<double> y(a.rows() * b.rows() * c.rows());
  contract(0, a, s0, x, t1);
  contract(1, b, s1, t1, t2);
  contract(2, c, s2, t2, y);
  return y;
}

void apply_tp2_square(const Matrix& a, const Matrix& b, std::span<double> x,
                      std::span<double> scratch) {
  const std::size_t n = a.rows();
  const Shape3 s{n, n, 1};
  contract(0, a, s, x, scratch);
  contract(1, b, s, scratch, x);
}

}  // namespace hdg
