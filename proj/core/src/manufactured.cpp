#include "hdg/manufactured.hpp"

#include <cmath>

namespace hdg {
namespace {

// Each factor is trig(k (a . x + b)).
struct Factor {
  bool cosine;
  Point a;
  double b;
};

constexpr std::array<Factor, 5> kFactors{{
    {true, {1.0, -3.0, 2.0}, 0.0},
    {false, {1.0, 0.0, 0.0}, 1.0},
    {false, {0.0, -1.0, 0.0}, 1.0},
    {false, {2.0, 1.0, 0.0}, 0.0},
    {false, {3.0, -2.0, 2.0}, 0.0},
}};

struct Evaluated {
  std::array<double, 5> value;
  std::array<Point, 5> grad;
  std::array<double, 5> lap;
};

Evaluated evaluate(const Point& x, double k) {
  Evaluated ev{};
  for (std::size_t i = 0; i < kFactors.size(); ++i) {
    const Factor& f = kFactors[i];
    const double theta = k * (f.a[0] * x[0] + f.a[1] * x[1] + f.a[2] * x[2] + f.b);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double v = f.cosine ? c : s;
    const double dv = f.cosine ? -s : c;
    const double a2 = f.a[0] * f.a[0] + f.a[1] * f.a[1] + f.a[2] * f.a[2];
    ev.value[i] = v;
    for (int d = 0; d < 3; ++d) ev.grad[i][d] = k * f.a[d] * dv;
    ev.lap[i] = -k * k * a2 * v;
  }
  return ev;
}

// Product of all values except indices i and j (pass j = i to skip one).
double product_except(const Evaluated& ev, std::size_t i, std::size_t j) {
  double p = 1.0;
  for (std::size_t l = 0; l < ev.value.size(); ++l)
    if (l != i && l != j) p *= ev.value[l];
  return p;
}

}  // namespace

double exact_solution(const Point& x, double k) {
  const Evaluated ev = evaluate(x, k);
  return product_except(ev, 5, 5);
}

Point exact_gradient(const Point& x, double k) {
  const Evaluated ev = evaluate(x, k);
  Point g{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 5; ++i) {
    const double rest = product_except(ev, i, i);
    for (int d = 0; d < 3; ++d) g[d] += ev.grad[i][d] * rest;
  }
  return g;
}

double exact_laplacian(const Point& x, double k) {
  const Evaluated ev = evaluate(x, k);
  double lap = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    lap += ev.lap[i] * product_except(ev, i, i);
    for (std::size_t j = i + 1; j < 5; ++j) {
      const double gg = ev.grad[i][0] * ev.grad[j][0] + ev.grad[i][1] * ev.grad[j][1] +
                        ev.grad[i][2] * ev.grad[j][2];
      lap += 2.0 * gg * product_except(ev, i, j);
    }
  }
  return lap;
}

double rhs_f(const Point& x, double k, double lambda) {
  return lambda * exact_solution(x, k) - exact_laplacian(x, k);
}

BoundaryData manufactured_boundary(double k) {
  BoundaryData bc;
  bc.dirichlet = [k](const Point& x) { return exact_solution(x, k); };
  bc.neumann = [k](const Point& x, const Point& n) {
    const Point g = exact_gradient(x, k);
    return g[0] * n[0] + g[1] * n[1] + g[2] * n[2];
  };
  return bc;
}

}  // namespace hdg
