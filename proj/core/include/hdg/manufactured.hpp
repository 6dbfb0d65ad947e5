#pragma once

#include "hdg/solver.hpp"

namespace hdg {

/// Manufactured solution on (0, 2 pi)^3:
///   u(x) = cos(k(x1 - 3x2 + 2x3)) sin(k(1 + x1)) sin(k(1 - x2))
///          sin(k(2x1 + x2)) sin(k(3x1 - 2x2 + 2x3)).
[[nodiscard]] double exact_solution(const Point& x, double k);
[[nodiscard]] Point exact_gradient(const Point& x, double k);
[[nodiscard]] double exact_laplacian(const Point& x, double k);

/// f = lambda u - laplace(u), evaluated in closed form.
[[nodiscard]] double rhs_f(const Point& x, double k, double lambda);

/// Dirichlet data u and Neumann data grad(u) . n of the manufactured solution.
[[nodiscard]] BoundaryData manufactured_boundary(double k);

}  // namespace hdg
