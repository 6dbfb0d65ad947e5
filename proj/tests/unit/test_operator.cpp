#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <random>

#include "hdg/error.hpp"
#include "hdg/flops.hpp"
#include "hdg/operator.hpp"
#include "hdg/tensor.hpp"
#include "ldg_oracle.hpp"

using namespace hdg;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = dist(gen);
  return m;
}

Eigen::MatrixXd to_dense(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

FluxField random_flux(const Mesh& mesh, int p, std::mt19937_64& gen) {
  FluxField x(mesh, p);
  const auto v = random_vector(x.size(), gen);
  std::copy(v.begin(), v.end(), x.values().begin());
  return x;
}

double dot(const FluxField& a, const FluxField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

}  // namespace

TEST_CASE("apply_tp3 with identities is the identity") {
  std::mt19937_64 gen(1);
  const auto x = random_vector(64, gen);
  const Matrix id = Matrix::identity(4);
  CHECK(apply_tp3(id, id, id, x) == x);
}

TEST_CASE("apply_tp3 matches the explicit Kronecker product, including rectangular factors") {
  std::mt19937_64 gen(2);
  for (auto dims : {std::array<std::size_t, 6>{4, 4, 4, 4, 4, 4}, {4, 2, 3, 3, 2, 4}}) {
    const Matrix a = random_matrix(dims[0], dims[1], gen);
    const Matrix b = random_matrix(dims[2], dims[3], gen);
    const Matrix c = random_matrix(dims[4], dims[5], gen);
    const auto x = random_vector(dims[1] * dims[3] * dims[5], gen);
    const auto y = apply_tp3(a, b, c, x);
    const Eigen::MatrixXd k =
        Eigen::kroneckerProduct(to_dense(c), Eigen::kroneckerProduct(to_dense(b), to_dense(a)).eval());
    const Eigen::VectorXd ref = k * oracle::to_eigen(x);
    REQUIRE(y.size() == static_cast<std::size_t>(ref.size()));
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - ref(static_cast<Eigen::Index>(i))) < 1e-13);
  }
}

TEST_CASE("apply_tp3 transpose identity and size check") {
  std::mt19937_64 gen(3);
  const Matrix a = random_matrix(4, 4, gen), b = random_matrix(4, 4, gen), c = random_matrix(4, 4, gen);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_vector(64, gen), y = random_vector(64, gen);
    const auto ax = apply_tp3(a, b, c, x);
    const auto aty = apply_tp3(a.transposed(), b.transposed(), c.transposed(), y);
    double l = 0, r = 0;
    for (std::size_t i = 0; i < 64; ++i) {
      l += ax[i] * y[i];
      r += x[i] * aty[i];
    }
    CHECK(std::abs(l - r) < 1e-12);
  }
  CHECK_THROWS_AS((void)apply_tp3(a, b, c, std::vector<double>(63)), Error);
}

TEST_CASE("1D operator: zero input, dense Schur oracle, symmetry") {
  const Basis1D b = build_basis(2, 1.0);
  std::vector<double> widths{2.0};
  std::vector<std::array<double, 2>> zero{{0.0, 0.0}};
  const auto r0 = hdg_op_1d(b, widths, 1.0, zero);
  CHECK(r0[0][0] == 0.0);
  CHECK(r0[0][1] == 0.0);

  const Eigen::Matrix2d k = oracle::element_schur_1d(b, 2.0, 1.0);
  for (int col = 0; col < 2; ++col) {
    std::vector<std::array<double, 2>> unit{{col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0}};
    const auto r = hdg_op_1d(b, widths, 1.0, unit);
    CHECK(std::abs(r[0][0] - k(0, col)) < 1e-12);
    CHECK(std::abs(r[0][1] - k(1, col)) < 1e-12);
  }

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> dist(-1, 1);
  const Basis1D b5 = build_basis(5, 3.0);
  std::vector<double> w5{0.3, 0.7, 1.1};
  for (int t = 0; t < 100; ++t) {
    std::vector<std::array<double, 2>> x(3), y(3);
    for (auto* v : {&x, &y})
      for (auto& e : *v) e = {dist(gen), dist(gen)};
    const auto kx = hdg_op_1d(b5, w5, 0.5, x);
    const auto ky = hdg_op_1d(b5, w5, 0.5, y);
    double l = 0, r = 0;
    for (std::size_t e = 0; e < 3; ++e)
      for (int s = 0; s < 2; ++s) {
        l += kx[e][s] * y[e][s];
        r += x[e][s] * ky[e][s];
      }
    CHECK(std::abs(l - r) <= 1e-12 * std::abs(l));
  }
  // Element 1D oracle with non-unit width.
  const Eigen::Matrix2d k2 = oracle::element_schur_1d(b5, 0.7, 0.5);
  std::vector<double> one_w{0.7};
  std::vector<std::array<double, 2>> e0{{1.0, 0.0}};
  const auto r = hdg_op_1d(b5, one_w, 0.5, e0);
  CHECK(std::abs(r[0][0] - k2(0, 0)) < 1e-12 * std::abs(k2(0, 0)));
  CHECK(std::abs(r[0][1] - k2(1, 0)) < 1e-12 * std::abs(k2(0, 0)));
}

TEST_CASE("3D operator: zero input gives zero residual") {
  const Mesh m = build_mesh({2, 2, 2}, {0, 0, 0}, {1, 1, 1});
  const auto ctx = make_context(m, 3, Penalty{}, 0.0);
  FluxField x(m, 3);
  const FluxField y = hdg_op_3d(ctx, x);
  for (double v : y.values()) CHECK(v == 0.0);
  const FluxField yt = hdg_op_3d_transformed(ctx, x);
  for (double v : yt.values()) CHECK(v == 0.0);
}

TEST_CASE("3D operator equals the dense oracle") {
  std::mt19937_64 gen(5);
  const std::vector<std::pair<std::size_t, int>> cases{{1, 1}, {2, 2}, {2, 3}, {3, 2}};
  for (auto [n, p] : cases)
    for (double lambda : {0.0, 1.7}) {
      BoxBoundary bc = all_dirichlet();
      bc[5] = BoundaryKind::Neumann;
      const Mesh m = build_mesh({n, n, n}, {0, 0, 0}, {1.0 * n, 0.8 * n, 1.2 * n}, bc);
      const auto ctx = make_context(m, p, Penalty{Penalty::Kind::Reference, 4.0}, lambda);
      const Eigen::MatrixXd k = oracle::global_schur(ctx);
      const FluxField x = random_flux(m, p, gen);
      const Eigen::VectorXd ref = oracle::apply_global(k, m, x.block_size(), oracle::to_eigen(x.values()));
      const FluxField y = hdg_op_3d(ctx, x);
      const double diff = (ref - oracle::to_eigen(y.values())).cwiseAbs().maxCoeff();
      CHECK(diff <= 1e-11 * k.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("transformed operator is similar to the untransformed one") {
  std::mt19937_64 gen(6);
  for (int p : {1, 2, 4}) {
    const Mesh m = build_mesh({2, 3, 2}, {0, 0, 0}, {1, 1, 1});
    const auto ctx = make_context(m, p, Penalty{Penalty::Kind::Reference, 2.0}, 0.3);
    const FluxField x = random_flux(m, p, gen);
    const FluxField y = hdg_op_3d(ctx, x);
    FluxField xt = x;
    transform_faces(ctx, FaceTransform::UnknownToEigen, xt);
    FluxField yt = hdg_op_3d_transformed(ctx, xt);
    transform_faces(ctx, FaceTransform::EigenToResidual, yt);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y.values()[i] - yt.values()[i]) < 1e-11);
  }
}

TEST_CASE("3D operator symmetry and linearity over 100 random trials") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coef(-3, 3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 3;
    const int p = 1 + t % 4;
    const Mesh m = build_mesh({n, static_cast<std::size_t>(1 + (t / 3) % 3), 2}, {0, 0, 0}, {1, 2, 1});
    const auto ctx = make_context(m, p, Penalty{Penalty::Kind::Reference, 1.5}, t % 2 ? 0.0 : 2.0);
    FluxField x = random_flux(m, p, gen), y = random_flux(m, p, gen);
    zero_dirichlet(m, x);
    zero_dirichlet(m, y);
    const FluxField kx = hdg_op_3d(ctx, x), ky = hdg_op_3d(ctx, y);
    CHECK(std::abs(dot(kx, y) - dot(x, ky)) <= 1e-11 * std::abs(dot(kx, y)));

    const double a = coef(gen), b = coef(gen);
    FluxField c(m, p);
    for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] = a * x.values()[i] + b * y.values()[i];
    const FluxField kc = hdg_op_3d(ctx, c);
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      scale = std::max(scale, std::abs(kc.values()[i]));
      diff = std::max(diff, std::abs(kc.values()[i] - a * kx.values()[i] - b * ky.values()[i]));
    }
    CHECK(diff <= 1e-12 * scale);
  }
}

TEST_CASE("dense element matrix: routes agree, symmetric, positive semidefinite") {
  for (int p : {1, 2, 3}) {
    for (double lambda : {0.0, 1.0}) {
      const Mesh m = build_mesh({1, 1, 1}, {0, 0, 0}, {1, 0.5, 2});
      const auto ctx = make_context(m, p, Penalty{Penalty::Kind::Reference, 3.0}, lambda);
      const Matrix k = assemble_dense_element(ctx, 0, DenseRoute::Both);
      CHECK((k - k.transposed()).max_abs() <= 1e-11 * k.max_abs());
      Eigen::MatrixXd kd = to_dense(k);
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (kd + kd.transpose())).eigenvalues();
      CHECK(ev.minCoeff() >= -1e-10 * k.max_abs());
      const Eigen::MatrixXd ko = oracle::element_schur(ctx, 0);
      CHECK((kd - ko).cwiseAbs().maxCoeff() <= 1e-11 * k.max_abs());
    }
  }
}

TEST_CASE("p = 1 Poisson element annihilates constant traces") {
  const Mesh m = build_mesh({1, 1, 1}, {0, 0, 0}, {2, 2, 2});
  const auto ctx = make_context(m, 1, Penalty{}, 0.0);
  const Matrix k = assemble_dense_element(ctx, 0, DenseRoute::MatrixFree);
  for (std::size_t i = 0; i < k.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k.cols(); ++j) row += k(i, j);
    CHECK(std::abs(row) <= 1e-12 * k.max_abs());
  }
}

TEST_CASE("eigen scale rejects invalid lambda") {
  const Basis1D b = build_basis(2, 1.0);
  const auto g = ElementGeometry::from_widths({1, 1, 1});
  CHECK_THROWS_AS((void)build_eigen_scale(b, g, -1.0), Error);
  const EigenScale3D s = build_eigen_scale(b, g, 0.0);
  for (double v : s.inv) CHECK(v > 0.0);
}

TEST_CASE("face penalty requires cubic elements") {
  const Mesh m = build_mesh({1, 1, 1}, {0, 0, 0}, {1, 2, 1});
  CHECK_THROWS_AS((void)Penalty{}.tau_hat(m), Error);
  CHECK(Penalty{Penalty::Kind::Reference, 3.0}.tau_hat(m) == 3.0);
  const Mesh c = build_mesh({2, 2, 2}, {0, 0, 0}, {1, 1, 1});
  CHECK(Penalty{}.tau_hat(c) == doctest::Approx(25.0 * 0.25));
}

TEST_CASE("threaded application is bitwise identical to the sequential one") {
  std::mt19937_64 gen(8);
  const Mesh m = build_mesh({3, 3, 2}, {0, 0, 0}, {1, 1, 1});
  const auto ctx = make_context(m, 3, Penalty{Penalty::Kind::Reference, 4.0}, 0.0, 3);
  const FluxField x = random_flux(m, 3, gen);
  for (auto v : {HdgOperator::Variant::SumFactorized, HdgOperator::Variant::Transformed}) {
    HdgOperator seq(ctx, v, 1), par(ctx, v, 3);
    FluxField a(m, 3), b(m, 3);
    seq.apply(x, a);
    par.apply(x, b);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  }
}

TEST_CASE("flop counter matches the closed-form kernel counts") {
  // One interior element count: untransformed 73 n^3 + 6 n^2 with six
  // unknown faces, transformed 25 n^3 + 24 n^2.
  const Mesh m = build_mesh({1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {BoundaryKind::Neumann, BoundaryKind::Neumann,
                                                             BoundaryKind::Neumann, BoundaryKind::Neumann,
                                                             BoundaryKind::Neumann, BoundaryKind::Neumann});
  for (int p : {2, 5}) {
    const auto ctx = make_context(m, p, Penalty{}, 0.0);
    const std::uint64_t n = p + 1;
    FluxField x(m, p), y(m, p);
    x.fill(1.0);
    HdgOperator tp(ctx, HdgOperator::Variant::SumFactorized, 1);
    HdgOperator tpt(ctx, HdgOperator::Variant::Transformed, 1);
    {
      flops::Scope s;
      tp.apply(x, y);
      CHECK(s.count() == 73 * n * n * n + 6 * n * n);
    }
    {
      flops::Scope s;
      tpt.apply(x, y);
      CHECK(s.count() == 25 * n * n * n + 24 * n * n);
    }
  }
  CHECK_FALSE(flops::enabled());
}
