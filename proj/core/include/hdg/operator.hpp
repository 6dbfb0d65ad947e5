#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hdg/basis.hpp"
#include "hdg/matrix.hpp"
#include "hdg/mesh.hpp"

namespace hdg {

/// How the penalty is specified. `FaceValue` fixes the physical face
/// penalty tau_e and derives tau_hat = tau_e * h / 2; `Reference` fixes
/// tau_hat directly (tau_e = 2 tau_hat / h).
struct Penalty {
  enum class Kind { FaceValue, Reference };
  Kind kind = Kind::FaceValue;
  double value = 25.0;

  /// Reference penalty for this mesh. FaceValue requires cubic elements
  /// (one shared tau_hat for all directions); throws hdg::Error otherwise.
  [[nodiscard]] double tau_hat(const Mesh& mesh) const;
};

/// Inverse diagonal of the element operator in the element eigenspace:
/// inv[a + n (b + n c)] = 1 / (lambda alpha0 + alpha1 Lambda_a
///                              + alpha2 Lambda_b + alpha3 Lambda_c).
struct EigenScale3D {
  double lambda = 0.0;
  std::vector<double> inv;
};

/// Throws hdg::Error if any denominator is non-positive or non-finite.
[[nodiscard]] EigenScale3D build_eigen_scale(const Basis1D& basis, const ElementGeometry& geom,
                                             double lambda);

/// Per geometry class constants used by the element kernels. The metric
/// factors are folded into the small matrices: bs[d] = alpha_d B_S and
/// gcc[d] = alpha_d (G + C^T M^{-1} C).
struct ElementKernelData {
  ElementGeometry geometry;
  EigenScale3D scale;
  std::array<Matrix, 3> bs;
  std::array<Matrix, 3> gcc;
};

/// Immutable operator setup: basis, mesh, Helmholtz parameter and the
/// precomputed eigenspace scaling. Elements with identical geometry share
/// one ElementKernelData.
class OperatorContext {
 public:
  OperatorContext(Basis1D basis, Mesh mesh, double lambda, unsigned threads = 1);

  [[nodiscard]] const Basis1D& basis() const noexcept { return basis_; }
  [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] int p() const noexcept { return basis_.p; }
  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(basis_.p + 1); }

  [[nodiscard]] const ElementKernelData& kernel(std::size_t e) const noexcept {
    return classes_[class_of_[e]];
  }
  [[nodiscard]] std::size_t num_geometry_classes() const noexcept { return classes_.size(); }

  /// w_i w_j over a face block: the face mass M (x) M without metric factor.
  [[nodiscard]] std::span<const double> face_mass() const noexcept { return face_mass_; }

  [[nodiscard]] unsigned threads() const noexcept { return threads_; }
  void set_threads(unsigned t) noexcept { threads_ = t == 0 ? 1 : t; }

 private:
  Basis1D basis_;
  Mesh mesh_;
  double lambda_;
  unsigned threads_;
  std::vector<ElementKernelData> classes_;
  std::vector<std::size_t> class_of_;
  std::vector<double> face_mass_;
};

/// Builds basis and context from a mesh, degree and penalty specification.
[[nodiscard]] OperatorContext make_context(const Mesh& mesh, int p, const Penalty& penalty,
                                           double lambda, unsigned threads = 1);

/// Per-element HDG residual in one dimension (2 trace values per element).
/// Metric: alpha0 = h/2, alpha1 = 2/h.
[[nodiscard]] std::vector<std::array<double, 2>> hdg_op_1d(
    const Basis1D& basis, std::span<const double> widths, double lambda,
    std::span<const std::array<double, 2>> flux);

/// Scratch memory for one worker of the element kernels.
struct ElementWorkspace {
  explicit ElementWorkspace(std::size_t n);
  std::vector<double> eigen;                    // F_E, then u_E
  std::array<std::vector<double>, 6> face_in;   // transformed inputs
  std::array<std::vector<double>, 6> face_tmp;  // reductions
  std::vector<double> scratch;
};

/// Element operator K_e applied to six face blocks (index 2*dir + side),
/// writing six residual blocks. `transformed` selects the product
/// factorized variant that expects face-eigenspace inputs.
void apply_element_operator(const OperatorContext& ctx, std::size_t e,
                            const std::array<std::span<const double>, 6>& in,
                            const std::array<std::span<double>, 6>& out, ElementWorkspace& ws,
                            bool transformed);

/// Matrix-free global trace operator K (sum over elements of Q^T K_e Q).
/// Dirichlet faces are read as data but always receive a zero residual.
class HdgOperator {
 public:
  enum class Variant { SumFactorized, Transformed };

  /// `threads` = 0 uses the context setting; counted runs pass 1.
  HdgOperator(const OperatorContext& ctx, Variant variant, unsigned threads = 0);

  void apply(const FluxField& in, FluxField& out);
  [[nodiscard]] const OperatorContext& context() const noexcept { return *ctx_; }
  [[nodiscard]] Variant variant() const noexcept { return variant_; }

 private:
  const OperatorContext* ctx_;
  Variant variant_;
  std::vector<ElementWorkspace> workspaces_;
  std::vector<double> element_residual_;
};

/// Convenience wrappers around HdgOperator.
[[nodiscard]] FluxField hdg_op_3d(const OperatorContext& ctx, const FluxField& in);
[[nodiscard]] FluxField hdg_op_3d_transformed(const OperatorContext& ctx, const FluxField& in);

/// Face-wise change of basis between nodal traces and the face eigenspace.
enum class FaceTransform {
  UnknownToEigen,   // (S^T M (x) S^T M): trace values
  ResidualToEigen,  // (S^T (x) S^T): residuals / right-hand sides
  EigenToUnknown,   // (S (x) S)
  EigenToResidual,  // (M S (x) M S)
};
void transform_faces(const OperatorContext& ctx, FaceTransform kind, FluxField& field);

/// Assembly routes for the dense element matrix.
enum class DenseRoute {
  MatrixFree,     // columns of the sum-factorized kernel on unit vectors
  ExplicitSchur,  // K_e = G_e - R_e^T A_e^{-1} R_e from dense Kronecker blocks
  Both,           // both, throwing hdg::Error if they disagree
};

/// Dense blocks of the local LDG system of one element (unknown order
/// u, q1, q2, q3; trace order 2*dir + side).
struct LocalLdgBlocks {
  Matrix A;  // 4 n^3 x 4 n^3
  Matrix R;  // 4 n^3 x 6 n^2
  Matrix G;  // 6 n^2 x 6 n^2
};
[[nodiscard]] LocalLdgBlocks assemble_local_ldg_blocks(const OperatorContext& ctx, std::size_t e);

/// Dense K_e over the 6 (p+1)^2 element-local trace values. Intended for
/// p <= 4; larger degrees print a warning (cost grows like p^9 for the
/// explicit route).
[[nodiscard]] Matrix assemble_dense_element(const OperatorContext& ctx, std::size_t e,
                                            DenseRoute route = DenseRoute::Both);

}  // namespace hdg
