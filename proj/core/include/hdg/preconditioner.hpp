#pragma once

#include <vector>

#include "hdg/mesh.hpp"
#include "hdg/operator.hpp"

namespace hdg {

/// Face-wise block-Jacobi preconditioner. The exact face self-coupling of
/// the trace operator is diagonal in the face eigenspace, so each block
/// inverse is stored as (p+1)^2 entries and applied as
///   z_f = (S (x) S) Yinv_f (S^T (x) S^T) r_f.
struct BlockPreconditioner {
  std::size_t block = 0;
  std::vector<double> inverse;  // per face, zero on Dirichlet faces
  Matrix S;
  Matrix St;
};

/// Entrywise scaling by one positive weight per trace value. Used with the
/// true diagonal of K (untransformed system) and with the eigenspace block
/// inverse (transformed system). Entries on Dirichlet faces are zero.
struct DiagonalPreconditioner {
  std::vector<double> inverse;
};

/// Face self-coupling in the face eigenspace, summed over the adjoining
/// elements (zero on Dirichlet faces). Throws hdg::Error on a non-positive
/// entry of an unknown face.
[[nodiscard]] std::vector<double> face_eigen_self_coupling(const OperatorContext& ctx);

[[nodiscard]] BlockPreconditioner build_block_preconditioner(const OperatorContext& ctx);
void apply_block_preconditioner(const BlockPreconditioner& pc, const FluxField& r, FluxField& z);

/// Exact diagonal of K restricted to the unknowns, inverted.
[[nodiscard]] DiagonalPreconditioner build_diagonal_preconditioner(const OperatorContext& ctx);

/// Block preconditioner of the transformed system, which is diagonal there.
[[nodiscard]] DiagonalPreconditioner transformed_preconditioner(const OperatorContext& ctx);

void apply_diagonal_preconditioner(const DiagonalPreconditioner& pc, const FluxField& r,
                                   FluxField& z);

}  // namespace hdg
