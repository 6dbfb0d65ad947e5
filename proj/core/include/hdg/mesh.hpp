#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hdg {

enum class FaceKind { Interior, Dirichlet, Neumann };
enum class BoundaryKind { Dirichlet, Neumann };

/// Boundary kind of each box side, indexed 2*direction + (0 low, 1 high).
using BoxBoundary = std::array<BoundaryKind, 6>;

[[nodiscard]] constexpr BoxBoundary all_dirichlet() noexcept {
  return {BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet,
          BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet};
}

/// Metric coefficients of a Cartesian element: alpha0 = h1 h2 h3 / 8 and
/// alpha_i = alpha0 (2 / h_i)^2.
struct ElementGeometry {
  std::array<double, 3> half_width{};  // h_i / 2
  double alpha0 = 0.0;
  std::array<double, 3> alpha{};

  [[nodiscard]] static ElementGeometry from_widths(std::array<double, 3> h) noexcept;
};

/// Sentinel for "no element on this side of the face".
inline constexpr std::size_t kNoElement = static_cast<std::size_t>(-1);

/// Uniform Cartesian grid of cuboids on a box.
///
/// Elements are numbered lexicographically with x1 fastest. Faces are
/// numbered direction-major (all x1-normal faces first), then
/// lexicographically with the normal index fastest: for direction 0 the
/// face (i, j, k) has local index i + (n1+1) * (j + n2 * k).
/// Face values are ordered lexicographically in the two tangential
/// directions, lower direction fastest.
class Mesh {
 public:
  [[nodiscard]] const std::array<std::size_t, 3>& counts() const noexcept { return n_; }
  [[nodiscard]] const std::array<double, 3>& lower() const noexcept { return lo_; }
  [[nodiscard]] const std::array<double, 3>& upper() const noexcept { return hi_; }
  [[nodiscard]] const std::array<double, 3>& widths() const noexcept { return h_; }
  [[nodiscard]] const BoxBoundary& boundary() const noexcept { return bc_; }

  [[nodiscard]] std::size_t num_elements() const noexcept { return n_[0] * n_[1] * n_[2]; }
  [[nodiscard]] std::size_t num_faces(int dir) const noexcept { return face_count_[dir]; }
  [[nodiscard]] std::size_t num_faces() const noexcept {
    return face_count_[0] + face_count_[1] + face_count_[2];
  }
  [[nodiscard]] std::size_t face_offset(int dir) const noexcept { return face_offset_[dir]; }

  [[nodiscard]] std::size_t element_index(std::array<std::size_t, 3> ijk) const noexcept {
    return ijk[0] + n_[0] * (ijk[1] + n_[1] * ijk[2]);
  }
  [[nodiscard]] std::array<std::size_t, 3> element_coords(std::size_t e) const noexcept;

  /// Global index of the low (side 0) or high (side 1) face of element e
  /// in direction dir.
  [[nodiscard]] std::size_t element_face(std::size_t e, int dir, int side) const noexcept {
    return element_faces_[6 * e + 2 * dir + side];
  }

  /// Direction of a global face index.
  [[nodiscard]] int face_direction(std::size_t f) const noexcept;
  [[nodiscard]] FaceKind face_kind(std::size_t f) const noexcept { return kinds_[f]; }
  [[nodiscard]] bool is_unknown(std::size_t f) const noexcept {
    return kinds_[f] != FaceKind::Dirichlet;
  }

  /// Elements adjacent to face f: {element whose high face it is, element
  /// whose low face it is}; kNoElement on the boundary.
  [[nodiscard]] std::array<std::size_t, 2> face_elements(std::size_t f) const noexcept {
    return face_elements_[f];
  }

  /// Lower corner of element e.
  [[nodiscard]] std::array<double, 3> element_origin(std::size_t e) const noexcept;

  [[nodiscard]] const ElementGeometry& geometry(std::size_t e) const noexcept {
    return geometry_[e];
  }

  friend Mesh build_mesh(std::array<std::size_t, 3> n, std::array<double, 3> lower,
                         std::array<double, 3> upper, const BoxBoundary& bc);

 private:
  std::array<std::size_t, 3> n_{};
  std::array<double, 3> lo_{};
  std::array<double, 3> hi_{};
  std::array<double, 3> h_{};
  BoxBoundary bc_{};
  std::array<std::size_t, 3> face_count_{};
  std::array<std::size_t, 3> face_offset_{};
  std::vector<std::size_t> element_faces_;
  std::vector<FaceKind> kinds_;
  std::vector<std::array<std::size_t, 2>> face_elements_;
  std::vector<ElementGeometry> geometry_;
};

/// Builds the grid. Throws hdg::Error for zero counts or a degenerate box.
[[nodiscard]] Mesh build_mesh(std::array<std::size_t, 3> n, std::array<double, 3> lower,
                              std::array<double, 3> upper,
                              const BoxBoundary& bc = all_dirichlet());

/// Trace unknowns: one (p+1)^2 block per face of the mesh, stored in face
/// order. Dirichlet faces are part of the storage but hold prescribed data
/// (or zero inside Krylov vectors); they are never unknowns.
class FluxField {
 public:
  FluxField() = default;
  FluxField(const Mesh& mesh, int p);

  [[nodiscard]] std::size_t block_size() const noexcept { return block_; }
  [[nodiscard]] std::size_t num_faces() const noexcept { return faces_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] std::span<double> face(std::size_t f) noexcept {
    return {data_.data() + f * block_, block_};
  }
  [[nodiscard]] std::span<const double> face(std::size_t f) const noexcept {
    return {data_.data() + f * block_, block_};
  }
  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

  void fill(double v) noexcept;

 private:
  std::size_t block_ = 0;
  std::size_t faces_ = 0;
  std::vector<double> data_;
};

/// Cell-interior coefficients, (p+1)^3 per element, x1 fastest.
class ElementField {
 public:
  ElementField() = default;
  ElementField(const Mesh& mesh, int p);
  ElementField(std::size_t num_elements, int p);

  [[nodiscard]] std::size_t block_size() const noexcept { return block_; }
  [[nodiscard]] std::size_t num_elements() const noexcept { return elements_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] std::span<double> element(std::size_t e) noexcept {
    return {data_.data() + e * block_, block_};
  }
  [[nodiscard]] std::span<const double> element(std::size_t e) const noexcept {
    return {data_.data() + e * block_, block_};
  }
  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

 private:
  std::size_t block_ = 0;
  std::size_t elements_ = 0;
  std::vector<double> data_;
};

/// Element-local copies of the six face blocks of one element, indexed
/// 2*direction + side.
struct ElementFlux {
  std::array<std::vector<double>, 6> blocks;

  [[nodiscard]] std::vector<double>& at(int dir, int side) { return blocks[2 * dir + side]; }
  [[nodiscard]] const std::vector<double>& at(int dir, int side) const {
    return blocks[2 * dir + side];
  }
};

/// Q_e: copies the six face blocks of element e out of the global field.
/// Dirichlet faces return whatever the field holds there (the boundary data).
[[nodiscard]] ElementFlux gather(const Mesh& mesh, const FluxField& global, std::size_t e);

/// Q_e^T: adds element-local face residuals into the global field.
/// Contributions to Dirichlet faces are discarded.
void scatter_add(const Mesh& mesh, const ElementFlux& local, std::size_t e, FluxField& global);

/// Sets every Dirichlet face block to zero.
void zero_dirichlet(const Mesh& mesh, FluxField& field) noexcept;

}  // namespace hdg
