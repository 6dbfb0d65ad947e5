#include "hdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdg/error.hpp"

namespace hdg {

ElementGeometry ElementGeometry::from_widths(std::array<double, 3> h) noexcept {
  ElementGeometry g;
  g.alpha0 = h[0] * h[1] * h[2] / 8.0;
  for (int d = 0; d < 3; ++d) {
    g.half_width[d] = 0.5 * h[d];
    const double s = 2.0 / h[d];
    g.alpha[d] = g.alpha0 * s * s;
  }
  return g;
}

std::array<std::size_t, 3> Mesh::element_coords(std::size_t e) const noexcept {
  const std::size_t i = e % n_[0];
  const std::size_t j = (e / n_[0]) % n_[1];
  const std::size_t k = e / (n_[0] * n_[1]);
  return {i, j, k};
}

int Mesh::face_direction(std::size_t f) const noexcept {
  if (f < face_offset_[1]) return 0;
  if (f < face_offset_[2]) return 1;
  return 2;
}

std::array<double, 3> Mesh::element_origin(std::size_t e) const noexcept {
  const auto c = element_coords(e);
  return {lo_[0] + static_cast<double>(c[0]) * h_[0], lo_[1] + static_cast<double>(c[1]) * h_[1],
          lo_[2] + static_cast<double>(c[2]) * h_[2]};
}

Mesh build_mesh(std::array<std::size_t, 3> n, std::array<double, 3> lower,
                std::array<double, 3> upper, const BoxBoundary& bc) {
  Mesh m;
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1) throw Error("build_mesh: element count must be >= 1 in every direction");
    if (!(upper[d] > lower[d]) || !std::isfinite(upper[d] - lower[d]))
      throw Error("build_mesh: box has zero or negative extent in direction " +
                  std::to_string(d));
  }
  m.n_ = n;
  m.lo_ = lower;
  m.hi_ = upper;
  m.bc_ = bc;
  for (int d = 0; d < 3; ++d) m.h_[d] = (upper[d] - lower[d]) / static_cast<double>(n[d]);

  // Face counts: (n_d + 1) * n_j * n_k.
  std::size_t offset = 0;
  for (int d = 0; d < 3; ++d) {
    std::array<std::size_t, 3> ext = n;
    ext[d] += 1;
    m.face_count_[d] = ext[0] * ext[1] * ext[2];
    m.face_offset_[d] = offset;
    offset += m.face_count_[d];
  }
  const std::size_t nf = offset;
  m.kinds_.assign(nf, FaceKind::Interior);
  m.face_elements_.assign(nf, {kNoElement, kNoElement});

  auto face_index = [&](int d, std::array<std::size_t, 3> c) {
    std::array<std::size_t, 3> ext = n;
    ext[d] += 1;
    return m.face_offset_[d] + c[0] + ext[0] * (c[1] + ext[1] * c[2]);
  };

  for (int d = 0; d < 3; ++d) {
    std::array<std::size_t, 3> ext = n;
    ext[d] += 1;
    for (std::size_t k = 0; k < ext[2]; ++k)
      for (std::size_t j = 0; j < ext[1]; ++j)
        for (std::size_t i = 0; i < ext[0]; ++i) {
          const std::array<std::size_t, 3> c{i, j, k};
          const std::size_t f = face_index(d, c);
          const std::size_t plane = c[d];
          if (plane == 0 || plane == n[d]) {
            const int side = plane == 0 ? 0 : 1;
            m.kinds_[f] = bc[2 * d + side] == BoundaryKind::Dirichlet ? FaceKind::Dirichlet
                                                                      : FaceKind::Neumann;
          }
        }
  }

  const std::size_t ne = m.num_elements();
  m.element_faces_.resize(6 * ne);
  m.geometry_.assign(ne, ElementGeometry::from_widths(m.h_));
  for (std::size_t e = 0; e < ne; ++e) {
    const auto c = m.element_coords(e);
    for (int d = 0; d < 3; ++d) {
      auto lo = c;
      auto hi = c;
      hi[d] += 1;
      const std::size_t flo = face_index(d, lo);
      const std::size_t fhi = face_index(d, hi);
      m.element_faces_[6 * e + 2 * d] = flo;
      m.element_faces_[6 * e + 2 * d + 1] = fhi;
      // The element is on the high side of its low face and vice versa.
      m.face_elements_[flo][1] = e;
      m.face_elements_[fhi][0] = e;
    }
  }
  return m;
}

FluxField::FluxField(const Mesh& mesh, int p)
    : block_(static_cast<std::size_t>((p + 1) * (p + 1))),
      faces_(mesh.num_faces()),
      data_(faces_ * block_, 0.0) {}

void FluxField::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

ElementField::ElementField(const Mesh& mesh, int p) : ElementField(mesh.num_elements(), p) {}

ElementField::ElementField(std::size_t num_elements, int p)
    : block_(static_cast<std::size_t>((p + 1) * (p + 1) * (p + 1))),
      elements_(num_elements),
      data_(elements_ * block_, 0.0) {}

ElementFlux gather(const Mesh& mesh, const FluxField& global, std::size_t e) {
  ElementFlux local;
  for (int d = 0; d < 3; ++d)
    for (int s = 0; s < 2; ++s) {
      const auto src = global.face(mesh.element_face(e, d, s));
      local.at(d, s).assign(src.begin(), src.end());
    }
  return local;
}

void scatter_add(const Mesh& mesh, const ElementFlux& local, std::size_t e, FluxField& global) {
  for (int d = 0; d < 3; ++d)
    for (int s = 0; s < 2; ++s) {
      const std::size_t f = mesh.element_face(e, d, s);
      if (!mesh.is_unknown(f)) continue;
      auto dst = global.face(f);
      const auto& src = local.at(d, s);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
}

void zero_dirichlet(const Mesh& mesh, FluxField& field) noexcept {
  for (std::size_t f = 0; f < mesh.num_faces(); ++f)
    if (!mesh.is_unknown(f)) std::ranges::fill(field.face(f), 0.0);
}

}  // namespace hdg
