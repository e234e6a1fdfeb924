//
// Project MolJAE - Copyright 2026 The MolJAE Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLJAE_FRAMES_H_
#define MOLJAE_FRAMES_H_

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace moljae {

template <class Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <class Scalar>
using Positions = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

//! Orthonormal, right-handed node frame. Columns of matrix() are e1, e2, e3.
template <class Scalar>
struct Frame {
  Vec3<Scalar> e1 = Vec3<Scalar>::UnitX();
  Vec3<Scalar> e2 = Vec3<Scalar>::UnitY();
  Vec3<Scalar> e3 = Vec3<Scalar>::UnitZ();
  bool degenerate = false;

  Eigen::Matrix<Scalar, 3, 3> matrix() const {
    Eigen::Matrix<Scalar, 3, 3> m;
    m << e1, e2, e3;
    return m;
  }

  static Frame canonical() {
    Frame f;
    f.degenerate = true;
    return f;
  }
};

struct FrameOptions {
  double cutoff = 5.0;             // neighborhood radius, angstrom
  double weight_width = 1.5;       // gaussian width of neighbor weights
  double degeneracy_tol = 1e-8;
};

//! Frame from a position and its neighborhood center:
//! e1 = (x - c)/|x - c|, e2 = (c x x)/|c x x|, e3 = e1 x e2.
//! Falls back to the canonical axes when either norm is below tol.
template <class Scalar>
Frame<Scalar> frame_from_center(const Vec3<Scalar> &x, const Vec3<Scalar> &c,
                                double tol = 1e-8) {
  Vec3<Scalar> d = x - c;
  Vec3<Scalar> cross = c.cross(x);
  const Scalar dn = d.norm(), cn = cross.norm();
  if (dn < tol || cn < tol)
    return Frame<Scalar>::canonical();
  Frame<Scalar> f;
  f.e1 = d / dn;
  f.e2 = cross / cn;
  f.e3 = f.e1.cross(f.e2);
  return f;
}

//! Weighted neighborhood center: neighbors are weighted by
//! exp(-|x_j - x|^2 / (2 w^2)).
template <class Scalar>
Vec3<Scalar> neighborhood_center(const Vec3<Scalar> &x,
                                 std::span<const Vec3<Scalar>> neighbors,
                                 const FrameOptions &opt = {}) {
  Vec3<Scalar> acc = Vec3<Scalar>::Zero();
  Scalar wsum = 0;
  const Scalar inv = Scalar(1) / (2 * opt.weight_width * opt.weight_width);
  for (const auto &y: neighbors) {
    const Scalar w = std::exp(-(y - x).squaredNorm() * inv);
    acc += w * y;
    wsum += w;
  }
  if (wsum <= Scalar(0))
    return x;
  return acc / wsum;
}

template <class Scalar>
Frame<Scalar> local_frame(const Vec3<Scalar> &x,
                          std::span<const Vec3<Scalar>> neighbors,
                          const FrameOptions &opt = {}) {
  if (neighbors.empty())
    return Frame<Scalar>::canonical();
  return frame_from_center<Scalar>(x, neighborhood_center(x, neighbors, opt),
                                   opt.degeneracy_tol);
}

//! Frames for every atom. The neighborhood of atom i is every other atom
//! within the cutoff, or every other atom if none is within it.
template <class Scalar>
std::vector<Frame<Scalar>> node_frames(const Positions<Scalar> &pos,
                                       const FrameOptions &opt = {}) {
  const Eigen::Index n = pos.rows();
  std::vector<Frame<Scalar>> frames(n);
  std::vector<Vec3<Scalar>> near, all;
  for (Eigen::Index i = 0; i < n; ++i) {
    near.clear();
    all.clear();
    const Vec3<Scalar> xi = pos.row(i).transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i)
        continue;
      const Vec3<Scalar> xj = pos.row(j).transpose();
      all.push_back(xj);
      if ((xj - xi).norm() < opt.cutoff)
        near.push_back(xj);
    }
    const auto &nb = near.empty() ? all : near;
    frames[i] = local_frame<Scalar>(xi, nb, opt);
  }
  return frames;
}

//! Columnwise mean of the frames, re-orthonormalized by Gram-Schmidt in the
//! order e1, e2, e3. Degenerate means are skipped and canonical axes fill
//! the remaining slots; e3 is always e1 x e2.
template <class Scalar>
Frame<Scalar> global_frame(std::span<const Frame<Scalar>> frames,
                           double tol = 1e-8) {
  if (frames.empty())
    return Frame<Scalar>::canonical();
  Vec3<Scalar> m1 = Vec3<Scalar>::Zero(), m2 = m1, m3 = m1;
  for (const auto &f: frames) {
    m1 += f.e1;
    m2 += f.e2;
    m3 += f.e3;
  }
  const Scalar inv = Scalar(1) / static_cast<Scalar>(frames.size());
  const Vec3<Scalar> candidates[] = {
    m1 * inv, m2 * inv, m3 * inv,
    Vec3<Scalar>::UnitX(), Vec3<Scalar>::UnitY(), Vec3<Scalar>::UnitZ(),
  };
  Vec3<Scalar> basis[2];
  int found = 0;
  bool fallback = false;
  for (int k = 0; k < 6 && found < 2; ++k) {
    Vec3<Scalar> v = candidates[k];
    for (int b = 0; b < found; ++b)
      v -= basis[b].dot(v) * basis[b];
    const Scalar nv = v.norm();
    if (nv < tol) {
      fallback = true;
      continue;
    }
    basis[found++] = v / nv;
  }
  Frame<Scalar> g;
  g.e1 = basis[0];
  g.e2 = basis[1];
  g.e3 = g.e1.cross(g.e2);
  g.degenerate = fallback;
  return g;
}

//! h1 e1 + h2 e2 + h3 e3.
template <class Scalar>
Vec3<Scalar> tensorize(const Vec3<Scalar> &h, const Frame<Scalar> &f) {
  return h(0) * f.e1 + h(1) * f.e2 + h(2) * f.e3;
}

//! Rotation-invariant coordinates of a point cloud: rows mapped by F^T.
template <class Scalar>
Positions<Scalar> project_to_frame(const Positions<Scalar> &pos,
                                   const Frame<Scalar> &f) {
  return pos * f.matrix();
}

}  // namespace moljae

#endif  // MOLJAE_FRAMES_H_
