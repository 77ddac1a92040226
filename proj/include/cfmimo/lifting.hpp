#pragma once

// Complex precoders as real decision variables. A length-n complex vector w
// occupies 2n consecutive variables starting at `base`, interleaved as
// (Re w_0, Im w_0, Re w_1, Im w_1, ...).

#include <Eigen/Dense>

#include "cfmimo/conic.hpp"

namespace cfmimo::lifting {

/// e += scale * Re(h^T w)
inline void add_inner_real(conic::AffineExpr& e, const Eigen::VectorXcd& h, Index base, double scale = 1.0) {
  for (Index i = 0; i < h.size(); ++i) {
    if (h(i).real() != 0.0) e.add(base + 2 * i, scale * h(i).real());
    if (h(i).imag() != 0.0) e.add(base + 2 * i + 1, -scale * h(i).imag());
  }
}

/// e += scale * Im(h^T w)
inline void add_inner_imag(conic::AffineExpr& e, const Eigen::VectorXcd& h, Index base, double scale = 1.0) {
  for (Index i = 0; i < h.size(); ++i) {
    if (h(i).imag() != 0.0) e.add(base + 2 * i, scale * h(i).imag());
    if (h(i).real() != 0.0) e.add(base + 2 * i + 1, scale * h(i).real());
  }
}

inline Eigen::VectorXcd extract(const Eigen::VectorXd& x, Index base, Index n) {
  Eigen::VectorXcd w(n);
  for (Index i = 0; i < n; ++i) w(i) = cdouble(x(base + 2 * i), x(base + 2 * i + 1));
  return w;
}

}  // namespace cfmimo::lifting
