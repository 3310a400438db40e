#pragma once

#include <optional>
#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

struct RootMusicResult {
  std::vector<double> angles_deg;  // ascending
  std::vector<cplx> roots;         // all 2(M-1) polynomial roots
  bool padded = false;             // fewer than L roots inside the unit circle
};

/// Coefficients (highest power first) of z^(M-1) a^T(1/z) C a(z) for Hermitian C.
CVector root_music_polynomial(const CMatrix& c);

/// Standard root-MUSIC. With q_hat, the noise subspace comes from
/// Q^-1/2 R Q^-1/2 and is mapped back by Q^-1/2 before rooting.
RootMusicResult root_music(const CMatrix& scm, const std::optional<DiagonalNoiseCovariance>& q_hat, int num_sources,
                           const UlaGeometry& geom);

}  // namespace doalab
