#pragma once

#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

/// Numeric Cramer-Rao bound on the DOAs for deterministic source signals
/// with known diagonal noise covariance. The Fisher information of the
/// Gaussian log-likelihood, with signals concentrated out, is
///   J = 2 N Re{ (D^H Q^-1/2 P_perp Q^-1/2 D) .* P^T },
/// where P_perp projects onto the complement of span(Q^-1/2 A), the sample
/// source covariance is replaced by P, and the steering derivatives D are
/// central differences with step 1e-5 rad.
struct CrbResult {
  RVector variance_deg2;  // per source, in input order
  bool singular = false;
};

CrbResult numeric_crb(const ArrayScenario& scenario);

/// 10 log10 sqrt(mean CRB) in degrees, comparable with rmse_db.
double crb_db(const CrbResult& crb);

}  // namespace doalab
