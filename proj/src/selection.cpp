#include "doalab/selection.hpp"

#include "doalab/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace doalab {

CbMode parse_cb_mode(const std::string& name) {
  if (name == "whitened") return CbMode::whitened;
  if (name == "classic") return CbMode::classic;
  throw ConfigError("unknown beamformer '" + name + "' (expected whitened or classic)");
}

namespace {

CVector steer_closed(const UlaGeometry& geom, double theta_deg) {
  if (!(std::abs(theta_deg) <= 90.0)) throw DomainError("angle outside [-90, 90]");
  return steering_vector_unchecked(geom, deg2rad(theta_deg));
}

CMatrix whitened_scm(const SelectionContext& ctx) {
  const CVector w = ctx.q_hat.inv_sqrt_powers().cast<cplx>();
  return w.asDiagonal() * ctx.scm * w.asDiagonal();
}

// Calls fn(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > n) return;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

double glr_spectrum(const SelectionContext& ctx, double theta_deg) {
  const CVector qa = ctx.q_hat.powers().cwiseInverse().cast<cplx>().asDiagonal() * steer_closed(ctx.geom, theta_deg);
  const CVector a = steer_closed(ctx.geom, theta_deg);
  return qa.dot(ctx.scm * qa).real() / a.dot(qa).real();
}

double cb_spectrum(const SelectionContext& ctx, double theta_deg) {
  if (ctx.cb_mode == CbMode::whitened) return glr_spectrum(ctx, theta_deg);
  const CVector a = steer_closed(ctx.geom, theta_deg);
  return a.dot(ctx.scm * a).real() / static_cast<double>(ctx.geom.num_sensors);
}

std::vector<double> step1_threshold(const SelectionContext& ctx, const std::vector<double>& candidates,
                                    double* eta_out) {
  if (!(ctx.grid_deg > 0.0)) throw DomainError("grid step must be positive");
  const int points = static_cast<int>(std::lround(180.0 / ctx.grid_deg)) + 1;
  std::vector<double> spec(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double theta = std::min(90.0, -90.0 + i * ctx.grid_deg);
    spec[static_cast<std::size_t>(i)] = cb_spectrum(ctx, theta);
  }
  std::vector<double> peaks;
  for (int i = 1; i + 1 < points; ++i) {
    const double v = spec[static_cast<std::size_t>(i)];
    if (v > spec[static_cast<std::size_t>(i - 1)] && v > spec[static_cast<std::size_t>(i + 1)]) peaks.push_back(v);
  }
  std::sort(peaks.begin(), peaks.end(), std::greater<>());

  double eta = 0.0;
  if (peaks.empty()) {
    // no peak to anchor on: nothing can exceed the spectrum maximum
    eta = *std::max_element(spec.begin(), spec.end());
  } else if (static_cast<int>(peaks.size()) > ctx.num_sources) {
    eta = peaks[static_cast<std::size_t>(ctx.num_sources)];
  } else {
    eta = peaks.back();
  }
  if (eta_out) *eta_out = eta;

  std::vector<double> survivors;
  for (double c : candidates) {
    if (cb_spectrum(ctx, c) > eta) survivors.push_back(c);
  }
  if (static_cast<int>(survivors.size()) < ctx.num_sources) survivors = candidates;
  return survivors;
}

FirstPick step2_glr_pick(const SelectionContext& ctx, const std::vector<double>& survivors) {
  if (survivors.empty()) throw DomainError("no survivors to pick from");
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const double v = glr_spectrum(ctx, survivors[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  FirstPick out;
  out.first_doa = survivors[best];
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (i != best) out.remainder.push_back(survivors[i]);
  }
  return out;
}

double ml_subset_cost(const SelectionContext& ctx, double first_doa, const std::vector<double>& subset,
                      bool* rank_deficient) {
  const int m = ctx.geom.num_sensors;
  const CVector w = ctx.q_hat.inv_sqrt_powers().cast<cplx>();
  const CMatrix rw = whitened_scm(ctx);

  CMatrix at(m, static_cast<Eigen::Index>(subset.size()));
  for (std::size_t i = 0; i < subset.size(); ++i) {
    at.col(static_cast<Eigen::Index>(i)) = w.asDiagonal() * steer_closed(ctx.geom, subset[i]);
  }
  CMatrix perp = CMatrix::Identity(m, m);
  bool deficient = false;
  if (at.cols() > 0) {
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(at);
    cod.setThreshold(1e-10);
    deficient = cod.rank() < at.cols();
    perp -= at * cod.pseudoInverse();
  }
  CVector nu = perp * (w.asDiagonal() * steer_closed(ctx.geom, first_doa));
  const double norm = nu.norm();
  if (norm > 1e-12) {
    nu /= norm;
  } else {
    nu.setZero();
    deficient = true;
  }
  if (rank_deficient) *rank_deficient = deficient;
  const CMatrix proj = perp - nu * nu.adjoint();
  return (proj * rw).trace().real();
}

SubsetSearch step3_ml_subsets(const SelectionContext& ctx, double first_doa, const std::vector<double>& remainder) {
  const int need = ctx.num_sources - 1;
  if (static_cast<int>(remainder.size()) < need) throw DomainError("fewer remaining candidates than L - 1");
  SubsetSearch out;
  if (need == 0) {
    out.final = {first_doa};
    return out;
  }
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  for_each_combination(static_cast<int>(remainder.size()), need, [&](const std::vector<int>& idx) {
    std::vector<double> subset;
    for (int i : idx) subset.push_back(remainder[static_cast<std::size_t>(i)]);
    bool deficient = false;
    const double cost = ml_subset_cost(ctx, first_doa, subset, &deficient);
    out.rank_deficient = out.rank_deficient || deficient;
    ++out.evaluated_subsets;
    if (cost < best_cost) {
      best_cost = cost;
      best = subset;
    }
  });
  out.final = best;
  out.final.push_back(first_doa);
  std::sort(out.final.begin(), out.final.end());
  return out;
}

SelectionTrace select(const SelectionContext& ctx, const std::vector<double>& candidates) {
  SelectionTrace trace;
  trace.survivors = step1_threshold(ctx, candidates, &trace.threshold_eta);
  const FirstPick pick = step2_glr_pick(ctx, trace.survivors);
  trace.first_doa = pick.first_doa;
  const SubsetSearch search = step3_ml_subsets(ctx, pick.first_doa, pick.remainder);
  trace.evaluated_subsets = search.evaluated_subsets;
  trace.rank_deficient = search.rank_deficient;
  trace.final = search.final;
  return trace;
}

}  // namespace doalab
