#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entmix/env_model.hpp"
#include "entmix/rng.hpp"

namespace entmix {

struct EnsembleSpec {
  enum class Kind { out_degrees, pareto, profile_file };
  Kind kind = Kind::out_degrees;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<int> out_degrees;  // size n, or size 1 meaning constant
  double alpha = 0.0;            // tail index, pareto kind
  std::string profile_path;

  void validate() const;
};

// Rows uniform over d_i slots: the random walk on a uniform random digraph
// with the given out-degrees.
Profiles out_degree_profiles(const EnsembleSpec& spec);

// One heavy-tailed row: omega_j = U^{-1/alpha} so P(omega > t) = (t v 1)^{-alpha},
// normalized; returned sorted descending.
RowProfile pareto_row(int n, double alpha, Rng& rng);

// Raw omega draws in stream order (unsorted), for matrix-realization use.
void pareto_raw_row(int n, double alpha, Rng& rng, double* out);

// The canonical per-row substream for heavy-tailed rows under a master seed.
inline Rng pareto_row_stream(std::uint64_t seed, int row) {
  return Rng::stream(seed, stream_tag::pareto_row, static_cast<std::uint64_t>(row));
}

// Profiles for any ensemble kind.  Heavy-tailed rows are regenerated from
// (seed, row) substreams, so the result is consistent with streamed matrix
// rows produced from the same seed.
Profiles make_profiles(const EnsembleSpec& spec);

// psi(x) = Gamma'(x)/Gamma(x), x > 0.  Recurrence shift to x >= 10 followed
// by the asymptotic series with Bernoulli terms through order 14; absolute
// error below 1e-12 on [1e-3, 1e3].
double digamma(double x);

// h(alpha) = psi(1) - psi(1 - alpha), alpha in (0, 1).
double h_alpha(double alpha);

// Same quantity by adaptive quadrature of int_0^inf (e^{at}-1)/(e^t-1) dt,
// integrand extended by continuity at 0 with value alpha.
double h_alpha_integral(double alpha, double tol);

}  // namespace entmix
