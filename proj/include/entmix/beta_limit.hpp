#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "entmix/env_model.hpp"
#include "entmix/rng.hpp"

namespace entmix {

// One size-biased pick from a fresh heavy-tailed row: sample the row, pick
// index j with probability P_n(1,j), return P_n(1,j).
double size_biased_pick(int n, double alpha, Rng& rng);

// Beta(1-alpha, alpha) density f(u) = (1-u)^{alpha-1} u^{-alpha} sin(pi alpha)/pi.
double beta_density(double u, double alpha);
// Overload taking 1-u explicitly, for quadrature abscissas near the endpoints.
double beta_density(double u, double one_minus_u, double alpha);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double inc_beta(double a, double b, double x);

// CDF of Beta(1-alpha, alpha).
double beta_cdf(double u, double alpha);

// E[-log xi] for xi ~ Beta(1-alpha, alpha): the digamma route.
double beta_log_moment(double alpha);

// The same moment by quadrature of the density; independent cross-check.
double beta_log_moment_quadrature(double alpha, double tol = 1e-10);

// E[xi^p] for xi ~ Beta(1-alpha, alpha).
double beta_moment(double alpha, int p);

// sum_j p_j^beta
double power_sum_stat(const RowProfile& row, double beta);

struct BetaLimitReport {
  double alpha = 0.0;
  int n = 0;
  long samples = 0;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, neg_log_mean = 0.0;
  double se1 = 0.0, se2 = 0.0, se3 = 0.0, se_log = 0.0;
  double target_m1 = 0.0, target_m2 = 0.0, target_m3 = 0.0, target_h = 0.0;
};

BetaLimitReport beta_limit_report(int n, double alpha, long samples, std::uint64_t seed);

// CSV: alpha,n,samples,m1,m2,m3,neg_log_mean,target_m1,target_m2,target_m3,target_h
void write_beta_csv(std::ostream& out, const BetaLimitReport& r,
                    const std::vector<std::string>& comment_lines);

// Kolmogorov-Smirnov distance of the sample against Beta(1-alpha, alpha).
double ks_distance_to_beta(std::vector<double> picks, double alpha);

// Draws `count` picks from per-pick substreams; deterministic and parallel.
std::vector<double> draw_picks(int n, double alpha, long count, std::uint64_t seed);

}  // namespace entmix
