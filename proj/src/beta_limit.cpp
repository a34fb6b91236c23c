#include "entmix/beta_limit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entmix/ensembles.hpp"
#include "entmix/numerics.hpp"

namespace entmix {

double size_biased_pick(int n, double alpha, Rng& rng) {
  if (n < 1) throw std::invalid_argument("size_biased_pick: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("size_biased_pick: alpha must lie in (0,1)");
  // selector drawn first, so a shared stream couples picks across row sizes
  const double sel = rng.uniform();
  std::vector<double> raw(static_cast<std::size_t>(n));
  pareto_raw_row(n, alpha, rng, raw.data());
  long double total = 0.0L;
  for (double w : raw) total += w;
  const double target = sel * static_cast<double>(total);
  long double acc = 0.0L;
  int pick = n - 1;
  for (int j = 0; j < n; ++j) {
    acc += raw[static_cast<std::size_t>(j)];
    if (static_cast<double>(acc) > target) {
      pick = j;
      break;
    }
  }
  return static_cast<double>(raw[static_cast<std::size_t>(pick)] / total);
}

double beta_density(double u, double one_minus_u, double alpha) {
  if (!(u > 0.0 && one_minus_u > 0.0))
    throw std::domain_error("beta_density: u must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("beta_density: alpha must lie in (0,1)");
  const double norm = std::sin(std::numbers::pi * alpha) / std::numbers::pi;
  return std::pow(one_minus_u, alpha - 1.0) * std::pow(u, -alpha) * norm;
}

double beta_density(double u, double alpha) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("beta_density: u must lie in (0,1)");
  return beta_density(u, 1.0 - u, alpha);
}

namespace {
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("inc_beta: continued fraction did not converge");
}
}  // namespace

double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double beta_cdf(double u, double alpha) { return inc_beta(1.0 - alpha, alpha, u); }

double beta_log_moment(double alpha) { return h_alpha(alpha); }

double beta_log_moment_quadrature(double alpha, double tol) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("beta_log_moment_quadrature: alpha must lie in (0,1)");
  auto f = [alpha](double x, double omx) { return -std::log(x) * beta_density(x, omx, alpha); };
  return tanh_sinh_01(f, tol);
}

double beta_moment(double alpha, int p) {
  double m = 1.0;
  for (int k = 0; k < p; ++k) m *= (1.0 - alpha + k) / (1.0 + k);
  return m;
}

double power_sum_stat(const RowProfile& row, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("power_sum_stat: beta must lie in (0,1]");
  long double s = 0.0L;
  for (double w : row.weights) s += std::pow(w, beta);
  return static_cast<double>(s);
}

std::vector<double> draw_picks(int n, double alpha, long count, std::uint64_t seed) {
  std::vector<double> picks(static_cast<std::size_t>(count));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long k = 0; k < count; ++k) {
    Rng rng = Rng::stream(seed, stream_tag::pick, static_cast<std::uint64_t>(k));
    picks[static_cast<std::size_t>(k)] = size_biased_pick(n, alpha, rng);
  }
  return picks;
}

BetaLimitReport beta_limit_report(int n, double alpha, long samples, std::uint64_t seed) {
  const auto picks = draw_picks(n, alpha, samples, seed);
  long double s1 = 0, s2 = 0, s3 = 0, slog = 0;
  long double q1 = 0, q2 = 0, q3 = 0, qlog = 0;
  for (double x : picks) {
    const long double x2 = static_cast<long double>(x) * x;
    const long double x3 = x2 * x;
    const long double lx = -std::log(x);
    s1 += x;
    s2 += x2;
    s3 += x3;
    slog += lx;
    q1 += x2;
    q2 += x2 * x2;
    q3 += x3 * x3;
    qlog += lx * lx;
  }
  const auto N = static_cast<long double>(samples);
  BetaLimitReport r;
  r.alpha = alpha;
  r.n = n;
  r.samples = samples;
  r.m1 = static_cast<double>(s1 / N);
  r.m2 = static_cast<double>(s2 / N);
  r.m3 = static_cast<double>(s3 / N);
  r.neg_log_mean = static_cast<double>(slog / N);
  auto se = [N](long double s, long double q) {
    const long double mean = s / N;
    const long double var = std::max<long double>(q / N - mean * mean, 0.0L);
    return static_cast<double>(std::sqrt(static_cast<double>(var / N)));
  };
  r.se1 = se(s1, q1);
  r.se2 = se(s2, q2);
  r.se3 = se(s3, q3);
  r.se_log = se(slog, qlog);
  r.target_m1 = beta_moment(alpha, 1);
  r.target_m2 = beta_moment(alpha, 2);
  r.target_m3 = beta_moment(alpha, 3);
  r.target_h = h_alpha(alpha);
  return r;
}

void write_beta_csv(std::ostream& out, const BetaLimitReport& r,
                    const std::vector<std::string>& comment_lines) {
  for (const auto& line : comment_lines) out << "# " << line << "\n";
  out << "alpha,n,samples,m1,m2,m3,neg_log_mean,target_m1,target_m2,target_m3,target_h\n";
  char buf[320];
  std::snprintf(buf, sizeof buf, "%.12g,%d,%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                r.alpha, r.n, r.samples, r.m1, r.m2, r.m3, r.neg_log_mean, r.target_m1, r.target_m2,
                r.target_m3, r.target_h);
  out << buf;
}

double ks_distance_to_beta(std::vector<double> picks, double alpha) {
  if (picks.empty()) throw std::invalid_argument("ks_distance_to_beta: empty sample");
  std::sort(picks.begin(), picks.end());
  const auto N = static_cast<double>(picks.size());
  double d = 0.0;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const double f = beta_cdf(picks[i], alpha);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / N));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / N - f));
  }
  return d;
}

}  // namespace entmix
