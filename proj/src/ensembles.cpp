#include "entmix/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entmix/numerics.hpp"

namespace entmix {

void EnsembleSpec::validate() const {
  if (n < 1) throw std::invalid_argument("ensemble: n must be >= 1");
  switch (kind) {
    case Kind::out_degrees:
      if (out_degrees.empty()) throw std::invalid_argument("ensemble: out_degrees missing");
      if (out_degrees.size() != 1 && static_cast<int>(out_degrees.size()) != n)
        throw std::invalid_argument("ensemble: out_degrees must have length 1 or n");
      for (int d : out_degrees) {
        if (d < 1) throw std::invalid_argument("ensemble: out-degrees must be >= 1");
        if (d > n) throw std::invalid_argument("ensemble: out-degree exceeds n");
      }
      break;
    case Kind::pareto:
      if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ensemble: alpha must lie in (0,1)");
      break;
    case Kind::profile_file:
      if (profile_path.empty()) throw std::invalid_argument("ensemble: profile_path missing");
      break;
  }
}

Profiles out_degree_profiles(const EnsembleSpec& spec) {
  if (spec.kind != EnsembleSpec::Kind::out_degrees)
    throw std::invalid_argument("out_degree_profiles: wrong ensemble kind");
  spec.validate();
  Profiles out;
  out.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const int d = spec.out_degrees.size() == 1 ? spec.out_degrees[0] : spec.out_degrees[i];
    RowProfile p;
    p.row_id = i;
    p.n = spec.n;
    p.weights.assign(static_cast<std::size_t>(d), 1.0 / d);
    out.push_back(std::move(p));
  }
  return out;
}

void pareto_raw_row(int n, double alpha, Rng& rng, double* out) {
  const double inv_alpha = -1.0 / alpha;
  for (int j = 0; j < n; ++j) {
    const double u = 1.0 - rng.uniform();  // in (0, 1]
    out[j] = std::pow(u, inv_alpha);
  }
}

RowProfile pareto_row(int n, double alpha, Rng& rng) {
  if (n < 1) throw std::invalid_argument("pareto_row: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("pareto_row: alpha must lie in (0,1)");
  RowProfile p;
  p.n = n;
  p.weights.resize(static_cast<std::size_t>(n));
  pareto_raw_row(n, alpha, rng, p.weights.data());
  long double total = 0.0L;
  for (double w : p.weights) total += w;
  for (double& w : p.weights) w = static_cast<double>(w / total);
  std::sort(p.weights.begin(), p.weights.end(), std::greater<double>());
  return p;
}

Profiles make_profiles(const EnsembleSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleSpec::Kind::out_degrees:
      return out_degree_profiles(spec);
    case EnsembleSpec::Kind::pareto: {
      Profiles out;
      out.reserve(spec.n);
      for (int i = 0; i < spec.n; ++i) {
        Rng rng = pareto_row_stream(spec.seed, i);
        RowProfile p = pareto_row(spec.n, spec.alpha, rng);
        p.row_id = i;
        out.push_back(std::move(p));
      }
      return out;
    }
    case EnsembleSpec::Kind::profile_file:
      return load_profiles(spec.profile_path);
  }
  throw std::logic_error("make_profiles: unreachable");
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k})
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  static const double coef[] = {
      1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0,     -1.0 / 240.0,
      1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
  };
  double power = inv2;
  for (double c : coef) {
    series += c * power;
    power *= inv2;
  }
  return acc + std::log(x) - 0.5 / x - series;
}

double h_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("h_alpha: alpha must lie in (0,1)");
  return digamma(1.0) - digamma(1.0 - alpha);
}

double h_alpha_integral(double alpha, double tol) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("h_alpha_integral: alpha must lie in (0,1)");
  if (!(tol > 0.0)) throw std::domain_error("h_alpha_integral: tol must be positive");
  auto f = [alpha](double t) {
    if (t < 1e-12) return alpha;  // limit value at 0
    return std::expm1(alpha * t) / std::expm1(t);
  };
  // Tail beyond T decays like e^{-(1-alpha)t}; cut where it is below tol/2.
  const double T = std::max(40.0, std::log(2.0 / ((1.0 - alpha) * tol)) / (1.0 - alpha) + 5.0);
  return adaptive_simpson(f, 0.0, T, 0.5 * tol);
}

}  // namespace entmix
