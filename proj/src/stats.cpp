#include "entmix/stats.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace entmix {

double avg_row_entropy(const Profiles& profiles) {
  validate_profiles(profiles);
  long double h = 0.0L;
  for (const auto& p : profiles) h += p.entropy();
  return static_cast<double>(h / static_cast<long double>(profiles.size()));
}

double entropic_time(const Profiles& profiles) {
  const double h = avg_row_entropy(profiles);
  if (!(h > 0.0)) throw std::domain_error("entropic_time: degenerate profiles (H = 0)");
  return std::log(static_cast<double>(profiles.front().n)) / h;
}

double sparsity_stat(const Profiles& profiles) {
  validate_profiles(profiles);
  double worst = 0.0;
  for (const auto& p : profiles) worst = std::max(worst, p.log_sq_moment());
  return worst;
}

double nondegeneracy_stat(const Profiles& profiles, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("nondegeneracy_stat: eps must lie in (0,1)");
  validate_profiles(profiles);
  const double cutoff = 1.0 - eps;
  long count = 0;
  for (const auto& p : profiles)
    for (double w : p.weights)
      if (w > cutoff) ++count;
  return static_cast<double>(count) / static_cast<double>(profiles.size());
}

EntropyReport entropy_report(const Profiles& profiles) {
  EntropyReport r;
  r.n = profiles.front().n;
  r.avg_entropy = avg_row_entropy(profiles);
  r.t_ent = entropic_time(profiles);
  r.sparsity = sparsity_stat(profiles);
  r.nondeg_at_01 = nondegeneracy_stat(profiles, 0.1);
  r.nondeg_at_001 = nondegeneracy_stat(profiles, 0.01);
  return r;
}

void write_entropy_csv(std::ostream& out, const EntropyReport& r, bool header) {
  if (header) out << "n,H,t_ent,sparsity_stat,nondeg@0.1,nondeg@0.01\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.n, r.avg_entropy, r.t_ent,
                r.sparsity, r.nondeg_at_01, r.nondeg_at_001);
  out << buf;
}

}  // namespace entmix
