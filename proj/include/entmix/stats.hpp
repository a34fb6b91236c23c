#pragma once

#include <iosfwd>

#include "entmix/env_model.hpp"

namespace entmix {

// H = -(1/n) sum_{i,j} p_{i,j} log p_{i,j}, nats.
double avg_row_entropy(const Profiles& profiles);

// t_ent = log n / H; throws std::domain_error when H = 0.
double entropic_time(const Profiles& profiles);

// max_i sum_j p_{i,j} (log p_{i,j})^2
double sparsity_stat(const Profiles& profiles);

// (1/n) sum_{i,j} 1{p_{i,j} > 1 - eps}
double nondegeneracy_stat(const Profiles& profiles, double eps);

struct EntropyReport {
  int n = 0;
  double avg_entropy = 0.0;
  double t_ent = 0.0;
  double sparsity = 0.0;
  double nondeg_at_01 = 0.0;
  double nondeg_at_001 = 0.0;
};

EntropyReport entropy_report(const Profiles& profiles);

// One CSV row: n,H,t_ent,sparsity_stat,nondeg@0.1,nondeg@0.01
void write_entropy_csv(std::ostream& out, const EntropyReport& r, bool header = true);

}  // namespace entmix
