#pragma once

#include "entmix/dynamics.hpp"

// Plain single-threaded reference implementations of the parallel kernels.
// Kept for testing and for the kernel benchmark; no chunking, no OpenMP.
namespace entmix::serial {

DistVector propagate(const RowSource& src, DistVector mu, long steps);

void propagate_batch(const RowSource& src, std::vector<DistVector>& states, long steps,
                     const BatchHook& hook = {});

CutoffProfile distance_profile(const RowSource& src, const std::vector<int>& starts,
                               const std::vector<long>& t_grid, const DistVector& reference,
                               double t_ent);

}  // namespace entmix::serial
