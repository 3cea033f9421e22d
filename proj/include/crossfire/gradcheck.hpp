#pragma once

#include <cstdint>

#include "crossfire/encoders.hpp"

namespace crossfire {

struct GradCheckReport {
  double max_rel_error = 0.0;
  int cases = 0;
  int probes = 0;
};

/// Compares embed_vjp against central finite differences of <u, f(v)> along
/// random and coordinate directions, for `cases` seeded (v, u) pairs.
/// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckReport check_encoder_gradient(const Encoder& e, int cases, std::uint64_t seed,
                                       double h = 1e-4, int directions_per_case = 8);

}  // namespace crossfire
