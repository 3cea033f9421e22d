#include "crossfire/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace crossfire {

GradCheckReport check_encoder_gradient(const Encoder& e, int cases, std::uint64_t seed, double h,
                                       int directions_per_case) {
  const MediaShape& shape = e.in_shape();
  const Index n = shape.size();
  Rng rng(seed);
  GradCheckReport report;
  for (int c = 0; c < cases; ++c) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.uniform(shape.lower(), shape.upper());
    Vector u(e.out_dim());
    for (Index i = 0; i < u.size(); ++i) u(i) = rng.gaussian();
    const Vector analytic = e.vjp(v, u);

    for (int d = 0; d < directions_per_case; ++d) {
      Vector dir = Vector::Zero(n);
      if (d % 2 == 0) {
        for (Index i = 0; i < n; ++i) dir(i) = rng.gaussian();
        dir /= dir.norm();
      } else {
        dir(static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n))) = 1.0;
      }
      const double plus = u.dot(e.forward(v + h * dir));
      const double minus = u.dot(e.forward(v - h * dir));
      const double numeric = (plus - minus) / (2.0 * h);
      const double exact = analytic.dot(dir);
      const double scale = std::max({std::abs(exact), std::abs(numeric), 1e-6});
      report.max_rel_error = std::max(report.max_rel_error, std::abs(exact - numeric) / scale);
      ++report.probes;
    }
    ++report.cases;
  }
  return report;
}

}  // namespace crossfire
