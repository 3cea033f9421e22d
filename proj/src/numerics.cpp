#include "crossfire/numerics.hpp"

#include <cmath>
#include <numbers>

#include "crossfire/media.hpp"

namespace crossfire {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::TruncatedPixelData: return "TruncatedPixelData";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateNorm: return "DegenerateNorm";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::UnmappedLabel: return "UnmappedLabel";
    case ErrorCode::ModalityMismatch: return "ModalityMismatch";
    case ErrorCode::OddDimsForDownsample: return "OddDimsForDownsample";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

NormalizedVector NormalizedVector::from_unit(Vector values) {
  const double norm = values.norm();
  if (!(std::abs(norm - 1.0) <= kUnitTolerance)) {
    throw Error(ErrorCode::InvalidArgument,
                "expected a unit vector, got norm " + std::to_string(norm));
  }
  return NormalizedVector(std::move(values));
}

double inner(const NormalizedVector& a, const NormalizedVector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch, "inner product of dims " + std::to_string(a.size()) +
                                            " and " + std::to_string(b.size()));
  }
  return a.data().dot(b.data());
}

const Block8& dct8_matrix() {
  static const Block8 basis = [] {
    Block8 c;
    for (int u = 0; u < 8; ++u) {
      const double scale = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        c(u, x) = scale * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
    return c;
  }();
  return basis;
}

Block8 dct8_forward(const Block8& block) {
  const Block8& c = dct8_matrix();
  return c * block * c.transpose();
}

Block8 dct8_inverse(const Block8& coeffs) {
  const Block8& c = dct8_matrix();
  return c.transpose() * coeffs * c;
}

Index symmetric_index(Index i, Index n) {
  if (n == 1) return 0;
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Vector bilinear_sample(const MediaTensor& img, double x, double y, Boundary boundary) {
  const MediaShape& s = img.shape();
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double wx = x - fx0;
  const double wy = y - fy0;
  Vector out = Vector::Zero(s.channels);

  // Far outside the image every texel is zero-filled; avoid overflowing Index.
  if (boundary == Boundary::Zero &&
      (fx0 < -1.0 || fy0 < -1.0 || fx0 > static_cast<double>(s.width) ||
       fy0 > static_cast<double>(s.height))) {
    return out;
  }
  if (boundary == Boundary::Symmetric && !(std::isfinite(x) && std::isfinite(y))) {
    return out;
  }

  const Index x0 = static_cast<Index>(fx0);
  const Index y0 = static_cast<Index>(fy0);
  const Index xs[2] = {x0, x0 + 1};
  const Index ys[2] = {y0, y0 + 1};
  const double wxs[2] = {1.0 - wx, wx};
  const double wys[2] = {1.0 - wy, wy};

  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const double w = wys[j] * wxs[i];
      if (w == 0.0) continue;
      Index xi = xs[i];
      Index yj = ys[j];
      if (boundary == Boundary::Zero) {
        if (xi < 0 || yj < 0 || xi >= s.width || yj >= s.height) continue;
      } else {
        xi = symmetric_index(xi, s.width);
        yj = symmetric_index(yj, s.height);
      }
      for (Index c = 0; c < s.channels; ++c) out(c) += w * img.at(c, yj, xi);
    }
  }
  return out;
}

std::uint64_t Rng::next_u64() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  Rng rng(a ^ (b * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  return rng.next_u64();
}

}  // namespace crossfire
