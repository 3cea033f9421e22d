#include "crossfire/defenses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace crossfire {

namespace {

constexpr int kLuminanceTable[8][8] = {
    {16, 11, 10, 16, 24, 40, 51, 61},     {12, 12, 14, 19, 26, 58, 60, 55},
    {14, 13, 16, 24, 40, 57, 69, 56},     {14, 17, 22, 29, 51, 87, 80, 62},
    {18, 22, 37, 56, 68, 109, 103, 77},   {24, 35, 55, 64, 81, 104, 113, 92},
    {49, 64, 78, 87, 103, 121, 120, 101}, {72, 92, 95, 98, 112, 100, 103, 99},
};

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void require_image(const MediaTensor& t, std::string_view op) {
  if (t.kind() != MediaKind::Image) {
    throw Error(ErrorCode::ModalityMismatch, std::string(op) + " applies to images only");
  }
}

double parse_double(std::string_view field, std::string_view whole) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "bad number '" + std::string(field) + "' in defense '" + std::string(whole) + "'");
  }
  return value;
}

long long parse_integer(std::string_view field, std::string_view whole) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "bad integer '" + std::string(field) + "' in defense '" + std::string(whole) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

DefenseStep parse_step(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string_view name = parts.front();
  if (name == "upsample_x2" && parts.size() == 1) return UpsampleX2{};
  if (name == "downsample_x2" && parts.size() == 1) return DownsampleX2{};
  if (name == "rotate" && parts.size() == 2) return Rotate{parse_double(parts[1], text)};
  if (name == "rotate" && parts.size() == 3 && parts[1] == "uniform") {
    const long long seed = parse_integer(parts[2], text);
    if (seed < 0) throw Error(ErrorCode::InvalidArgument, "rotation seed must be non-negative");
    return Rotate{DrawUniform{static_cast<std::uint64_t>(seed)}};
  }
  if (name == "jpeg" && parts.size() == 2) {
    return JpegLike{static_cast<int>(parse_integer(parts[1], text))};
  }
  if (name == "denoise" && parts.size() == 2) {
    return SmoothDenoise{static_cast<int>(parse_integer(parts[1], text))};
  }
  throw Error(ErrorCode::InvalidArgument, "unrecognized defense '" + std::string(text) + "'");
}

std::string step_to_string(const DefenseStep& step) {
  struct Visitor {
    std::string operator()(const UpsampleX2&) const { return "upsample_x2"; }
    std::string operator()(const DownsampleX2&) const { return "downsample_x2"; }
    std::string operator()(const Rotate& r) const {
      if (const auto* d = std::get_if<DrawUniform>(&r.angle_deg)) {
        return "rotate:uniform:" + std::to_string(d->seed);
      }
      return "rotate:" + format_double(std::get<double>(r.angle_deg));
    }
    std::string operator()(const JpegLike& j) const { return "jpeg:" + std::to_string(j.quality); }
    std::string operator()(const SmoothDenoise& s) const {
      return "denoise:" + std::to_string(s.window);
    }
  };
  return std::visit(Visitor{}, step);
}

// Exact cosine/sine at multiples of 90 degrees so right-angle rotations are
// pure pixel permutations.
std::pair<double, double> cos_sin_degrees(double angle_deg) {
  const double quarter = angle_deg / 90.0;
  if (quarter == std::floor(quarter) && std::abs(quarter) < 1e9) {
    const auto k = ((static_cast<long long>(quarter) % 4) + 4) % 4;
    constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
    return {kCos[k], kSin[k]};
  }
  const double rad = angle_deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

}  // namespace

void DefenseSpec::validate() const {
  for (const auto& step : steps) {
    if (const auto* j = std::get_if<JpegLike>(&step)) {
      if (j->quality < 1 || j->quality > 100) {
        throw Error(ErrorCode::InvalidArgument, "jpeg quality must be in [1, 100]");
      }
    } else if (const auto* s = std::get_if<SmoothDenoise>(&step)) {
      if (s->window < 3 || s->window % 2 == 0) {
        throw Error(ErrorCode::InvalidArgument, "denoise window must be odd and >= 3");
      }
    } else if (const auto* r = std::get_if<Rotate>(&step)) {
      if (const auto* a = std::get_if<double>(&r->angle_deg); a && !(*a >= -180.0 && *a <= 180.0)) {
        throw Error(ErrorCode::InvalidArgument, "rotation angle must be in [-180, 180]");
      }
    }
  }
}

DefenseSpec parse_defense_spec(std::string_view text) {
  DefenseSpec spec;
  if (text == "none") return spec;
  for (std::string_view part : split(text, '+')) spec.steps.push_back(parse_step(part));
  spec.validate();
  return spec;
}

std::string to_string(const DefenseSpec& spec) {
  if (spec.steps.empty()) return "none";
  std::string out;
  for (const auto& step : spec.steps) {
    if (!out.empty()) out.push_back('+');
    out += step_to_string(step);
  }
  return out;
}

MediaTensor resize_to(const MediaTensor& img, Index height, Index width) {
  require_image(img, "resize");
  if (height < 1 || width < 1) throw Error(ErrorCode::InvalidArgument, "resize to an empty image");
  const MediaShape& s = img.shape();
  const double sy = static_cast<double>(s.height) / static_cast<double>(height);
  const double sx = static_cast<double>(s.width) / static_cast<double>(width);
  const MediaShape out_shape = MediaShape::image(s.channels, height, width);
  Vector out(out_shape.size());
  for (Index y = 0; y < height; ++y) {
    const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
    for (Index x = 0; x < width; ++x) {
      const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
      const Vector px = bilinear_sample(img, src_x, src_y, Boundary::Symmetric);
      for (Index c = 0; c < s.channels; ++c) out((c * height + y) * width + x) = px(c);
    }
  }
  return clamp_to_range(out_shape, std::move(out));
}

MediaTensor resize(const MediaTensor& img, double factor) {
  require_image(img, "resize");
  const MediaShape& s = img.shape();
  if (factor == 0.5 && (s.height % 2 != 0 || s.width % 2 != 0)) {
    throw Error(ErrorCode::OddDimsForDownsample, "cannot halve " + to_string(s));
  }
  if (!(factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "resize factor must be positive");
  const auto h = static_cast<Index>(std::lround(static_cast<double>(s.height) * factor));
  const auto w = static_cast<Index>(std::lround(static_cast<double>(s.width) * factor));
  return resize_to(img, h, w);
}

MediaTensor rotate(const MediaTensor& img, double angle_deg) {
  require_image(img, "rotate");
  const MediaShape& s = img.shape();
  const auto [c, sn] = cos_sin_degrees(angle_deg);
  const double cx = (static_cast<double>(s.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(s.height) - 1.0) / 2.0;
  Vector out(s.size());
  for (Index y = 0; y < s.height; ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (Index x = 0; x < s.width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      // Inverse map: turn the destination offset clockwise to find its source.
      const double src_x = cx + c * dx - sn * dy;
      const double src_y = cy + sn * dx + c * dy;
      const Vector px = bilinear_sample(img, src_x, src_y, Boundary::Zero);
      for (Index ch = 0; ch < s.channels; ++ch) out((ch * s.height + y) * s.width + x) = px(ch);
    }
  }
  return clamp_to_range(s, std::move(out));
}

double jpeg_quant_step(int u, int v, int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(ErrorCode::InvalidArgument, "jpeg quality must be in [1, 100]");
  }
  const double scale = quality < 50 ? 50.0 / quality : 2.0 - quality / 50.0;
  const double entry = std::clamp(std::floor(kLuminanceTable[u][v] * scale + 0.5), 1.0, 255.0);
  return entry / 255.0;
}

MediaTensor jpeg_like(const MediaTensor& img, int quality) {
  require_image(img, "jpeg_like");
  Block8 steps;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) steps(u, v) = jpeg_quant_step(u, v, quality);
  }

  const MediaShape& s = img.shape();
  const Index ph = (s.height + 7) / 8 * 8;
  const Index pw = (s.width + 7) / 8 * 8;
  Vector out(s.size());
  for (Index ch = 0; ch < s.channels; ++ch) {
    for (Index by = 0; by < ph; by += 8) {
      for (Index bx = 0; bx < pw; bx += 8) {
        Block8 block;
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            block(y, x) = img.at(ch, symmetric_index(by + y, s.height),
                                 symmetric_index(bx + x, s.width)) - 0.5;
          }
        }
        Block8 coeffs = dct8_forward(block);
        for (int u = 0; u < 8; ++u) {
          for (int v = 0; v < 8; ++v) coeffs(u, v) = std::round(coeffs(u, v) / steps(u, v)) * steps(u, v);
        }
        const Block8 restored = dct8_inverse(coeffs);
        for (int y = 0; y < 8 && by + y < s.height; ++y) {
          for (int x = 0; x < 8 && bx + x < s.width; ++x) {
            out((ch * s.height + by + y) * s.width + bx + x) = restored(y, x) + 0.5;
          }
        }
      }
    }
  }
  return clamp_to_range(s, std::move(out));
}

MediaTensor smooth_denoise(const MediaTensor& media, int window) {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "denoise window must be odd and >= 3");
  }
  const MediaShape& s = media.shape();
  const Index r = window / 2;
  Vector out(s.size());
  if (s.kind == MediaKind::Audio) {
    const double count = window;
    for (Index i = 0; i < s.width; ++i) {
      double sum = 0.0;
      for (Index k = -r; k <= r; ++k) sum += media[symmetric_index(i + k, s.width)];
      out(i) = sum / count;
    }
  } else {
    const double count = static_cast<double>(window) * window;
    for (Index ch = 0; ch < s.channels; ++ch) {
      for (Index y = 0; y < s.height; ++y) {
        for (Index x = 0; x < s.width; ++x) {
          double sum = 0.0;
          for (Index dy = -r; dy <= r; ++dy) {
            for (Index dx = -r; dx <= r; ++dx) {
              sum += media.at(ch, symmetric_index(y + dy, s.height), symmetric_index(x + dx, s.width));
            }
          }
          out((ch * s.height + y) * s.width + x) = sum / count;
        }
      }
    }
  }
  return clamp_to_range(s, std::move(out), media.sample_rate());
}

DefenseOutcome apply_defense(const MediaTensor& media, const DefenseSpec& spec,
                             std::uint64_t sample_seed) {
  spec.validate();
  MediaTensor current = media;
  std::string applied;
  for (const auto& step : spec.steps) {
    std::string label = step_to_string(step);
    if (std::holds_alternative<UpsampleX2>(step)) {
      current = resize(current, 2.0);
    } else if (std::holds_alternative<DownsampleX2>(step)) {
      current = resize(current, 0.5);
    } else if (const auto* r = std::get_if<Rotate>(&step)) {
      double angle = 0.0;
      if (const auto* d = std::get_if<DrawUniform>(&r->angle_deg)) {
        Rng rng(mix_seed(d->seed, sample_seed));
        angle = rng.uniform(-180.0, 180.0);
      } else {
        angle = std::get<double>(r->angle_deg);
      }
      current = rotate(current, angle);
      label = "rotate:" + format_double(angle);
    } else if (const auto* j = std::get_if<JpegLike>(&step)) {
      current = jpeg_like(current, j->quality);
    } else if (const auto* sd = std::get_if<SmoothDenoise>(&step)) {
      current = smooth_denoise(current, sd->window);
    }
    if (!applied.empty()) applied.push_back('+');
    applied += label;
  }
  return DefenseOutcome{std::move(current), applied.empty() ? "none" : applied};
}

}  // namespace crossfire
