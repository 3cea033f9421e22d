#include "crossfire/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

namespace crossfire {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unnormalized sub-pattern for one element, accumulated into `out`.
void add_image_pattern(const std::string& element, std::uint64_t seed, const MediaShape& shape,
                       Vector& out) {
  Rng rng(mix_seed(seed, fnv1a(element)));
  const double h = static_cast<double>(shape.height);
  const double w = static_cast<double>(shape.width);
  const double extent = std::min(h, w);

  const int blobs = 2 + static_cast<int>(rng.next_u64() % 3);
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double sigma = rng.uniform(0.08, 0.25) * extent;
    Vector amp(shape.channels);
    for (Index c = 0; c < shape.channels; ++c) amp(c) = rng.uniform(-1.0, 1.0);
    for (Index y = 0; y < shape.height; ++y) {
      for (Index x = 0; x < shape.width; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        for (Index c = 0; c < shape.channels; ++c) {
          out((c * shape.height + y) * shape.width + x) += amp(c) * g;
        }
      }
    }
  }

  const double theta = rng.uniform(0.0, std::numbers::pi);
  const double cycles = rng.uniform(1.5, 5.0);
  const double phase = rng.uniform(0.0, kTwoPi);
  Vector amp(shape.channels);
  for (Index c = 0; c < shape.channels; ++c) amp(c) = rng.uniform(-0.6, 0.6);
  for (Index y = 0; y < shape.height; ++y) {
    for (Index x = 0; x < shape.width; ++x) {
      const double u = (static_cast<double>(x) * std::cos(theta) +
                        static_cast<double>(y) * std::sin(theta)) / extent;
      const double s = std::sin(kTwoPi * cycles * u + phase);
      for (Index c = 0; c < shape.channels; ++c) {
        out((c * shape.height + y) * shape.width + x) += amp(c) * s;
      }
    }
  }
}

void add_audio_pattern(const std::string& element, std::uint64_t seed, const MediaShape& shape,
                       Vector& out) {
  Rng rng(mix_seed(seed, fnv1a(element)));
  const std::uint64_t label_hash = fnv1a(element);
  for (int k = 0; k < 3; ++k) {
    // Frequencies in Hz at the default 16 kHz rate, derived from the label hash.
    const double freq = 60.0 + static_cast<double>((label_hash >> (16 * k)) % 1940);
    const double amp = rng.uniform(0.3, 1.0);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double step = kTwoPi * freq / static_cast<double>(MediaTensor::kDefaultSampleRate);
    for (Index i = 0; i < shape.width; ++i) {
      out(i) += amp * std::sin(step * static_cast<double>(i) + phase);
    }
  }
}

MediaTensor procedural(const ProceduralProvider& p, const TargetedInput& target,
                       const MediaShape& shape) {
  Vector raw = Vector::Zero(shape.size());
  for (const auto& element : target.elements) {
    if (shape.kind == MediaKind::Image) {
      add_image_pattern(element, p.seed, shape, raw);
    } else {
      add_audio_pattern(element, p.seed, shape, raw);
    }
  }

  if (shape.kind == MediaKind::Image) {
    const double lo = raw.minCoeff();
    const double hi = raw.maxCoeff();
    if (hi - lo > 0.0) {
      raw = (raw.array() - lo) / (hi - lo);
    } else {
      raw.setConstant(0.5);
    }
  } else {
    const double peak = raw.cwiseAbs().maxCoeff();
    if (peak > 0.0) raw /= peak;
  }
  return clamp_to_range(shape, std::move(raw));
}

MediaTensor load_checked(const std::filesystem::path& path, const MediaShape& shape) {
  MediaTensor t = load_media(MediaPath::probe(path));
  if (t.kind() != shape.kind) {
    throw Error(ErrorCode::ModalityMismatch, path.string() + " has the wrong modality");
  }
  if (t.shape() != shape) {
    throw Error(ErrorCode::ShapeMismatch, path.string() + " is " + to_string(t.shape()) +
                                              ", expected " + to_string(shape));
  }
  return t;
}

MediaTensor file_based(const FileBasedProvider& p, const TargetedInput& target,
                       const MediaShape& shape) {
  if (const auto it = p.files.find(target.key()); it != p.files.end()) {
    return load_checked(it->second, shape);
  }
  Vector sum = Vector::Zero(shape.size());
  for (const auto& element : target.elements) {
    const auto it = p.files.find(element);
    if (it == p.files.end()) {
      throw Error(ErrorCode::UnmappedLabel, "no file mapped for '" + element + "'");
    }
    sum += load_checked(it->second, shape).data();
  }
  return clamp_to_range(shape, sum / static_cast<double>(target.elements.size()));
}

}  // namespace

TargetedInput TargetedInput::make(std::string text, std::vector<std::string> elements) {
  if (elements.empty()) throw Error(ErrorCode::InvalidArgument, "target needs at least one element");
  for (const auto& e : elements) {
    const bool ok = !e.empty() && std::none_of(e.begin(), e.end(), [](unsigned char c) {
      return std::isspace(c) || std::isupper(c);
    });
    if (!ok) throw Error(ErrorCode::InvalidArgument, "element '" + e + "' is not a lowercase token");
  }
  return TargetedInput{std::move(text), std::move(elements)};
}

std::string TargetedInput::key() const {
  std::string k;
  for (const auto& e : elements) {
    if (!k.empty()) k.push_back(' ');
    k += e;
  }
  return k;
}

MediaTensor transform_target(const TransformProvider& provider, const TargetedInput& target,
                             const MediaShape& shape) {
  if (target.elements.empty()) throw Error(ErrorCode::InvalidArgument, "target has no elements");
  if (const auto* p = std::get_if<ProceduralProvider>(&provider)) {
    return procedural(*p, target, shape);
  }
  return file_based(std::get<FileBasedProvider>(provider), target, shape);
}

std::vector<NormalizedVector> label_prototypes(const TransformProvider& provider,
                                               std::span<const TargetedInput> labels,
                                               const Encoder& encoder) {
  std::set<std::string> seen;
  std::vector<NormalizedVector> prototypes;
  prototypes.reserve(labels.size());
  for (const auto& label : labels) {
    if (!seen.insert(label.text).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate label '" + label.text + "'");
    }
    const MediaTensor fixture = transform_target(provider, label, encoder.in_shape());
    prototypes.push_back(l2_normalize(embed(encoder, fixture)));
  }
  return prototypes;
}

std::vector<TargetedInput> single_element_labels() {
  return {
      {"A tiger", {"tiger"}},       {"A elephant", {"elephant"}}, {"A wolf", {"wolf"}},
      {"A zebra", {"zebra"}},       {"An eagle", {"eagle"}},      {"A giraffe", {"giraffe"}},
      {"A kangaroo", {"kangaroo"}}, {"A dog", {"dog"}},           {"A horse", {"horse"}},
      {"A groundhog", {"groundhog"}},
  };
}

std::vector<TargetedInput> multi_element_labels() {
  return {
      {"A dog is standing", {"dog", "standing"}},
      {"A dog is playing ball", {"dog", "ball"}},
      {"A dog is creeping", {"dog", "creeping"}},
      {"A dog is playing frisbee", {"dog", "frisbee"}},
      {"A dog is eating food", {"dog", "food"}},
      {"A dog is sleeping", {"dog", "sleeping"}},
      {"A dog is playing with cats", {"dog", "cats"}},
      {"A dog is chasing birds", {"dog", "birds"}},
      {"A dog is running", {"dog", "running"}},
      {"A dog is barking", {"dog", "barking"}},
  };
}

std::optional<std::size_t> find_label(std::span<const TargetedInput> labels,
                                      const TargetedInput& target) {
  const std::set<std::string> wanted(target.elements.begin(), target.elements.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::set<std::string> have(labels[i].elements.begin(), labels[i].elements.end());
    if (have == wanted) return i;
  }
  return std::nullopt;
}

}  // namespace crossfire
