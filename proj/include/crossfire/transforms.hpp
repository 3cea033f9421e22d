#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crossfire/encoders.hpp"

namespace crossfire {

/// The attacker's target content: free text plus its central elements
/// (lowercase nouns such as "tiger", or "dog" and "ball").
struct TargetedInput {
  std::string text;
  std::vector<std::string> elements;

  /// Validates that elements are non-empty lowercase single tokens.
  static TargetedInput make(std::string text, std::vector<std::string> elements);

  /// Elements joined by a single space; used as the lookup key for file maps.
  std::string key() const;

  friend bool operator==(const TargetedInput&, const TargetedInput&) = default;
};

/// Renders label-seeded synthetic media. Images superimpose, per element,
/// 2-4 Gaussian blobs and one oriented stripe pattern; audio sums three
/// sinusoids per element.
struct ProceduralProvider {
  std::uint64_t seed = 7;
};

/// Supplies externally produced media per label key. A multi-element target
/// uses its joined key if mapped, otherwise the average of its elements' files.
struct FileBasedProvider {
  std::map<std::string, std::filesystem::path> files;
};

using TransformProvider = std::variant<ProceduralProvider, FileBasedProvider>;

/// Converts the target into the media modality of `shape`.
/// Throws UnmappedLabel, ModalityMismatch or ShapeMismatch.
MediaTensor transform_target(const TransformProvider& provider, const TargetedInput& target,
                             const MediaShape& shape);

/// Normalized embedding of every label's transformed fixture.
std::vector<NormalizedVector> label_prototypes(const TransformProvider& provider,
                                               std::span<const TargetedInput> labels,
                                               const Encoder& encoder);

/// The ten single-noun labels ("A tiger", "A elephant", ...).
std::vector<TargetedInput> single_element_labels();
/// The ten two-element "A dog is ..." labels.
std::vector<TargetedInput> multi_element_labels();

/// Index of the label whose element set equals the target's.
std::optional<std::size_t> find_label(std::span<const TargetedInput> labels,
                                      const TargetedInput& target);

}  // namespace crossfire
