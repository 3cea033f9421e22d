#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crossfire/attack.hpp"

namespace crossfire {

/// <normalize(f(t_v)), normalize(f(v_adv))>.
double alignment(const Encoder& e, const MediaTensor& t_v, const MediaTensor& v_adv);

/// Index of the prototype with the largest cosine similarity to the media's
/// embedding; ties go to the lowest index.
std::size_t zero_shot_classify(const Encoder& e, const MediaTensor& media,
                               std::span<const NormalizedVector> prototypes);

/// One evaluated (sample, variant, alpha, defense) cell.
struct SampleResult {
  std::string dataset;
  std::string sample_id;
  Variant variant = Variant::CrossFire;
  double alpha = 0.0;
  std::string defense = "none";          // the configured pipeline
  std::string defense_applied = "none";  // with drawn parameters resolved
  double alignment_before = 0.0;
  double alignment_after = 0.0;
  std::size_t predicted_label = 0;
  bool asr_hit = false;
  int iterations = 0;
};

/// Fraction of results whose predicted label is `target_index`. Throws EmptyResults.
double asr(std::span<const SampleResult> results, std::size_t target_index);

struct ReportRow {
  std::string dataset;
  Variant variant = Variant::CrossFire;
  double alpha = 0.0;
  std::string defense;
  double asr_embed = 0.0;
  double mean_alignment = 0.0;
  std::size_t n = 0;
};

/// Corpus-level table, one row per (dataset, defense, variant, alpha).
struct SweepReport {
  std::vector<ReportRow> rows;

  /// Header: dataset,variant,alpha,defense,asr_embed,mean_alignment,n
  std::string to_csv() const;
  /// Array of objects with the CSV column names as keys.
  std::string to_json() const;

  const ReportRow* find(std::string_view dataset, Variant variant, double alpha,
                        std::string_view defense) const;
};

/// Aggregates results. Every combination of the datasets, defenses, variants
/// and alphas that appear must be populated, otherwise IncompleteGrid.
/// Rows follow first-appearance order of dataset and defense, then variant,
/// then ascending alpha.
SweepReport build_sweep_report(std::span<const SampleResult> results);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

}  // namespace crossfire
