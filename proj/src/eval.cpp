#include "crossfire/eval.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <tuple>

#include <json.hpp>

namespace crossfire {

namespace {

template <typename T>
void push_unique(std::vector<T>& seen, const T& value) {
  if (std::find(seen.begin(), seen.end(), value) == seen.end()) seen.push_back(value);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double alignment(const Encoder& e, const MediaTensor& t_v, const MediaTensor& v_adv) {
  return inner(l2_normalize(embed(e, t_v)), l2_normalize(embed(e, v_adv)));
}

std::size_t zero_shot_classify(const Encoder& e, const MediaTensor& media,
                               std::span<const NormalizedVector> prototypes) {
  if (prototypes.empty()) throw Error(ErrorCode::InvalidArgument, "no label prototypes");
  const NormalizedVector z = l2_normalize(embed(e, media));
  std::size_t best = 0;
  double best_score = inner(z, prototypes[0]);
  for (std::size_t k = 1; k < prototypes.size(); ++k) {
    const double score = inner(z, prototypes[k]);
    if (score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

double asr(std::span<const SampleResult> results, std::size_t target_index) {
  if (results.empty()) throw Error(ErrorCode::EmptyResults, "asr over no results");
  const auto hits = std::count_if(results.begin(), results.end(), [&](const SampleResult& r) {
    return r.predicted_label == target_index;
  });
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

SweepReport build_sweep_report(std::span<const SampleResult> results) {
  if (results.empty()) throw Error(ErrorCode::EmptyResults, "no results to report");

  std::vector<std::string> datasets;
  std::vector<std::string> defenses;
  std::vector<Variant> variants;
  std::vector<double> alphas;
  using Key = std::tuple<std::string, std::string, int, double>;
  struct Acc {
    std::size_t hits = 0;
    double alignment_sum = 0.0;
    std::size_t n = 0;
  };
  std::map<Key, Acc> cells;

  for (const auto& r : results) {
    push_unique(datasets, r.dataset);
    push_unique(defenses, r.defense);
    push_unique(variants, r.variant);
    push_unique(alphas, r.alpha);
    Acc& acc = cells[Key{r.dataset, r.defense, static_cast<int>(r.variant), r.alpha}];
    acc.hits += r.asr_hit ? 1 : 0;
    acc.alignment_sum += r.alignment_after;
    ++acc.n;
  }
  std::sort(variants.begin(), variants.end());
  std::sort(alphas.begin(), alphas.end());

  SweepReport report;
  for (const auto& dataset : datasets) {
    for (const auto& defense : defenses) {
      for (Variant variant : variants) {
        for (double alpha : alphas) {
          const auto it = cells.find(Key{dataset, defense, static_cast<int>(variant), alpha});
          if (it == cells.end()) {
            throw Error(ErrorCode::IncompleteGrid,
                        "missing cell dataset=" + dataset + " defense=" + defense +
                            " variant=" + std::string(to_string(variant)) +
                            " alpha=" + format_number(alpha));
          }
          const Acc& acc = it->second;
          const auto n = static_cast<double>(acc.n);
          report.rows.push_back(ReportRow{dataset, variant, alpha, defense,
                                          static_cast<double>(acc.hits) / n,
                                          acc.alignment_sum / n, acc.n});
        }
      }
    }
  }
  return report;
}

std::string SweepReport::to_csv() const {
  std::string out = "dataset,variant,alpha,defense,asr_embed,mean_alignment,n\n";
  for (const auto& r : rows) {
    out += r.dataset + "," + std::string(to_string(r.variant)) + "," + format_number(r.alpha) +
           "," + r.defense + "," + format_number(r.asr_embed) + "," +
           format_number(r.mean_alignment) + "," + std::to_string(r.n) + "\n";
  }
  return out;
}

std::string SweepReport::to_json() const {
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"dataset", r.dataset},
                         {"variant", std::string(to_string(r.variant))},
                         {"alpha", r.alpha},
                         {"defense", r.defense},
                         {"asr_embed", r.asr_embed},
                         {"mean_alignment", r.mean_alignment},
                         {"n", r.n}});
  }
  return rows_json.dump(2) + "\n";
}

const ReportRow* SweepReport::find(std::string_view dataset, Variant variant, double alpha,
                                   std::string_view defense) const {
  for (const auto& r : rows) {
    if (r.dataset == dataset && r.variant == variant && r.alpha == alpha && r.defense == defense) {
      return &r;
    }
  }
  return nullptr;
}

}  // namespace crossfire
