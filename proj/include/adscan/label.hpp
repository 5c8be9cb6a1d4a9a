#ifndef ADSCAN_LABEL_HPP
#define ADSCAN_LABEL_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "adscan/ingest.hpp"
#include "adscan/types.hpp"

namespace adscan {
namespace label {

struct ConfusionMatrix {
  // counts[truth][prediction], indexed by AdCategory.
  std::array<std::array<std::int64_t, kCategoryCount>, kCategoryCount> counts{};

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
      for (auto v : row) t += v;
    return t;
  }
};

// Lowercases, maps punctuation to spaces, collapses whitespace; returns the
// token sequence.
std::vector<std::string> normalize_tokens(const std::string& text);

// Whole-token phrase matching: counts occurrences of each lexicon phrase as a
// contiguous token run, returns the category with the most hits. Zero hits is
// Other; ties resolve by priority Alcohol > Gambling > Food.
AdCategory keyword_label(const std::string& text,
                         const std::vector<ingest::KeywordLexicon>& lexicons);

struct LabelStats {
  std::int64_t labeled = 0;
  std::int64_t defaulted = 0;  // ads without a source entry, set to Other
  std::vector<std::string> warnings;
};

LabelStats apply_predictions(std::vector<AdInstance>& ads,
                             const std::map<std::string, AdCategory>& predictions);
LabelStats apply_keyword_labels(std::vector<AdInstance>& ads,
                                const std::map<std::string, std::string>& texts,
                                const std::vector<ingest::KeywordLexicon>& lexicons);

struct Evaluation {
  PRF1Report report;
  ConfusionMatrix confusion;
};

// Per-class precision/recall/F1 over equal key sets, plus support-weighted
// aggregates over the classes present in truth. Zero denominators score 0 and
// set zero_division.
Evaluation evaluate(const std::map<std::string, AdCategory>& predictions,
                    const std::map<std::string, AdCategory>& truth);

// Subset protocol: per repetition, keeps every non-Other item plus a random
// Other subset the size of the smallest non-empty non-Other class, evaluates,
// and averages the reports. Draws are seeded and documented, not claimed to
// replicate anyone else's sampling.
Evaluation evaluate_subsets(const std::map<std::string, AdCategory>& predictions,
                            const std::map<std::string, AdCategory>& truth,
                            int repetitions, std::uint64_t seed);

}  // namespace label
}  // namespace adscan

#endif  // ADSCAN_LABEL_HPP
