#include "adscan/label.hpp"

#include <algorithm>
#include <cctype>
#include <random>

namespace adscan {
namespace label {

std::vector<std::string> normalize_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

namespace {

std::int64_t phrase_hits(const std::vector<std::string>& text_tokens,
                         const std::vector<std::string>& phrase_tokens) {
  if (phrase_tokens.empty() || phrase_tokens.size() > text_tokens.size()) return 0;
  std::int64_t hits = 0;
  for (std::size_t i = 0; i + phrase_tokens.size() <= text_tokens.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < phrase_tokens.size() && match; ++j)
      match = text_tokens[i + j] == phrase_tokens[j];
    if (match) ++hits;
  }
  return hits;
}

}  // namespace

AdCategory keyword_label(const std::string& text,
                         const std::vector<ingest::KeywordLexicon>& lexicons) {
  auto tokens = normalize_tokens(text);
  std::array<std::int64_t, kCategoryCount> hits{};
  for (const auto& lex : lexicons)
    for (const auto& phrase : lex.phrases)
      hits[static_cast<int>(lex.category)] +=
          phrase_hits(tokens, normalize_tokens(phrase));

  std::int64_t best = 0;
  for (auto h : hits) best = std::max(best, h);
  if (best == 0) return AdCategory::Other;
  // Mixed-content ties: rarer, higher-interest categories win.
  for (AdCategory c : {AdCategory::Alcohol, AdCategory::Gambling, AdCategory::Food})
    if (hits[static_cast<int>(c)] == best) return c;
  return AdCategory::Other;
}

LabelStats apply_predictions(std::vector<AdInstance>& ads,
                             const std::map<std::string, AdCategory>& predictions) {
  LabelStats stats;
  for (auto& ad : ads) {
    auto it = predictions.find(ad.ad_id);
    if (it == predictions.end()) {
      ad.category = AdCategory::Other;
      ++stats.defaulted;
      stats.warnings.push_back("no prediction for ad " + ad.ad_id +
                               ", defaulted to other");
    } else {
      ad.category = it->second;
      ++stats.labeled;
    }
  }
  return stats;
}

LabelStats apply_keyword_labels(std::vector<AdInstance>& ads,
                                const std::map<std::string, std::string>& texts,
                                const std::vector<ingest::KeywordLexicon>& lexicons) {
  LabelStats stats;
  for (auto& ad : ads) {
    auto it = texts.find(ad.ad_id);
    if (it == texts.end()) {
      ad.category = AdCategory::Other;
      ++stats.defaulted;
      stats.warnings.push_back("no text for ad " + ad.ad_id +
                               ", defaulted to other");
    } else {
      ad.category = keyword_label(it->second, lexicons);
      ++stats.labeled;
    }
  }
  return stats;
}

Evaluation evaluate(const std::map<std::string, AdCategory>& predictions,
                    const std::map<std::string, AdCategory>& truth) {
  if (predictions.size() != truth.size())
    throw InputError("prediction/truth key sets differ in size (" +
                     std::to_string(predictions.size()) + " vs " +
                     std::to_string(truth.size()) + ")");
  Evaluation ev;
  for (const auto& [id, t] : truth) {
    auto it = predictions.find(id);
    if (it == predictions.end())
      throw InputError("no prediction for ground-truth id " + id);
    ev.confusion.counts[static_cast<int>(t)][static_cast<int>(it->second)]++;
  }

  auto& rep = ev.report;
  double wsum_p = 0, wsum_r = 0, wsum_f = 0;
  std::int64_t wtotal = 0;
  for (int c = 0; c < kCategoryCount; ++c) {
    std::int64_t tp = ev.confusion.counts[c][c];
    std::int64_t fp = 0, fn = 0;
    for (int o = 0; o < kCategoryCount; ++o) {
      if (o == c) continue;
      fp += ev.confusion.counts[o][c];
      fn += ev.confusion.counts[c][o];
    }
    auto& pc = rep.per_class[c];
    pc.support = tp + fn;
    if (tp + fp > 0) {
      pc.precision = static_cast<double>(tp) / (tp + fp);
    } else {
      pc.precision = 0.0;
      if (pc.support > 0) rep.zero_division = true;
    }
    if (tp + fn > 0) {
      pc.recall = static_cast<double>(tp) / (tp + fn);
    } else {
      pc.recall = 0.0;
    }
    if (pc.precision + pc.recall > 0) {
      pc.f1 = 2 * pc.precision * pc.recall / (pc.precision + pc.recall);
    } else {
      pc.f1 = 0.0;
      if (pc.support > 0) rep.zero_division = true;
    }
    if (pc.support > 0) {
      wsum_p += pc.precision * pc.support;
      wsum_r += pc.recall * pc.support;
      wsum_f += pc.f1 * pc.support;
      wtotal += pc.support;
    }
  }
  if (wtotal > 0) {
    rep.weighted_precision = wsum_p / wtotal;
    rep.weighted_recall = wsum_r / wtotal;
    rep.weighted_f1 = wsum_f / wtotal;
  }
  return ev;
}

Evaluation evaluate_subsets(const std::map<std::string, AdCategory>& predictions,
                            const std::map<std::string, AdCategory>& truth,
                            int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw InputError("subset repetitions must be >= 1");

  std::vector<std::string> other_ids;
  std::array<std::int64_t, kCategoryCount> support{};
  for (const auto& [id, t] : truth) {
    support[static_cast<int>(t)]++;
    if (t == AdCategory::Other) other_ids.push_back(id);
  }
  std::int64_t subset_size = 0;
  for (AdCategory c : {AdCategory::Food, AdCategory::Alcohol, AdCategory::Gambling})
    subset_size = std::max(subset_size, support[static_cast<int>(c)]);
  if (subset_size == 0)
    throw InputError("subset evaluation needs at least one non-other item");
  subset_size = std::min<std::int64_t>(subset_size,
                                       static_cast<std::int64_t>(other_ids.size()));

  std::mt19937_64 rng(seed);
  Evaluation avg;
  for (int rep = 0; rep < repetitions; ++rep) {
    // Fisher-Yates prefix draw of subset_size ids.
    std::vector<std::string> pool = other_ids;
    for (std::int64_t i = 0; i < subset_size; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    std::map<std::string, AdCategory> sub_truth, sub_pred;
    for (const auto& [id, t] : truth)
      if (t != AdCategory::Other) {
        sub_truth[id] = t;
        sub_pred[id] = predictions.at(id);
      }
    for (std::int64_t i = 0; i < subset_size; ++i) {
      sub_truth[pool[i]] = AdCategory::Other;
      sub_pred[pool[i]] = predictions.at(pool[i]);
    }
    Evaluation ev = evaluate(sub_pred, sub_truth);
    for (int c = 0; c < kCategoryCount; ++c) {
      avg.report.per_class[c].precision += ev.report.per_class[c].precision;
      avg.report.per_class[c].recall += ev.report.per_class[c].recall;
      avg.report.per_class[c].f1 += ev.report.per_class[c].f1;
      avg.report.per_class[c].support += ev.report.per_class[c].support;
      for (int o = 0; o < kCategoryCount; ++o)
        avg.confusion.counts[c][o] += ev.confusion.counts[c][o];
    }
    avg.report.weighted_precision += ev.report.weighted_precision;
    avg.report.weighted_recall += ev.report.weighted_recall;
    avg.report.weighted_f1 += ev.report.weighted_f1;
    avg.report.zero_division = avg.report.zero_division || ev.report.zero_division;
  }
  for (int c = 0; c < kCategoryCount; ++c) {
    avg.report.per_class[c].precision /= repetitions;
    avg.report.per_class[c].recall /= repetitions;
    avg.report.per_class[c].f1 /= repetitions;
    avg.report.per_class[c].support /= repetitions;
  }
  avg.report.weighted_precision /= repetitions;
  avg.report.weighted_recall /= repetitions;
  avg.report.weighted_f1 /= repetitions;
  return avg;
}

}  // namespace label
}  // namespace adscan
