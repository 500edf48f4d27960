#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "citevec/corpus.hpp"
#include "citevec/predictor.hpp"
#include "citevec/validation.hpp"

namespace citevec {

// Shift that moves the planted profile a fraction `amount` of the way from
// profile 0 to the emerging profile (amount 1 replaces it entirely).
std::vector<std::pair<int, double>> planted_shift(double amount);

// Synthetic corpus with a planted emerging technology.
//
// Focal patents all belong to subcategory 11. Each background patent has one
// of `n_profiles` citation profiles (a distribution over citing
// subcategories) and the matching USPTO class. Planted patents carry the
// class of profile 0 and cite-profile 0 until `emergence_date`; citations
// from patents granted after that date follow profile 0 plus
// `profile_shift`. The labels file assigns planted patents the emerging
// class, mirroring a retroactive reclassification.
struct PlantedConfig {
  std::size_t n_background = 4500;
  std::size_t n_planted = 500;
  Date start_date = Date(3652);       // 1980-01-01
  Date end_date = Date(10956);        // 1999-12-31
  Date emergence_date = Date(7851);   // 1991-07-01
  // Planted patents are granted from emergence_date minus this many days.
  std::int32_t planted_lead_days = 365;
  // Additive change of the citing-subcategory rates, per subcategory code.
  std::vector<std::pair<int, double>> profile_shift = planted_shift(1.0);
  // Fraction of citations whose citing subcategory is drawn uniformly from
  // the 35 codes other than the focal one instead of from the profile.
  double noise = 0.02;
  std::uint64_t seed = 1;
  std::size_t n_profiles = 4;  // 1..5
  std::size_t min_citations = 2;
  std::size_t max_citations = 12;
  std::int32_t max_lag_days = 6 * 365;
};

inline constexpr int kSynthFocalSubcategory = 11;
inline constexpr int kSynthEmergingClass = 442;

// Throws ConfigError when a field is out of range.
void check(const PlantedConfig& config);

struct SynthCorpus {
  std::vector<PatentRecord> patents;
  EdgeList citations;
  ClassMap classmap;
  Labels labels;               // focal patents only
  std::vector<PatentId> planted;  // ascending
};

// Deterministic in `config.seed` across platforms.
SynthCorpus synth_generate(const PlantedConfig& config);

// Writes patents.tsv, citations.tsv, classmap.tsv and labels.tsv.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

// Two groups of unit vectors in citation-vector space: each row is its
// group's base profile plus independent N(0, sigma^2) noise per component,
// clipped at zero and normalised. Group 0 uses background profile 0, group 1
// the emerging profile. Ids are 1..2n; labels[i] is the group of row i.
struct PlantedPoints {
  PointMatrix points;
  std::vector<int> labels;
};
PlantedPoints planted_points(std::size_t n_per_group, double sigma, std::uint64_t seed);

}  // namespace citevec
