#include "citevec/synth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "citevec/errors.hpp"
#include "citevec/subcategory.hpp"

namespace citevec {
namespace {

// Portable draws: std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) return engine_();
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return lo + x % span;
  }

 private:
  std::mt19937_64 engine_;
};

using Profile = std::vector<std::pair<int, double>>;

const std::array<Profile, 5> kProfiles = {{
    {{12, 0.5}, {14, 0.3}, {15, 0.2}},
    {{31, 0.5}, {33, 0.3}, {61, 0.2}},
    {{21, 0.4}, {22, 0.35}, {43, 0.25}},
    {{51, 0.5}, {52, 0.3}, {55, 0.2}},
    {{41, 0.5}, {46, 0.3}, {54, 0.2}},
}};
const Profile kEmerging = {{63, 0.6}, {65, 0.4}};
// USPTO classes of subcategory 11 other than the emerging one.
constexpr std::array<int, 5> kProfileClass = {8, 19, 71, 127, 504};

int citer_class(int subcategory) { return 1000 + subcategory; }

Profile shifted(const Profile& base, const std::vector<std::pair<int, double>>& shift) {
  std::map<int, double> rate(base.begin(), base.end());
  for (auto [code, delta] : shift) rate[code] += delta;
  Profile out;
  double total = 0.0;
  for (auto [code, r] : rate) {
    if (r > 0.0) {
      out.emplace_back(code, r);
      total += r;
    }
  }
  if (total <= 0.0) return base;
  for (auto& [code, r] : out) r /= total;
  return out;
}

// Citing patents are granted mid-month.
Date mid_month_after(Date d) {
  using namespace std::chrono;
  const auto ymd = d.ymd();
  year_month ym{ymd.year(), ymd.month()};
  if (unsigned(ymd.day()) >= 15) ym += months{1};
  return Date(sys_days{ym / 15}.time_since_epoch().count());
}

struct Focal {
  Date date;
  int cls = 0;
  std::size_t profile = 0;
  bool planted = false;
};

struct Event {
  Date date;
  int subcategory = 0;
  std::uint64_t key = 0;
  std::size_t focal = 0;
};

struct Citer {
  Date date;
  int subcategory = 0;
  std::vector<std::size_t> focal;
  std::vector<std::size_t> earlier;  // other citers
};

}  // namespace

std::vector<std::pair<int, double>> planted_shift(double amount) {
  std::map<int, double> delta;
  for (auto [code, r] : kProfiles[0]) delta[code] -= amount * r;
  for (auto [code, r] : kEmerging) delta[code] += amount * r;
  return {delta.begin(), delta.end()};
}

void check(const PlantedConfig& c) {
  if (c.n_background == 0 || c.n_planted == 0)
    throw ConfigError("synth: n_background and n_planted must be positive");
  if (c.end_date <= c.start_date) throw ConfigError("synth: end date must follow start date");
  if (c.emergence_date < c.start_date || c.emergence_date > c.end_date)
    throw ConfigError("synth: emergence date outside [start, end]");
  if (!(c.noise >= 0.0 && c.noise <= 1.0)) throw ConfigError("synth: noise must be in [0, 1]");
  if (c.n_profiles < 1 || c.n_profiles > kProfiles.size())
    throw ConfigError("synth: n_profiles must be in 1..5");
  if (c.min_citations > c.max_citations)
    throw ConfigError("synth: min_citations exceeds max_citations");
  if (c.planted_lead_days < 0 || c.max_lag_days < 1)
    throw ConfigError("synth: planted lead must be >= 0 and max lag >= 1");
  for (auto [code, d] : c.profile_shift) {
    if (!is_subcategory(code))
      throw ConfigError("synth: profile shift names unknown subcategory " + std::to_string(code));
    if (!std::isfinite(d)) throw ConfigError("synth: profile shift must be finite");
  }
}

SynthCorpus synth_generate(const PlantedConfig& c) {
  check(c);
  Rng rng(c.seed);

  std::vector<Focal> focal;
  focal.reserve(c.n_background + c.n_planted);
  const auto span_days = [&](Date lo) {
    return Date(lo.days() + static_cast<std::int32_t>(rng.between(
                                0, static_cast<std::uint64_t>(c.end_date.days() - lo.days()))));
  };
  for (std::size_t i = 0; i < c.n_background; ++i) {
    Focal f;
    f.profile = rng.between(0, c.n_profiles - 1);
    f.cls = kProfileClass[f.profile];
    f.date = span_days(c.start_date);
    focal.push_back(f);
  }
  const Date planted_from(std::max(c.start_date.days(),
                                   c.emergence_date.days() - c.planted_lead_days));
  for (std::size_t i = 0; i < c.n_planted; ++i) {
    Focal f;
    f.profile = 0;
    f.cls = kProfileClass[0];
    f.planted = true;
    f.date = span_days(planted_from);
    focal.push_back(f);
  }

  const Profile planted_after = shifted(kProfiles[0], c.profile_shift);
  std::vector<int> noise_codes;
  for (int code : kSubcategoryCodes)
    if (code != kSynthFocalSubcategory) noise_codes.push_back(code);

  std::vector<Event> events;
  for (std::size_t i = 0; i < focal.size(); ++i) {
    const auto& f = focal[i];
    const auto n = rng.between(c.min_citations, c.max_citations);
    for (std::uint64_t j = 0; j < n; ++j) {
      const auto lag = static_cast<std::int32_t>(rng.between(0, c.max_lag_days - 1));
      const Date when = mid_month_after(Date(f.date.days() + lag));
      const double u = rng.uniform();
      const double v = rng.uniform();
      const auto pick = rng.between(0, noise_codes.size() - 1);
      const auto key = rng.between(0, std::numeric_limits<std::uint64_t>::max());
      if (when > c.end_date) continue;
      int sub;
      if (u < c.noise) {
        sub = noise_codes[pick];
      } else {
        const Profile& p = f.planted && when > c.emergence_date ? planted_after
                                                                 : kProfiles[f.profile];
        double w = v;
        sub = p.back().first;
        for (auto [code, r] : p) {
          if (w < r) {
            sub = code;
            break;
          }
          w -= r;
        }
      }
      events.push_back({when, sub, key, i});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.date != b.date) return a.date < b.date;
    if (a.subcategory != b.subcategory) return a.subcategory < b.subcategory;
    if (a.key != b.key) return a.key < b.key;
    return a.focal < b.focal;
  });

  // Pack same-month, same-subcategory citations into citing patents of
  // 1 to 4 focal citations each, then add citations among citing patents.
  std::vector<Citer> citers;
  std::size_t capacity = 0;
  for (const auto& e : events) {
    bool fresh = citers.empty() || capacity == 0 || citers.back().date != e.date ||
                 citers.back().subcategory != e.subcategory;
    if (!fresh) {
      const auto& fs = citers.back().focal;
      fresh = std::find(fs.begin(), fs.end(), e.focal) != fs.end();
    }
    if (fresh) {
      Citer ct;
      ct.date = e.date;
      ct.subcategory = e.subcategory;
      citers.push_back(std::move(ct));
      capacity = rng.between(1, 4);
    }
    citers.back().focal.push_back(e.focal);
    --capacity;
  }
  for (std::size_t i = 1; i < citers.size(); ++i) {
    const auto extra = rng.between(0, 2);
    for (std::uint64_t j = 0; j < extra; ++j) {
      const auto target = rng.between(0, i - 1);
      auto& e = citers[i].earlier;
      if (std::find(e.begin(), e.end(), target) == e.end()) e.push_back(target);
    }
  }

  // Ids follow grant order, focal patents first within a day.
  struct Slot {
    Date date;
    int kind;
    std::size_t index;
  };
  std::vector<Slot> slots;
  slots.reserve(focal.size() + citers.size());
  for (std::size_t i = 0; i < focal.size(); ++i) slots.push_back({focal[i].date, 0, i});
  for (std::size_t i = 0; i < citers.size(); ++i) slots.push_back({citers[i].date, 1, i});
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    if (a.date != b.date) return a.date < b.date;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.index < b.index;
  });
  constexpr PatentId kFirstId = 4000001;
  std::vector<PatentId> focal_id(focal.size()), citer_id(citers.size());
  SynthCorpus out;
  out.patents.reserve(slots.size());
  for (std::size_t r = 0; r < slots.size(); ++r) {
    const auto& s = slots[r];
    const PatentId id = kFirstId + static_cast<PatentId>(r);
    PatentRecord p;
    p.id = id;
    p.grant_date = s.date;
    if (s.kind == 0) {
      focal_id[s.index] = id;
      p.uspto_class = focal[s.index].cls;
    } else {
      citer_id[s.index] = id;
      p.uspto_class = citer_class(citers[s.index].subcategory);
    }
    out.patents.push_back(p);
  }

  std::vector<Citation> raw;
  for (std::size_t i = 0; i < citers.size(); ++i) {
    for (auto f : citers[i].focal) raw.push_back({citer_id[i], focal_id[f]});
    for (auto e : citers[i].earlier) raw.push_back({citer_id[i], citer_id[e]});
  }
  out.citations = clean_edges(std::move(raw));

  for (int cls : kProfileClass) out.classmap.add(cls, kSynthFocalSubcategory);
  out.classmap.add(kSynthEmergingClass, kSynthFocalSubcategory);
  for (int code : kSubcategoryCodes)
    if (code != kSynthFocalSubcategory) out.classmap.add(citer_class(code), code);

  for (std::size_t i = 0; i < focal.size(); ++i) {
    out.labels.emplace(focal_id[i], focal[i].planted ? kSynthEmergingClass : focal[i].cls);
    if (focal[i].planted) out.planted.push_back(focal_id[i]);
  }
  std::sort(out.planted.begin(), out.planted.end());
  return out;
}

PlantedPoints planted_points(std::size_t n_per_group, double sigma, std::uint64_t seed) {
  if (n_per_group == 0) throw ConfigError("planted_points: empty groups");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("planted_points: bad sigma");
  Rng rng(seed);
  // Box-Muller on the portable uniform draws.
  const auto normal = [&] {
    double u = 0.0;
    while (u == 0.0) u = rng.uniform();
    const double v = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  };
  PlantedPoints out;
  out.points.dim = kNumSubcategories;
  for (int group = 0; group < 2; ++group) {
    Components base{};
    for (auto [code, r] : group == 0 ? kProfiles[0] : kEmerging)
      base[static_cast<std::size_t>(*subcategory_index(code))] = r;
    for (std::size_t i = 0; i < n_per_group; ++i) {
      Components c{};
      double norm = 0.0;
      for (std::size_t d = 0; d < c.size(); ++d) {
        c[d] = std::max(0.0, base[d] + sigma * normal());
        norm += c[d] * c[d];
      }
      norm = std::sqrt(norm);
      for (auto& x : c) x /= norm;
      out.points.push_back(static_cast<PatentId>(out.labels.size() + 1), c);
      out.labels.push_back(group);
    }
  }
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("patents.tsv");
    f << "patent_id\tgrant_date\tuspto_class\n";
    for (const auto& p : corpus.patents)
      f << p.id << '\t' << p.grant_date.iso() << '\t' << p.uspto_class << '\n';
  }
  {
    auto f = open("citations.tsv");
    f << "citing_id\tcited_id\n";
    for (const auto& e : corpus.citations.edges) f << e.citing << '\t' << e.cited << '\n';
  }
  {
    auto f = open("classmap.tsv");
    f << "uspto_class\tsubcategory\n";
    for (auto [cls, sub] : corpus.classmap.entries()) f << cls << '\t' << sub << '\n';
  }
  {
    std::vector<std::pair<PatentId, int>> rows(corpus.labels.begin(), corpus.labels.end());
    std::sort(rows.begin(), rows.end());
    auto f = open("labels.tsv");
    f << "patent_id\tclass_code\n";
    for (auto [id, cls] : rows) f << id << '\t' << cls << '\n';
  }
}

}  // namespace citevec
