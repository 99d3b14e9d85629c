#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <unordered_set>

#include "ndswarm/dataset.hpp"

namespace ndswarm {

namespace {

// mt19937_64 output is fully specified by the standard; the transforms below
// are written out so that streams do not depend on the library's distributions.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal(double mean, double sd) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

struct FeatureModel {
  const char* name;
  double lo;
  double hi;
  double step;  // 0 = continuous, otherwise 1/k for an integer k
};

struct GroupModel {
  const char* name;
  std::vector<std::pair<double, double>> mean_sd;
};

double shape(const FeatureModel& f, double v) {
  v = std::clamp(v, f.lo, f.hi);
  if (f.step > 0.0) {
    // Steps are 1/k; dividing by k gives the double nearest the decimal value.
    const double per_unit = std::round(1.0 / f.step);
    v = std::round(v * per_unit) / per_unit;
  }
  return v;
}

constexpr std::array kFirstNames = {"Ada",   "Borys",  "Celina", "Dorian", "Edyta", "Filip",
                                    "Greta", "Henryk", "Irena",  "Jonas",  "Kira",  "Leon",
                                    "Maja",  "Nikodem", "Olga",  "Piotr",  "Rita",  "Stefan"};
constexpr std::array kLastNames = {"Abacki", "Bober",  "Cichy",   "Dudek",  "Ezop",   "Fala",
                                   "Gromek", "Hejnal", "Iskra",   "Jasny",  "Kruk",   "Lipa",
                                   "Mazur",  "Nowik",  "Orzech",  "Pstrag", "Rybka",  "Sowa"};
constexpr std::array kDrinkBrands = {"Fizz", "Bolt", "Aqua", "Zest", "Nova", "Peak",
                                     "Drift", "Glow", "Rush", "Vibe", "Tide", "Blaze"};

std::string unique_label(std::string base, std::unordered_set<std::string>& used) {
  std::string label = base;
  for (int k = 2; !used.insert(label).second; ++k) label = base + " " + std::to_string(k);
  return label;
}

Dataset build(const std::vector<FeatureModel>& features, const std::vector<GroupModel>& groups,
              const SynthSpec& spec, PortableRng& rng,
              const std::function<std::string(std::size_t point, std::size_t group)>& namer,
              std::string source) {
  const auto n = static_cast<Eigen::Index>(features.size() + 1);
  const auto N = static_cast<Eigen::Index>(spec.points);
  Eigen::MatrixXd values(n, N);
  std::vector<std::string> labels;
  labels.reserve(spec.points);
  std::unordered_set<std::string> used;
  for (Eigen::Index p = 0; p < N; ++p) {
    const auto g = static_cast<std::size_t>(p) % groups.size();
    for (std::size_t f = 0; f < features.size(); ++f) {
      const auto [mean, sd] = groups[g].mean_sd[f];
      values(static_cast<Eigen::Index>(f), p) = shape(features[f], rng.normal(mean, sd));
    }
    values(n - 1, p) = static_cast<double>(g);
    labels.push_back(unique_label(namer(static_cast<std::size_t>(p), g), used));
  }
  std::vector<std::string> names;
  for (const auto& f : features) names.emplace_back(f.name);
  names.emplace_back("group_numeric");
  return Dataset(std::move(names), std::move(values), std::move(labels), std::move(source));
}

Dataset politicians(const SynthSpec& spec) {
  static const std::vector<FeatureModel> features = {
      {"promises", 0, 80, 1},
      {"fulfillment_rate", 0, 1, 0.01},
      {"popularity", 0, 100, 1},
      {"sympathy", 0, 10, 0.1},
      {"economic_views", -5, 5, 0.1},
      {"social_views", -5, 5, 0.1},
      {"media_activity", 0, 100, 1},
      {"voting_effectiveness", 0, 1, 0.01},
      {"age", 28, 85, 1},
  };
  static const std::vector<GroupModel> groups = {
      {"populists",
       {{42, 6}, {0.25, 0.08}, {68, 8}, {7.2, 0.9}, {-2.0, 1.2}, {2.5, 1.0}, {85, 7}, {0.40, 0.10}, {47, 8}}},
      {"conservatives",
       {{16, 4}, {0.62, 0.10}, {52, 7}, {5.0, 1.0}, {3.2, 0.9}, {3.4, 0.8}, {45, 9}, {0.72, 0.08}, {61, 7}}},
      {"liberals",
       {{26, 5}, {0.50, 0.10}, {56, 8}, {6.1, 0.9}, {1.0, 1.0}, {-3.1, 0.9}, {62, 9}, {0.61, 0.09}, {44, 7}}},
      {"technocrats",
       {{8, 3}, {0.86, 0.06}, {36, 7}, {3.6, 0.8}, {0.4, 0.8}, {0.0, 0.8}, {21, 7}, {0.90, 0.04}, {53, 6}}},
  };
  PortableRng rng(spec.seed);
  auto namer = [&rng](std::size_t, std::size_t) {
    return std::string(kFirstNames[rng.index(kFirstNames.size())]) + " " +
           kLastNames[rng.index(kLastNames.size())];
  };
  return build(features, groups, spec, rng, namer, "synthetic:politicians");
}

Dataset drinks(const SynthSpec& spec) {
  static const std::vector<FeatureModel> features = {
      {"sweetness", 0, 10, 0.1},     {"fizziness", 0, 10, 0.1},     {"rating", 1, 10, 0.1},
      {"color_intensity", 0, 10, 0.1}, {"price", 0.3, 12, 0.01},    {"caffeine", 0, 200, 1},
      {"sourness", 0, 10, 0.1},      {"sugar", 0, 15, 0.1},         {"citric_acid", 0, 5, 0.01},
      {"co2_pressure", 1, 5, 0.01},  {"preservatives", 0, 1, 0.01},
  };
  static const std::vector<GroupModel> groups = {
      {"classic",
       {{7.0, 0.8}, {6.5, 0.8}, {6.8, 0.9}, {6.0, 1.2}, {1.4, 0.3}, {30, 8},
        {2.5, 0.7}, {10.5, 1.0}, {1.2, 0.3}, {3.0, 0.3}, {0.35, 0.08}}},
      {"premium",
       {{4.5, 0.9}, {4.0, 1.0}, {8.2, 0.6}, {3.5, 1.2}, {4.8, 1.0}, {12, 6},
        {4.0, 0.8}, {5.5, 1.2}, {2.6, 0.4}, {2.2, 0.3}, {0.10, 0.05}}},
      {"extreme",
       {{8.5, 0.7}, {8.8, 0.6}, {5.9, 1.3}, {8.4, 0.9}, {2.3, 0.5}, {150, 20},
        {6.5, 1.0}, {12.5, 1.2}, {3.6, 0.5}, {4.0, 0.4}, {0.60, 0.10}}},
  };
  PortableRng rng(spec.seed);
  auto namer = [&rng](std::size_t point, std::size_t group) {
    static constexpr std::array kLine = {"Classic", "Premium", "Extreme"};
    return std::string(kDrinkBrands[rng.index(kDrinkBrands.size())]) + " " + kLine[group] + " " +
           std::to_string(point + 1);
  };
  return build(features, groups, spec, rng, namer, "synthetic:drinks");
}

}  // namespace

Archetype parse_archetype(std::string_view text) {
  if (text == "politicians") return Archetype::Politicians;
  if (text == "drinks") return Archetype::Drinks;
  throw DatasetError("unknown archetype '" + std::string(text) + "'");
}

std::size_t archetype_groups(Archetype archetype) {
  return archetype == Archetype::Politicians ? 4 : 3;
}

Dataset generate_synthetic(const SynthSpec& spec) {
  const auto groups = archetype_groups(spec.archetype);
  if (spec.points < groups) {
    throw DatasetError("synthetic archetype needs at least " + std::to_string(groups) + " points");
  }
  switch (spec.archetype) {
    case Archetype::Politicians:
      return politicians(spec);
    case Archetype::Drinks:
      return drinks(spec);
  }
  throw DatasetError("unknown archetype");
}

}  // namespace ndswarm
