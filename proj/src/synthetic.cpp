#include "groupopt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>

#include "groupopt/rng.hpp"

namespace groupopt {

SyntheticSpec desk_dataset(std::string_view name) {
  if (name == "hd30") return {"hd30", 30, {2, 2, 2}, 2, 30};
  if (name == "sf40") return {"sf40", 40, {2, 2, 2, 2, 3, 4, 5}, 3, 40};
  if (name == "hd60") return {"hd60", 60, {2, 2, 2, 2, 4}, 3, 60};
  if (name == "hd100") return {"hd100", 100, {2, 2, 2, 2, 4}, 3, 100};
  if (name == "hd120") return {"hd120", 120, {2, 2, 2, 4}, std::nullopt, 120};
  throw std::invalid_argument("unknown synthetic data set '" + std::string(name) + "'");
}

std::vector<std::string> desk_dataset_names() { return {"hd30", "sf40", "hd60", "hd100", "hd120"}; }

namespace {

// Seat counts per level by largest remainder over random weights in [1, 2).
std::vector<int> quota_counts(int size, int levels, RngStream& rng) {
  std::vector<double> weights(static_cast<std::size_t>(levels));
  for (auto& w : weights) w = 1.0 + rng.uniform01();
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> counts(weights.size());
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    const double exact = size * weights[v] / total;
    counts[v] = static_cast<int>(std::floor(exact));
    assigned += counts[v];
    remainders.emplace_back(exact - counts[v], static_cast<int>(v));
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (int k = 0; assigned < size; ++k, ++assigned) ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(k)].second)];
  return counts;
}

}  // namespace

Panel make_synthetic_panel(const SyntheticSpec& spec, bool use_clustering) {
  RngStream rng(spec.seed);
  Panel panel;
  const int width = static_cast<int>(std::to_string(spec.size).size());
  for (int i = 0; i < spec.size; ++i) {
    std::string number = std::to_string(i + 1);
    panel.participants.push_back(Participant{"P" + std::string(static_cast<std::size_t>(width) - number.size(), '0') + number, {}, false, {}, {}});
  }

  for (std::size_t d = 0; d < spec.levels.size(); ++d) {
    const std::string name = "d" + std::to_string(d + 1);
    Demographic demo{name, {}};
    for (int v = 0; v < spec.levels[d]; ++v) demo.values.push_back(name + "_" + std::string(1, static_cast<char>('a' + v)));

    const auto counts = quota_counts(spec.size, spec.levels[d], rng);
    std::vector<int> assignment;
    for (std::size_t v = 0; v < counts.size(); ++v) assignment.insert(assignment.end(), static_cast<std::size_t>(counts[v]), static_cast<int>(v));
    rng.shuffle(std::span(assignment));
    for (int i = 0; i < spec.size; ++i) {
      panel.participants[static_cast<std::size_t>(i)].demographics[name] =
          demo.values[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    }

    const bool is_cluster_column = use_clustering && spec.cluster_demographic == static_cast<int>(d);
    if (is_cluster_column) {
      panel.cluster = ClusterSpec{name, demo.values.front()};
    } else {
      panel.demographics.push_back(std::move(demo));
    }
  }
  panel.derive_cluster_flags();
  return panel;
}

}  // namespace groupopt
