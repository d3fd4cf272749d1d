#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groupopt/model.hpp"

namespace groupopt {

/// Shape of a synthetic panel: size and number of levels per demographic.
struct SyntheticSpec {
  std::string name;
  int size = 0;
  std::vector<int> levels;
  /// Index into `levels` of a binary demographic that may serve as the
  /// cluster column.
  std::optional<int> cluster_demographic;
  std::uint64_t seed = 1;
};

/// Desk-scale stand-ins for the evaluation data sets:
///   hd30  - 30 participants, 3 binary demographics, one clusterable
///   sf40  - 40 participants, 4 binary (one clusterable) + 3, 4, 5 levels
///   hd60  - 60 participants, 4 binary (one clusterable) + 4 levels
///   hd100 - 100 participants, same shape as hd60
///   hd120 - 120 participants, 3 binary + 4 levels, no cluster column
/// Throws std::invalid_argument for unknown names.
SyntheticSpec desk_dataset(std::string_view name);
std::vector<std::string> desk_dataset_names();

/// Deterministic panel with quota-style value counts. With `use_clustering`
/// the cluster demographic becomes the cluster column (first level is the
/// clustered value) and is left out of the diversification set; otherwise
/// every demographic diversifies.
Panel make_synthetic_panel(const SyntheticSpec& spec, bool use_clustering);

}  // namespace groupopt
