#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "groupopt/evaluation.hpp"
#include "groupopt/model.hpp"

namespace groupopt {

inline constexpr const char* kSchemaVersion = "1";

// --- delimiter-separated text --------------------------------------------------

using Rows = std::vector<std::vector<std::string>>;

/// RFC 4180 style parsing: quoted fields, doubled quotes, CRLF or LF line
/// ends, optional UTF-8 BOM. Blank lines are skipped. Throws ParseError.
Rows parse_delimited(std::string_view text, char delimiter = ',');
std::string format_delimited(const Rows& rows, char delimiter = ',');

// --- configuration -------------------------------------------------------------

struct ColumnSpec {
  std::string id = "id";
  /// Diversification columns. Empty means every column not otherwise designated.
  std::vector<std::string> diversify;
  std::optional<std::string> cluster_column;
  std::string cluster_value;
  std::optional<std::string> manual_column;
};

struct ConfigFile {
  ColumnSpec columns;
  char delimiter = ',';
  RunConfig run;
  /// False when the document leaves rng_seed out, so callers can fall back to
  /// another default.
  bool seed_given = false;
  /// participant id -> (zero-based round -> zero-based table).
  std::map<std::string, std::map<int, TableIndex>> manual_overrides;
};

/// Throws SchemaError on malformed documents.
ConfigFile parse_config(std::string_view json_text);
nlohmann::ordered_json config_to_json(const ConfigFile& config);

nlohmann::ordered_json run_config_to_json(const RunConfig& config);
/// Reads the RunConfig fields present in `j` on top of `base`.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

// --- panels --------------------------------------------------------------------

struct LoadedPanel {
  Panel panel;
  std::vector<ValidationIssue> issues;
};

/// Builds a Panel from panel text. Value sets follow first appearance.
/// Throws ParseError, SchemaError or DuplicateIdError.
LoadedPanel load_panel_text(std::string_view panel_text, const ConfigFile& config);
LoadedPanel load_panel(const std::filesystem::path& panel_file, const std::filesystem::path& config_file);

/// Panel back to delimited text using the designated columns.
std::string write_panel(const Panel& panel, const ColumnSpec& columns, char delimiter = ',');

// --- allocations ---------------------------------------------------------------

/// Long format: round, participant_id, table, is_cluster_table; rows ordered
/// by (round, table, id); round and table are one-based.
std::string write_allocations(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout);

/// Parses a long-format allocation table. Participants missing from a round
/// get table -1, which check_plan reports. Throws ParseError, SchemaError or
/// InvalidInputError for unknown ids.
AllocationPlan read_allocations(std::string_view text, const EncodedPanel& panel);

// --- reports -------------------------------------------------------------------

nlohmann::ordered_json report_to_json(const RunReport& report);
/// Serialized report; byte-identical for identical reports.
std::string write_report(const RunReport& report);

// --- files ---------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace groupopt
