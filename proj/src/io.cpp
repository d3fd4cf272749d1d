#include "groupopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace groupopt {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Delimited text

Rows parse_delimited(std::string_view text, char delimiter) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  Rows rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  int line = 1;
  int quote_line = 0;

  const auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  const auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quotes) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        throw ParseError("line " + std::to_string(line) + ": unexpected quote inside unquoted field");
      }
      in_quotes = true;
      field_was_quoted = true;
      quote_line = line;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\r') {
      if (k + 1 < text.size() && text[k + 1] == '\n') continue;
      end_row();
      ++line;
    } else if (c == '\n') {
      end_row();
      ++line;
    } else {
      if (field_was_quoted) {
        throw ParseError("line " + std::to_string(line) + ": characters after closing quote");
      }
      field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("line " + std::to_string(quote_line) + ": unterminated quoted field");
  if (!field.empty() || field_was_quoted || !row.empty()) end_row();
  return rows;
}

std::string format_delimited(const Rows& rows, char delimiter) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out.push_back(delimiter);
      const auto& f = row[k];
      const bool quote = f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
      if (!quote) {
        out += f;
        continue;
      }
      out.push_back('"');
      for (char c : f) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
      }
      out.push_back('"');
    }
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

const char* weighting_name(SwapWeighting w) { return w == SwapWeighting::raw ? "raw" : "geometric"; }

template <typename T>
T get_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

int parse_positive_index(std::string_view text, const std::string& what) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || value < 1) {
    throw ParseError(what + ": expected a positive integer, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

ordered_json run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["num_tables"] = c.num_tables;
  j["num_cluster_tables"] = c.num_cluster_tables;
  j["num_rounds"] = c.num_rounds;
  j["swap_rounds"] = c.swap_rounds;
  j["pareto_mix"] = c.pareto_mix;
  j["saturation_base"] = c.saturation_base;
  j["rng_seed"] = c.rng_seed;
  j["swap_weighting"] = weighting_name(c.swap_weighting);
  return j;
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw SchemaError("run configuration must be an object");
  c.num_tables = get_field(j, "num_tables", c.num_tables);
  c.num_cluster_tables = get_field(j, "num_cluster_tables", c.num_cluster_tables);
  c.num_rounds = get_field(j, "num_rounds", c.num_rounds);
  c.swap_rounds = get_field(j, "swap_rounds", c.swap_rounds);
  c.pareto_mix = get_field(j, "pareto_mix", c.pareto_mix);
  c.saturation_base = get_field(j, "saturation_base", c.saturation_base);
  c.rng_seed = get_field(j, "rng_seed", c.rng_seed);
  const auto weighting = get_field<std::string>(j, "swap_weighting", weighting_name(c.swap_weighting));
  if (weighting == "raw") {
    c.swap_weighting = SwapWeighting::raw;
  } else if (weighting == "geometric") {
    c.swap_weighting = SwapWeighting::geometric;
  } else {
    throw SchemaError("swap_weighting must be \"raw\" or \"geometric\", got \"" + weighting + "\"");
  }
  return c;
}

ConfigFile parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");

  ConfigFile config;
  const auto version = get_field<std::string>(doc, "schema_version", kSchemaVersion);
  if (version != kSchemaVersion) throw SchemaError("unsupported config schema_version '" + version + "'");

  const auto delimiter = get_field<std::string>(doc, "delimiter", ",");
  if (delimiter == "\\t" || delimiter == "tab") {
    config.delimiter = '\t';
  } else if (delimiter.size() == 1 && delimiter != "\"" && delimiter != "\n") {
    config.delimiter = delimiter[0];
  } else {
    throw SchemaError("delimiter must be a single character");
  }

  if (doc.contains("columns")) {
    const auto& cols = doc.at("columns");
    if (!cols.is_object()) throw SchemaError("'columns' must be an object");
    config.columns.id = get_field<std::string>(cols, "id", "id");
    config.columns.diversify = get_field<std::vector<std::string>>(cols, "diversify", {});
    if (cols.contains("cluster") && !cols.at("cluster").is_null()) {
      const auto& cl = cols.at("cluster");
      if (!cl.is_object() || !cl.contains("column") || !cl.contains("value")) {
        throw SchemaError("'columns.cluster' needs 'column' and 'value'");
      }
      config.columns.cluster_column = get_field<std::string>(cl, "column", "");
      config.columns.cluster_value = get_field<std::string>(cl, "value", "");
    }
    if (cols.contains("manual") && !cols.at("manual").is_null()) {
      config.columns.manual_column = get_field<std::string>(cols, "manual", "");
    }
  }
  if (doc.contains("run")) {
    config.run = run_config_from_json(doc.at("run"));
    config.seed_given = doc.at("run").contains("rng_seed") && !doc.at("run").at("rng_seed").is_null();
  }
  if (doc.contains("manual_overrides")) {
    const auto& overrides = doc.at("manual_overrides");
    if (!overrides.is_object()) throw SchemaError("'manual_overrides' must be an object");
    for (const auto& [id, per_round] : overrides.items()) {
      if (!per_round.is_object()) throw SchemaError("manual override for '" + id + "' must map rounds to tables");
      for (const auto& [round, table] : per_round.items()) {
        if (!table.is_number_integer() || table.get<int>() < 1) {
          throw SchemaError("manual override for '" + id + "' must give a positive table number");
        }
        const int r = parse_positive_index(round, "manual override round for '" + id + "'");
        config.manual_overrides[id][r - 1] = table.get<int>() - 1;
      }
    }
  }
  return config;
}

ordered_json config_to_json(const ConfigFile& config) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["delimiter"] = config.delimiter == '\t' ? std::string("\\t") : std::string(1, config.delimiter);
  ordered_json cols;
  cols["id"] = config.columns.id;
  cols["diversify"] = config.columns.diversify;
  if (config.columns.cluster_column) {
    cols["cluster"] = {{"column", *config.columns.cluster_column}, {"value", config.columns.cluster_value}};
  } else {
    cols["cluster"] = nullptr;
  }
  cols["manual"] = config.columns.manual_column ? ordered_json(*config.columns.manual_column) : ordered_json(nullptr);
  j["columns"] = cols;
  j["run"] = run_config_to_json(config.run);
  ordered_json overrides = ordered_json::object();
  for (const auto& [id, per_round] : config.manual_overrides) {
    ordered_json rounds = ordered_json::object();
    for (const auto& [round, table] : per_round) rounds[std::to_string(round + 1)] = table + 1;
    overrides[id] = rounds;
  }
  j["manual_overrides"] = overrides;
  return j;
}

// ---------------------------------------------------------------------------
// Panels

LoadedPanel load_panel_text(std::string_view panel_text, const ConfigFile& config) {
  const Rows rows = parse_delimited(panel_text, config.delimiter);
  if (rows.empty()) throw ParseError("panel file is empty");
  const auto& header = rows.front();

  std::map<std::string, std::size_t> column;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (!column.emplace(header[k], k).second) throw SchemaError("duplicate column '" + header[k] + "' in header");
  }
  const auto require = [&](const std::string& name, const char* role) {
    auto it = column.find(name);
    if (it == column.end()) throw SchemaError(std::string(role) + " column '" + name + "' not found in panel header");
    return it->second;
  };

  const auto& cols = config.columns;
  const std::size_t id_col = require(cols.id, "id");
  std::optional<std::size_t> cluster_col;
  if (cols.cluster_column) cluster_col = require(*cols.cluster_column, "cluster");
  std::optional<std::size_t> manual_col;
  if (cols.manual_column) manual_col = require(*cols.manual_column, "manual");

  std::vector<std::string> diversify = cols.diversify;
  if (diversify.empty()) {
    for (const auto& name : header) {
      if (name == cols.id || (cols.cluster_column && name == *cols.cluster_column) ||
          (cols.manual_column && name == *cols.manual_column)) {
        continue;
      }
      diversify.push_back(name);
    }
  }
  std::vector<std::size_t> diversify_cols;
  for (const auto& name : diversify) diversify_cols.push_back(require(name, "diversification"));

  LoadedPanel out;
  Panel& panel = out.panel;
  for (const auto& name : diversify) panel.demographics.push_back(Demographic{name, {}});
  if (cols.cluster_column) panel.cluster = ClusterSpec{*cols.cluster_column, cols.cluster_value};

  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw ParseError("row " + std::to_string(r + 1) + ": expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(row.size()));
    }
    Participant p;
    p.id = row[id_col];
    if (!p.id.empty() && !seen.insert(p.id).second) throw DuplicateIdError("duplicate participant id '" + p.id + "'");
    for (std::size_t d = 0; d < diversify.size(); ++d) {
      const auto& value = row[diversify_cols[d]];
      if (value.empty()) continue;
      p.demographics[diversify[d]] = value;
      auto& values = panel.demographics[d].values;
      if (std::find(values.begin(), values.end(), value) == values.end()) values.push_back(value);
    }
    if (cluster_col && !row[*cluster_col].empty()) p.demographics[*cols.cluster_column] = row[*cluster_col];
    if (manual_col && !row[*manual_col].empty()) {
      p.manual_table = parse_positive_index(row[*manual_col], "row " + std::to_string(r + 1) + " manual table") - 1;
    }
    panel.participants.push_back(std::move(p));
  }

  for (const auto& [id, per_round] : config.manual_overrides) {
    auto it = std::find_if(panel.participants.begin(), panel.participants.end(),
                           [&](const Participant& p) { return p.id == id; });
    if (it == panel.participants.end()) throw SchemaError("manual override names unknown participant '" + id + "'");
    it->manual_overrides = per_round;
  }

  panel.derive_cluster_flags();
  out.issues = validate_panel(panel, config.run.num_tables);
  return out;
}

LoadedPanel load_panel(const std::filesystem::path& panel_file, const std::filesystem::path& config_file) {
  const auto config = parse_config(read_file(config_file));
  return load_panel_text(read_file(panel_file), config);
}

std::string write_panel(const Panel& panel, const ColumnSpec& columns, char delimiter) {
  Rows rows;
  std::vector<std::string> header{columns.id};
  for (const auto& d : panel.demographics) header.push_back(d.name);
  const bool cluster_separate =
      panel.cluster && std::none_of(panel.demographics.begin(), panel.demographics.end(),
                                    [&](const Demographic& d) { return d.name == panel.cluster->demographic; });
  if (cluster_separate) header.push_back(panel.cluster->demographic);
  if (columns.manual_column) header.push_back(*columns.manual_column);
  rows.push_back(header);

  for (const auto& p : panel.participants) {
    std::vector<std::string> row{p.id};
    const auto value_of = [&](const std::string& name) {
      auto it = p.demographics.find(name);
      return it == p.demographics.end() ? std::string() : it->second;
    };
    for (const auto& d : panel.demographics) row.push_back(value_of(d.name));
    if (cluster_separate) row.push_back(value_of(panel.cluster->demographic));
    if (columns.manual_column) row.push_back(p.manual_table ? std::to_string(*p.manual_table + 1) : std::string());
    rows.push_back(std::move(row));
  }
  return format_delimited(rows, delimiter);
}

// ---------------------------------------------------------------------------
// Allocations

std::string write_allocations(const AllocationPlan& plan, const EncodedPanel& panel, const TableLayout& layout) {
  Rows rows{{"round", "participant_id", "table", "is_cluster_table"}};
  for (int k = 0; k < plan.num_rounds(); ++k) {
    const auto& round = plan.rounds[static_cast<std::size_t>(k)];
    std::vector<int> order(static_cast<std::size_t>(panel.size()));
    for (int i = 0; i < panel.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto ta = round[static_cast<std::size_t>(a)];
      const auto tb = round[static_cast<std::size_t>(b)];
      return ta != tb ? ta < tb : panel.id(a) < panel.id(b);
    });
    for (int i : order) {
      const TableIndex t = round[static_cast<std::size_t>(i)];
      rows.push_back({std::to_string(k + 1), panel.id(i), std::to_string(t + 1),
                      layout.is_cluster_table(t) ? "true" : "false"});
    }
  }
  return format_delimited(rows, ',');
}

AllocationPlan read_allocations(std::string_view text, const EncodedPanel& panel) {
  const Rows rows = parse_delimited(text, ',');
  if (rows.empty()) throw ParseError("allocation file is empty");
  const auto& header = rows.front();
  const auto find = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError(std::string("allocation file lacks a '") + name + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t round_col = find("round");
  const std::size_t id_col = find("participant_id");
  const std::size_t table_col = find("table");

  AllocationPlan plan;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "allocation row " + std::to_string(r + 1);
    if (row.size() != header.size()) throw ParseError(where + ": wrong number of fields");
    const int round = parse_positive_index(row[round_col], where + " round");
    const int table = parse_positive_index(row[table_col], where + " table");
    const auto index = panel.index_of(row[id_col]);
    if (!index) throw InvalidInputError(where + ": unknown participant '" + row[id_col] + "'");
    while (plan.num_rounds() < round) plan.rounds.emplace_back(static_cast<std::size_t>(panel.size()), -1);
    auto& seat = plan.rounds[static_cast<std::size_t>(round - 1)][static_cast<std::size_t>(*index)];
    if (seat != -1) throw InvalidInputError(where + ": participant '" + row[id_col] + "' appears twice in round " + std::to_string(round));
    seat = table - 1;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

ordered_json bounds_to_json(const BoundsReport& b) {
  ordered_json j;
  j["pairs_total"] = b.pairs_total;
  j["meetings_per_round"] = b.meetings_per_round;
  j["min_repeats"] = b.min_repeats;
  j["min_repeats_exact"] = b.min_repeats_exact;
  j["num_rounds"] = b.num_rounds;
  j["min_unmet_pairs"] = b.min_unmet_pairs;
  j["max_first_meetings"] = b.max_first_meetings;
  return j;
}

}  // namespace

ordered_json report_to_json(const RunReport& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = r.config.rng_seed;
  j["config"] = run_config_to_json(r.config);
  j["num_participants"] = r.num_participants;
  j["demographics"] = r.demographics;
  j["table_sizes"] = r.table_sizes;
  ordered_json cluster_tables = ordered_json::array();
  for (TableIndex t : r.cluster_tables) cluster_tables.push_back(t + 1);
  j["cluster_tables"] = cluster_tables;
  j["mean_distance"] = r.mean_distance;
  j["per_round_balance"] = r.per_round_balance;
  j["geometric_score"] = r.geometric_score;
  j["meeting_curves"] = r.meeting_curves;
  j["meeting_histograms"] = r.meeting_histograms;
  j["bounds"] = bounds_to_json(r.bounds);
  j["pairs_met"] = r.pairs_met;
  j["unmet_pairs"] = r.unmet_pairs;
  j["excess"] = r.excess ? ordered_json(*r.excess) : ordered_json(nullptr);
  j["excess_note"] = r.excess ? ordered_json(nullptr) : ordered_json(r.excess_note);
  j["first_meeting_fraction"] = r.first_meeting_fraction ? ordered_json(*r.first_meeting_fraction) : ordered_json(nullptr);
  return j;
}

std::string write_report(const RunReport& report) { return report_to_json(report).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("error while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace groupopt
