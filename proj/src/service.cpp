#include "groupopt/service.hpp"

#include <algorithm>

#include <httplib.h>

#include "groupopt/allocator.hpp"

namespace groupopt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::pending: return "pending";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "failed";
}

Response json_response(int status, const ordered_json& body) { return {status, "application/json", body.dump(2) + "\n"}; }

Response error_response(int status, const std::string& message) {
  ordered_json body;
  body["error"] = message;
  return json_response(status, body);
}

ordered_json issues_json(const std::vector<ValidationIssue>& issues) {
  ordered_json out = ordered_json::array();
  for (const auto& i : issues) {
    out.push_back({{"severity", i.severity == Severity::error ? "error" : "warning"}, {"code", i.code}, {"message", i.message}});
  }
  return out;
}

std::optional<std::string> param(const std::multimap<std::string, std::string>& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

ConfigFile config_from_params(const std::multimap<std::string, std::string>& params) {
  ConfigFile file;
  if (auto v = param(params, "id")) file.columns.id = *v;
  if (auto v = param(params, "cluster_column")) file.columns.cluster_column = *v;
  if (auto v = param(params, "cluster_value")) file.columns.cluster_value = *v;
  if (auto v = param(params, "manual")) file.columns.manual_column = *v;
  if (auto v = param(params, "delimiter")) {
    if (*v == "tab" || *v == "\\t") {
      file.delimiter = '\t';
    } else if (v->size() == 1) {
      file.delimiter = (*v)[0];
    } else {
      throw SchemaError("delimiter must be a single character");
    }
  }
  return file;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

Service::~Service() { wait_idle(); }

void Service::wait_idle() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
}

Response Service::post_panel(const std::string& body, const std::string& content_type,
                             const std::multimap<std::string, std::string>& params) {
  if (body.empty()) return error_response(400, "request body is empty");
  auto stored = std::make_shared<StoredPanel>();
  std::vector<ValidationIssue> issues;
  try {
    std::string text = body;
    if (content_type.find("application/json") != std::string::npos) {
      json doc;
      try {
        doc = json::parse(body);
      } catch (const json::parse_error& e) {
        throw SchemaError(std::string("body is not valid JSON: ") + e.what());
      }
      if (!doc.is_object() || !doc.contains("csv") || !doc.at("csv").is_string()) {
        throw SchemaError("JSON body needs a string field 'csv'");
      }
      text = doc.at("csv").get<std::string>();
      if (doc.contains("config") && !doc.at("config").is_null()) stored->file = parse_config(doc.at("config").dump());
    } else {
      stored->file = config_from_params(params);
    }
    auto loaded = load_panel_text(text, stored->file);
    stored->panel = std::move(loaded.panel);
    issues = std::move(loaded.issues);
  } catch (const Error& e) {
    ordered_json out;
    out["error"] = e.what();
    out["issues"] = issues_json({ValidationIssue{Severity::error, "parse_error", e.what()}});
    return json_response(400, out);
  }

  const int n = static_cast<int>(stored->panel.participants.size());
  const int tables = n > 0 ? default_table_count(n) : 1;
  for (auto& issue : validate_panel(stored->panel, tables)) {
    const bool seen = std::any_of(issues.begin(), issues.end(), [&](const ValidationIssue& i) {
      return i.code == issue.code && i.message == issue.message;
    });
    if (!seen) issues.push_back(std::move(issue));
  }
  if (has_errors(issues)) {
    ordered_json out;
    out["error"] = "panel failed validation";
    out["issues"] = issues_json(issues);
    return json_response(400, out);
  }

  ordered_json suggestions;
  suggestions["num_tables"] = tables;
  try {
    RunConfig probe;
    probe.num_tables = tables;
    const auto s = suggest_cluster_tables(stored->panel, probe);
    suggestions["minimum"] = s.minimum;
    suggestions["recommended"] = s.recommended;
  } catch (const Error&) {
    suggestions["minimum"] = nullptr;
    suggestions["recommended"] = nullptr;
  }

  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "panel-" + std::to_string(next_panel_++);
    panels_[id] = stored;
  }
  ordered_json out;
  out["panel_id"] = id;
  out["num_participants"] = n;
  out["demographics"] = ordered_json::array();
  for (const auto& d : stored->panel.demographics) out["demographics"].push_back({{"name", d.name}, {"values", d.values}});
  out["cluster_count"] = stored->panel.cluster_count();
  out["issues"] = issues_json(issues);
  out["suggestions"] = suggestions;
  return json_response(201, out);
}

std::shared_ptr<const RunRecord> Service::execute(const std::string& run_id, const std::string& panel_id,
                                                  const StoredPanel& stored, const RunConfig& config) const {
  auto record = std::make_shared<RunRecord>();
  record->run_id = run_id;
  record->panel_id = panel_id;
  record->config = config;
  try {
    const auto layout = validate_config(stored.panel, config);
    const EncodedPanel encoded(stored.panel);
    const auto result = run(encoded, layout, config);
    record->report_json = write_report(build_report(result.plan, encoded, layout, config));
    record->allocations_csv = write_allocations(result.plan, encoded, layout);
    record->status = RunStatus::done;
    if (options_.spool_dir) {
      const auto dir = *options_.spool_dir / run_id;
      std::filesystem::create_directories(dir);
      write_file_atomic(dir / "report.json", record->report_json);
      write_file_atomic(dir / "allocations.csv", record->allocations_csv);
    }
  } catch (const std::exception& e) {
    record->status = RunStatus::failed;
    record->error = e.what();
  }
  return record;
}

void Service::store(std::shared_ptr<const RunRecord> record) {
  std::lock_guard lock(mutex_);
  runs_[record->run_id] = std::move(record);
}

Response Service::post_run(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("body is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("panel_id") || !doc.at("panel_id").is_string()) {
    return error_response(400, "body needs a string field 'panel_id'");
  }
  const auto panel_id = doc.at("panel_id").get<std::string>();
  std::shared_ptr<const StoredPanel> stored;
  {
    std::lock_guard lock(mutex_);
    const auto it = panels_.find(panel_id);
    if (it != panels_.end()) stored = it->second;
  }
  if (!stored) return error_response(404, "unknown panel '" + panel_id + "'");

  RunConfig config;
  try {
    config = run_config_from_json(doc.value("config", json::object()), stored->file.run);
  } catch (const std::exception& e) {
    return error_response(400, std::string("malformed config: ") + e.what());
  }
  try {
    (void)validate_config(stored->panel, config);
  } catch (const ConfigError& e) {
    ordered_json out;
    out["error"] = e.what();
    out["kind"] = e.kind();
    if (e.has_suggestion()) {
      out["suggestion"] = {{"minimum", e.suggestion().minimum}, {"recommended", e.suggestion().recommended}};
    } else {
      out["suggestion"] = nullptr;
    }
    return json_response(422, out);
  } catch (const Error& e) {
    ordered_json out;
    out["error"] = e.what();
    out["kind"] = "InfeasibleError";
    out["suggestion"] = nullptr;
    return json_response(422, out);
  }

  const bool async = doc.value("async", false);
  std::string run_id;
  {
    std::lock_guard lock(mutex_);
    run_id = "run-" + std::to_string(next_run_++);
    auto pending = std::make_shared<RunRecord>();
    pending->run_id = run_id;
    pending->panel_id = panel_id;
    pending->config = config;
    runs_[run_id] = pending;
  }
  if (async) {
    std::lock_guard lock(mutex_);
    workers_.emplace_back([this, run_id, panel_id, stored, config] {
      if (options_.before_async_run) options_.before_async_run(run_id);
      store(execute(run_id, panel_id, *stored, config));
    });
  } else {
    store(execute(run_id, panel_id, *stored, config));
  }
  const auto record = find_run(run_id);
  ordered_json out;
  out["run_id"] = run_id;
  out["status"] = status_name(record->status);
  return json_response(201, out);
}

std::shared_ptr<const RunRecord> Service::find_run(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  const auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : it->second;
}

Response Service::get_run(const std::string& run_id) const {
  const auto record = find_run(run_id);
  if (!record) return error_response(404, "unknown run '" + run_id + "'");
  ordered_json out;
  out["run_id"] = record->run_id;
  out["panel_id"] = record->panel_id;
  out["status"] = status_name(record->status);
  out["config"] = run_config_to_json(record->config);
  if (record->status == RunStatus::done) out["report"] = ordered_json::parse(record->report_json);
  if (record->status == RunStatus::failed) out["error"] = record->error;
  return json_response(200, out);
}

Response Service::get_allocations(const std::string& run_id, const std::string& accept) const {
  const auto record = find_run(run_id);
  if (!record) return error_response(404, "unknown run '" + run_id + "'");
  if (record->status != RunStatus::done) {
    return error_response(409, "run '" + run_id + "' is " + status_name(record->status));
  }
  if (accept.find("application/json") == std::string::npos) return {200, "text/csv", record->allocations_csv};

  const auto rows = parse_delimited(record->allocations_csv);
  ordered_json out;
  out["run_id"] = run_id;
  out["allocations"] = ordered_json::array();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    out["allocations"].push_back({{"round", std::stoi(row[0])},
                                  {"participant_id", row[1]},
                                  {"table", std::stoi(row[2])},
                                  {"is_cluster_table", row[3] == "true" || row[3] == "1"}});
  }
  return json_response(200, out);
}

void Service::register_routes(httplib::Server& server) {
  const auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Post("/api/panels", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    send(res, post_panel(req.body, req.get_header_value("Content-Type"), params));
  });
  server.Post("/api/runs", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_run(req.body));
  });
  server.Get(R"(/api/runs/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_run(req.matches[1]));
  });
  server.Get(R"(/api/runs/([^/]+)/allocations)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_allocations(req.matches[1], req.get_header_value("Accept")));
  });
}

}  // namespace groupopt
