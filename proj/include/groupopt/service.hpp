#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "groupopt/io.hpp"

namespace httplib {
class Server;
}

namespace groupopt {

struct ServiceOptions {
  /// When set, finished runs also land in <spool_dir>/<run id>/.
  std::optional<std::filesystem::path> spool_dir;
  /// Called on the worker thread before an asynchronous run starts.
  std::function<void(const std::string& run_id)> before_async_run;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

enum class RunStatus { pending, done, failed };

struct RunRecord {
  std::string run_id;
  std::string panel_id;
  RunStatus status = RunStatus::pending;
  RunConfig config;
  std::string report_json;  // serialized report when done
  std::string allocations_csv;
  std::string error;
};

/// In-memory panel and run store behind the JSON API. Handlers are safe to
/// call concurrently.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// JSON body {"csv": ..., "config": {...}} or raw delimited text. Raw text
  /// reads the query parameters id, cluster_column, cluster_value, manual and
  /// delimiter.
  Response post_panel(const std::string& body, const std::string& content_type,
                      const std::multimap<std::string, std::string>& params = {});
  /// JSON body {"panel_id": ..., "config": {...}, "async": false}.
  Response post_run(const std::string& body);
  Response get_run(const std::string& run_id) const;
  /// CSV unless `accept` asks for application/json.
  Response get_allocations(const std::string& run_id, const std::string& accept) const;

  /// Blocks until every asynchronous run has finished.
  void wait_idle();

  void register_routes(httplib::Server& server);

 private:
  struct StoredPanel {
    ConfigFile file;
    Panel panel;
  };

  std::shared_ptr<const RunRecord> find_run(const std::string& run_id) const;
  std::shared_ptr<const RunRecord> execute(const std::string& run_id, const std::string& panel_id,
                                           const StoredPanel& panel, const RunConfig& config) const;
  void store(std::shared_ptr<const RunRecord> record);

  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const StoredPanel>> panels_;
  std::map<std::string, std::shared_ptr<const RunRecord>> runs_;
  int next_panel_ = 1;
  int next_run_ = 1;
  std::vector<std::thread> workers_;
};

}  // namespace groupopt
