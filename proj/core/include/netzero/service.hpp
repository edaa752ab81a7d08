#pragma once

// HTTP/JSON application layer: model registry, retrain job queue, forecast
// bundle store and request routing. The routing core (Service::handle) is
// transport-free; HttpServer binds it to a socket.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "netzero/datastore.hpp"
#include "netzero/error.hpp"
#include "netzero/finance.hpp"
#include "netzero/forecast.hpp"
#include "netzero/modelsel.hpp"

namespace netzero {

// ---------------------------------------------------------------------------
// Configuration

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path data_dir = "netzero-data";
  std::vector<FacilityConfig> facilities;
  std::optional<std::filesystem::path> ui_dir;
  unsigned selection_threads = 0;
};

/// Reads the JSON config file. NETZERO_LISTEN ("host:port") and
/// NETZERO_DATA_DIR override the file when set.
ServiceConfig load_service_config(const std::filesystem::path& path);
ServiceConfig service_config_from_json(const nlohmann::json& j);
/// Applies NETZERO_LISTEN / NETZERO_DATA_DIR from the environment.
void apply_env_overrides(ServiceConfig& config);
std::pair<std::string, int> parse_listen(std::string_view text);

// ---------------------------------------------------------------------------
// Model registry

enum class EntryStatus { active, superseded };
const char* to_string(EntryStatus s);

struct ModelRegistryEntry {
  FacilityId facility_id;
  Task task = Task::demand;
  YearMonth month;
  int version = 1;  // 1, 2, ... per (facility, task, month)
  std::string created_at;
  TrainedModel model;
  ModelSelectionReport report;
};

/// Stores every trained model and tracks which one is active per
/// (facility, task, month). Readers get immutable snapshots; activations
/// replace the snapshot in one step, so a reader sees either all or none of
/// a multi-entry activation.
class ModelRegistry {
 public:
  struct Key {
    FacilityId facility_id;
    Task task;
    YearMonth month;
    auto operator<=>(const Key&) const = default;
  };
  struct Snapshot {
    std::map<Key, std::vector<std::shared_ptr<const ModelRegistryEntry>>> versions;
    std::map<Key, std::shared_ptr<const ModelRegistryEntry>> active;
  };

  ModelRegistry() = default;
  /// Loads (or initialises) `dir`.
  explicit ModelRegistry(std::filesystem::path dir);

  /// Adds the entries and makes them active together. Versions are assigned
  /// here; the returned entries carry them.
  std::vector<std::shared_ptr<const ModelRegistryEntry>> activate(std::vector<ModelRegistryEntry> entries);

  std::shared_ptr<const Snapshot> snapshot() const;

  /// The active (occupancy, demand) pair for exactly `month`, or, when
  /// `allow_stale`, for the latest month <= `month` holding both.
  /// Both members come from the same snapshot.
  std::optional<ModelPair> active_pair(std::string_view facility, YearMonth month, bool allow_stale) const;

 private:
  void persist_entry(const ModelRegistryEntry& e) const;
  void persist_index(const Snapshot& s) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;  // guards the pointer swap only
  std::mutex write_mutex_;    // serialises activations
  std::shared_ptr<const Snapshot> snapshot_ = std::make_shared<Snapshot>();
};

nlohmann::json to_json(const ModelRegistryEntry& e, bool include_model);
ModelRegistryEntry registry_entry_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Jobs

enum class JobKind { ingest, impute, retrain, forecast };
enum class JobState { queued, running, done, failed };
const char* to_string(JobKind k);
const char* to_string(JobState s);

struct JobRecord {
  std::string job_id;
  JobKind kind = JobKind::retrain;
  JobState state = JobState::queued;
  std::string detail;
  FacilityId facility_id;
  nlohmann::json result;  // null until done
};

nlohmann::json to_json(const JobRecord& j);

/// FIFO of background jobs run by one worker thread, which also serialises
/// long-running writes across facilities.
class JobQueue {
 public:
  using Work = std::function<nlohmann::json(JobRecord&)>;

  JobQueue();
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(JobKind kind, FacilityId facility, std::string detail, Work work);
  std::optional<JobRecord> get(std::string_view id) const;
  /// Blocks until every submitted job has finished.
  void wait_idle();

 private:
  void run();

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, JobRecord, std::less<>> jobs_;
  std::deque<std::pair<std::string, Work>> pending_;
  std::uint64_t next_id_ = 1;
  bool running_job_ = false;
  bool stop_ = false;
  std::jthread worker_;
};

// ---------------------------------------------------------------------------
// Forecast bundles

/// Forecast bundles per (facility, month). Each distinct bundle is kept as
/// an immutable numbered version on disk; the newest is served. A bundle
/// that only differs from the newest in generated_at is not stored again.
class BundleStore {
 public:
  BundleStore() = default;
  explicit BundleStore(std::filesystem::path dir);

  /// Returns the stored bundle, which is the existing one when the content
  /// is unchanged.
  ForecastBundle put(const ForecastBundle& bundle);
  std::optional<ForecastBundle> get(std::string_view facility, YearMonth month) const;
  /// Number of stored versions for (facility, month).
  int versions(std::string_view facility, YearMonth month) const;

 private:
  struct Slot {
    int version = 0;
    ForecastBundle latest;
  };
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::pair<FacilityId, YearMonth>, Slot> bundles_;
};

// ---------------------------------------------------------------------------
// Request routing

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

int http_status(ErrorKind kind);

// Response payloads shared by the service endpoints and the CLI --json mode.

nlohmann::json whatif_payload(const FacilityConfig& facility, std::optional<YearMonth> month, double forecast_kwh,
                              const Rates& rates, std::span<const std::int64_t> grid, double risk_margin);
/// One KpiRow per invoiced month in [from, to] plus their kpi_summary.
/// Throws Error(precondition) when no month in range has an invoice.
nlohmann::json kpi_payload(const FacilityView& view, YearMonth from, YearMonth to);
nlohmann::json retrain_table_payload(const ModelSelectionReport& report);
nlohmann::json error_payload(ErrorKind kind, std::string_view message);

class Service {
 public:
  using Clock = std::function<std::string()>;

  /// Opens `config.data_dir` (store/, registry/, bundles/) and registers the
  /// configured facilities. An empty data_dir keeps everything in memory.
  explicit Service(ServiceConfig config, Clock clock = {});
  ~Service();

  HttpResponse handle(const HttpRequest& request);

  Store& store() { return *store_; }
  ModelRegistry& registry() { return *registry_; }
  BundleStore& bundles() { return *bundles_; }
  JobQueue& jobs() { return jobs_; }
  const ServiceConfig& config() const { return config_; }
  std::string now() const { return clock_(); }

 private:
  HttpResponse route(const HttpRequest& request);

  ServiceConfig config_;
  Clock clock_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<ModelRegistry> registry_;
  std::unique_ptr<BundleStore> bundles_;
  JobQueue jobs_;
};

/// Binds a Service to an HTTP listener.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds and starts serving on a background thread. Port 0 picks a free
  /// port. Returns the bound port. Throws Error(precondition) on failure.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop() is called.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace netzero
