#include <cstdio>

#include "netzero/error.hpp"
#include "netzero/service.hpp"

namespace netzero {

const char* to_string(JobKind k) {
  switch (k) {
    case JobKind::ingest: return "ingest";
    case JobKind::impute: return "impute";
    case JobKind::retrain: return "retrain";
    case JobKind::forecast: return "forecast";
  }
  return "?";
}

const char* to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "?";
}

nlohmann::json to_json(const JobRecord& j) {
  return {{"job_id", j.job_id},
          {"kind", to_string(j.kind)},
          {"state", to_string(j.state)},
          {"detail", j.detail},
          {"facility_id", j.facility_id},
          {"result", j.result}};
}

JobQueue::JobQueue() : worker_([this] { run(); }) {}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
}

std::string JobQueue::submit(JobKind kind, FacilityId facility, std::string detail, Work work) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(next_id_++));
    id = buf;
    jobs_[id] = JobRecord{id, kind, JobState::queued, std::move(detail), std::move(facility), nullptr};
    pending_.emplace_back(id, std::move(work));
  }
  cv_.notify_all();
  return id;
}

std::optional<JobRecord> JobQueue::get(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void JobQueue::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return pending_.empty() && !running_job_; });
}

void JobQueue::run() {
  std::unique_lock lock(mutex_);
  for (;;) {
    cv_.wait(lock, [&] { return stop_ || !pending_.empty(); });
    if (stop_) return;
    auto [id, work] = std::move(pending_.front());
    pending_.pop_front();
    running_job_ = true;
    JobRecord snapshot = jobs_[id];
    snapshot.state = JobState::running;
    jobs_[id].state = JobState::running;
    lock.unlock();

    nlohmann::json result;
    JobState final_state = JobState::done;
    std::string detail = snapshot.detail;
    try {
      result = work(snapshot);
      detail = snapshot.detail;
    } catch (const Error& e) {
      final_state = JobState::failed;
      detail = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      final_state = JobState::failed;
      detail = e.what();
    }

    lock.lock();
    auto& rec = jobs_[id];
    rec.state = final_state;
    rec.detail = std::move(detail);
    rec.result = std::move(result);
    running_job_ = false;
    if (pending_.empty()) idle_cv_.notify_all();
  }
}

}  // namespace netzero
