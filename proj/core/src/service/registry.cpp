#include <algorithm>

#include "netzero/error.hpp"
#include "netzero/json_io.hpp"
#include "netzero/service.hpp"

namespace fs = std::filesystem;

namespace netzero {

const char* to_string(EntryStatus s) { return s == EntryStatus::active ? "active" : "superseded"; }

json to_json(const ModelRegistryEntry& e, bool include_model) {
  json j = {{"facility_id", e.facility_id},
            {"task", to_string(e.task)},
            {"month", e.month.to_string()},
            {"version", e.version},
            {"created_at", e.created_at},
            {"spec", to_json(e.model.spec)},
            {"report", to_json(e.report)}};
  if (include_model) j["model"] = to_json(e.model);
  return j;
}

ModelRegistryEntry registry_entry_from_json(const json& j) {
  try {
    ModelRegistryEntry e;
    e.facility_id = j.at("facility_id").get<std::string>();
    e.task = parse_task(j.at("task").get<std::string>());
    e.month = YearMonth::parse(j.at("month").get<std::string>());
    e.version = j.at("version").get<int>();
    e.created_at = j.at("created_at").get<std::string>();
    e.model = trained_model_from_json(j.at("model"));
    e.report = selection_report_from_json(j.at("report"));
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorKind::schema, std::string("malformed registry entry: ") + ex.what());
  }
}

namespace {

fs::path entry_path(const fs::path& dir, const ModelRegistryEntry& e) {
  return dir / "entries" / e.facility_id / to_string(e.task) / e.month.to_string() /
         ("v" + std::to_string(e.version) + ".json");
}

}  // namespace

ModelRegistry::ModelRegistry(fs::path dir) : dir_(std::move(dir)) {
  auto snap = std::make_shared<Snapshot>();
  const fs::path entries = *dir_ / "entries";
  if (fs::exists(entries)) {
    std::vector<fs::path> files;
    for (const auto& f : fs::recursive_directory_iterator(entries)) {
      if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto e = std::make_shared<const ModelRegistryEntry>(registry_entry_from_json(parse_json(read_file(f))));
      snap->versions[{e->facility_id, e->task, e->month}].push_back(e);
    }
    for (auto& [key, list] : snap->versions) {
      std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a->version < b->version; });
    }
  }
  const fs::path index = *dir_ / "index.json";
  if (fs::exists(index)) {
    const json j = parse_json(read_file(index));
    for (const auto& a : j.at("active")) {
      Key key{a.at("facility_id").get<std::string>(), parse_task(a.at("task").get<std::string>()),
              YearMonth::parse(a.at("month").get<std::string>())};
      const int version = a.at("version").get<int>();
      auto it = snap->versions.find(key);
      if (it == snap->versions.end()) fail(ErrorKind::schema, "registry index names a missing entry");
      auto e = std::find_if(it->second.begin(), it->second.end(), [&](const auto& x) { return x->version == version; });
      if (e == it->second.end()) fail(ErrorKind::schema, "registry index names a missing version");
      snap->active[key] = *e;
    }
  } else {
    fs::create_directories(*dir_);
  }
  snapshot_ = std::move(snap);
}

std::shared_ptr<const ModelRegistry::Snapshot> ModelRegistry::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void ModelRegistry::persist_entry(const ModelRegistryEntry& e) const {
  if (!dir_) return;
  const auto path = entry_path(*dir_, e);
  fs::create_directories(path.parent_path());
  write_file_atomic(path, to_json(e, true).dump() + "\n");
}

void ModelRegistry::persist_index(const Snapshot& s) const {
  if (!dir_) return;
  json active = json::array();
  for (const auto& [key, e] : s.active) {
    active.push_back({{"facility_id", key.facility_id},
                      {"task", to_string(key.task)},
                      {"month", key.month.to_string()},
                      {"version", e->version}});
  }
  write_file_atomic(*dir_ / "index.json", json{{"active", active}}.dump(2) + "\n");
}

std::vector<std::shared_ptr<const ModelRegistryEntry>> ModelRegistry::activate(std::vector<ModelRegistryEntry> entries) {
  std::lock_guard write(write_mutex_);
  auto next = std::make_shared<Snapshot>(*snapshot());
  std::vector<std::shared_ptr<const ModelRegistryEntry>> added;
  for (auto& e : entries) {
    const Key key{e.facility_id, e.task, e.month};
    auto& list = next->versions[key];
    e.version = list.empty() ? 1 : list.back()->version + 1;
    persist_entry(e);
    auto ptr = std::make_shared<const ModelRegistryEntry>(std::move(e));
    list.push_back(ptr);
    next->active[key] = ptr;
    added.push_back(ptr);
  }
  persist_index(*next);
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(next);
  return added;
}

std::optional<ModelPair> ModelRegistry::active_pair(std::string_view facility, YearMonth month, bool allow_stale) const {
  const auto snap = snapshot();
  auto find = [&](Task task, YearMonth m) -> std::shared_ptr<const ModelRegistryEntry> {
    auto it = snap->active.find(Key{std::string(facility), task, m});
    return it == snap->active.end() ? nullptr : it->second;
  };
  auto pair_for = [&](YearMonth m) -> std::optional<ModelPair> {
    auto occ = find(Task::occupancy, m);
    auto dem = find(Task::demand, m);
    if (!occ || !dem) return std::nullopt;
    return ModelPair{occ->model, dem->model, m};
  };
  if (auto exact = pair_for(month)) return exact;
  if (!allow_stale) return std::nullopt;
  std::optional<YearMonth> best;
  for (const auto& [key, e] : snap->active) {
    if (key.facility_id != facility || key.month > month) continue;
    if (pair_for(key.month) && (!best || key.month > *best)) best = key.month;
  }
  return best ? pair_for(*best) : std::nullopt;
}

}  // namespace netzero
