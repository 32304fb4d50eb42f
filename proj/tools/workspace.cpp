#include "workspace.hpp"

#include <fstream>

#include "emview/csv.hpp"
#include "emview/error.hpp"
#include "json.hpp"

namespace emview::cli {

using nlohmann::json;

namespace {

constexpr const char* kConfigFile = "workspace.json";

json to_json(const ViewInfo& v) {
  json j{{"model", v.model}, {"table", v.table}, {"components", v.components},
         {"iterations", v.iterations}, {"seed", v.seed}};
  if (v.epsilon) j["epsilon"] = *v.epsilon;
  return j;
}

ViewInfo view_from_json(const json& j) {
  ViewInfo v;
  v.model = j.at("model").get<std::string>();
  v.table = j.at("table").get<std::string>();
  v.components = j.value("components", std::size_t{2});
  v.iterations = j.value("iterations", std::int64_t{10});
  v.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("epsilon")) v.epsilon = j.at("epsilon").get<double>();
  return v;
}

json to_json(const maint::MaintenanceConfig& c) {
  return json{{"view", c.view},
              {"strategy", std::string(maint::to_string(c.policy.strategy))},
              {"radius", c.policy.radius},
              {"budget", c.policy.budget},
              {"passes", c.passes},
              {"seed", c.seed},
              {"variance_floor", c.variance_floor},
              {"precompute", c.precompute}};
}

maint::MaintenanceConfig binding_from_json(const std::string& table, const json& j) {
  maint::MaintenanceConfig c;
  c.table = table;
  c.view = j.at("view").get<std::string>();
  c.policy.strategy = maint::strategy_from_string(j.value("strategy", std::string("entropy")));
  c.policy.radius = j.value("radius", 3.0);
  c.policy.budget = j.value("budget", std::size_t{0});
  c.passes = j.value("passes", std::size_t{0});
  c.seed = j.value("seed", std::uint64_t{1});
  c.variance_floor = j.value("variance_floor", 1e-12);
  c.precompute = j.value("precompute", true);
  return c;
}

const json& section(const json& j, const char* name) {
  static const json empty = json::object();
  auto it = j.find(name);
  return it == j.end() ? empty : *it;
}

void check_file(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) fail(ErrorCode::IoError, "workspace file missing: " + p.string());
}

}  // namespace

Workspace::Workspace(std::filesystem::path dir) : dir_(std::move(dir)) {
  const auto config = dir_ / kConfigFile;
  if (!std::filesystem::exists(config)) return;
  std::ifstream in(config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, config.string() + ": " + e.what());
  }
  try {
    for (const auto& [name, path] : section(j, "tables").items()) {
      tables_[name] = path.get<std::string>();
      check_file(resolve(tables_[name]));
    }
    for (const auto& [name, v] : section(j, "views").items()) {
      views_[name] = {view_from_json(v), v.at("path").get<std::string>()};
      check_file(resolve(views_[name].second));
    }
    for (const auto& [name, path] : section(j, "stats").items()) {
      stats_[name] = path.get<std::string>();
      check_file(resolve(stats_[name]));
    }
    for (const auto& [table, b] : section(j, "triggers").items()) {
      bindings_[table] = binding_from_json(table, b);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, config.string() + ": " + e.what());
  }
}

Relation Workspace::table(const std::string& name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) fail(ErrorCode::UnknownRelation, "no table '" + name + "' in the workspace");
  return read_csv_file(resolve(it->second)).with_name(name);
}

Relation Workspace::view(const std::string& name) const {
  auto it = views_.find(name);
  if (it == views_.end()) fail(ErrorCode::UnknownRelation, "no view '" + name + "' in the workspace");
  return read_csv_file(resolve(it->second.second)).with_name(name);
}

const ViewInfo& Workspace::view_info(const std::string& name) const {
  auto it = views_.find(name);
  if (it == views_.end()) fail(ErrorCode::UnknownRelation, "no view '" + name + "' in the workspace");
  return it->second.first;
}

void Workspace::store_table(const std::string& name, const Relation& rel) {
  if (views_.contains(name)) fail(ErrorCode::InvalidArgument, "'" + name + "' is already a view");
  tables_[name] = "tables/" + name + ".csv";
  std::filesystem::create_directories(dir_ / "tables");
  write_csv_file(resolve(tables_[name]), rel);
}

void Workspace::store_view(const std::string& name, const ViewInfo& info, const Relation& rel) {
  if (tables_.contains(name)) fail(ErrorCode::InvalidArgument, "'" + name + "' is already a table");
  views_[name] = {info, "views/" + name + ".csv"};
  std::filesystem::create_directories(dir_ / "views");
  write_csv_file(resolve(views_[name].second), rel);
  // A retrained view invalidates maintained statistics.
  if (auto it = stats_.find(name); it != stats_.end()) {
    std::filesystem::remove(resolve(it->second));
    stats_.erase(it);
  }
}

void Workspace::bind(const maint::MaintenanceConfig& cfg) {
  if (!tables_.contains(cfg.table)) fail(ErrorCode::UnknownRelation, "no table '" + cfg.table + "' in the workspace");
  const ViewInfo& info = view_info(cfg.view);
  if (info.model != "gmm") {
    fail(ErrorCode::InvalidArgument, "maintenance supports gmm views only; '" + cfg.view + "' is " + info.model);
  }
  bindings_[cfg.table] = cfg;
}

void Workspace::load_into(Database& db) const {
  for (const auto& [name, path] : tables_) db.create_table(name, table(name));
  for (const auto& [name, v] : views_) db.put(name, view(name));
  for (const auto& [name, path] : stats_) db.put(name + "_stats", read_csv_file(resolve(path)));
}

void Workspace::sync_from(const Database& db) {
  for (const auto& [name, path] : tables_) {
    if (db.has(name)) write_csv_file(resolve(path), db.get(name));
  }
  for (const auto& [name, v] : views_) {
    if (db.has(name)) write_csv_file(resolve(v.second), db.get(name));
    const std::string stats_name = name + "_stats";
    if (db.has(stats_name)) {
      stats_[name] = "views/" + stats_name + ".csv";
      write_csv_file(resolve(stats_[name]), db.get(stats_name));
    }
  }
}

void Workspace::save() const {
  json j;
  j["tables"] = json::object();
  for (const auto& [name, path] : tables_) j["tables"][name] = path;
  j["views"] = json::object();
  for (const auto& [name, v] : views_) {
    json vj = to_json(v.first);
    vj["path"] = v.second;
    j["views"][name] = vj;
  }
  j["stats"] = json::object();
  for (const auto& [name, path] : stats_) j["stats"][name] = path;
  j["triggers"] = json::object();
  for (const auto& [table, b] : bindings_) j["triggers"][table] = to_json(b);
  std::filesystem::create_directories(dir_);
  std::ofstream out(dir_ / kConfigFile);
  if (!out) fail(ErrorCode::IoError, "cannot write " + (dir_ / kConfigFile).string());
  out << j.dump(2) << "\n";
}

}  // namespace emview::cli
