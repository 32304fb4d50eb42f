#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "emview/database.hpp"
#include "emview/maintenance.hpp"
#include "emview/relation.hpp"

namespace emview::cli {

struct ViewInfo {
  std::string model;  // gmm, mlr or moe
  std::string table;
  std::size_t components = 2;
  std::int64_t iterations = 10;
  std::uint64_t seed = 1;
  std::optional<double> epsilon;
};

/// A directory holding workspace.json plus one CSV per table, view and
/// statistics relation.
class Workspace {
 public:
  /// Opens `dir`, creating an empty workspace when it has no workspace.json.
  explicit Workspace(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  bool has_table(const std::string& name) const { return tables_.contains(name); }
  bool has_view(const std::string& name) const { return views_.contains(name); }
  Relation table(const std::string& name) const;
  Relation view(const std::string& name) const;
  const ViewInfo& view_info(const std::string& name) const;
  const std::map<std::string, maint::MaintenanceConfig>& bindings() const { return bindings_; }

  void store_table(const std::string& name, const Relation& rel);
  void store_view(const std::string& name, const ViewInfo& info, const Relation& rel);
  void bind(const maint::MaintenanceConfig& cfg);

  /// Every table, view and statistics relation, loaded into a fresh database.
  void load_into(Database& db) const;
  /// Writes back the relations of `db` that the workspace tracks.
  void sync_from(const Database& db);

  void save() const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> tables_;
  std::map<std::string, std::pair<ViewInfo, std::string>> views_;
  std::map<std::string, std::string> stats_;
  std::map<std::string, maint::MaintenanceConfig> bindings_;

  std::filesystem::path resolve(const std::string& rel) const { return dir_ / rel; }
};

}  // namespace emview::cli
