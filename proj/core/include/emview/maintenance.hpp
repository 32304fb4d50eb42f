#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emview/database.hpp"
#include "emview/em/params.hpp"
#include "emview/relation.hpp"

namespace emview::maint {

struct ComponentStats {
  std::int64_t k = 0;
  double nk = 0.0;
  DenseVector s1;
  DenseMatrix s2;
};

/// Per-component responsibility mass, Σ p·x and Σ p·x·xᵀ, plus the point count.
struct SuffStats {
  std::vector<ComponentStats> components;
  double n = 0.0;

  std::size_t size() const { return components.size(); }
  std::size_t dim() const { return components.empty() ? 0 : components.front().s1.size(); }

  /// (k, nk, s1, s2, n), keyed by k.
  Relation to_relation() const;
  static SuffStats from_relation(const Relation& r);
};

/// E-step of `params` over the points, accumulated.
SuffStats stats_from_model(const em::GmmParams& params, const em::Dataset& data);
SuffStats stats_from_model(const em::GmmParams& params, const Relation& data);
/// Accumulates given responsibilities R(id, k, p) instead of recomputing them.
SuffStats stats_from_model(const em::GmmParams& params, const Relation& data, const Relation& responsibilities);

/// μ_k = s1_k/n_k, π_k = n_k/n, σ_k = s2_k/n_k − μ_k μ_kᵀ with the diagonal floored
/// at `variance_floor`. A component whose mass is at most 1e-9·n keeps its
/// mean and covariance from `previous` with π_k = 0; without `previous` that
/// throws EmptyComponent, as does a mass below −1e-6·n.
em::GmmParams params_from_stats(const SuffStats& s, const em::GmmParams* previous = nullptr,
                                double variance_floor = 1e-12);

enum class Strategy { Distance, Entropy };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct SelectionPolicy {
  Strategy strategy = Strategy::Entropy;
  double radius = 3.0;
  std::size_t budget = 0;
};

/// Points with unstable membership, most ambiguous (highest posterior entropy)
/// first, at most `budget` of them. Distance keeps a point unless exactly one
/// component has D_k(x) <= radius.
Relation select_retain_set(const Relation& data, const em::GmmParams& params, const SelectionPolicy& policy);

struct UpdateResult {
  em::GmmParams params;
  SuffStats stats;
};

struct UpdateOptions {
  std::size_t passes = 0;
  std::uint64_t seed = 1;
  double variance_floor = 1e-12;
};

/// MODEL_UPDATE: adds the inserted points under the current parameters,
/// refreshes the parameters, then runs `passes` shuffled passes over
/// `x_prime`, replacing each point's previous contribution and refreshing
/// after every point.
UpdateResult model_update(const em::GmmParams& params, const SuffStats& s, const Relation& x_prime,
                          const Relation& inserted, const UpdateOptions& opts);
/// Same refinement after subtracting the deleted points' contributions.
UpdateResult model_downdate(const em::GmmParams& params, const SuffStats& s, const Relation& deleted,
                            const Relation& x_prime, const UpdateOptions& opts);

struct MaintenanceConfig {
  std::string table;
  std::string view;
  SelectionPolicy policy;
  std::size_t passes = 0;
  std::uint64_t seed = 1;
  double variance_floor = 1e-12;
  /// Keep the statistics between statements (persisted as "<view>_stats",
  /// and picked up from there when attaching) instead of recomputing them
  /// from the table before each one.
  bool precompute = true;
};

struct MaintenanceReport {
  TriggerEvent event = TriggerEvent::Insert;
  std::size_t changed_rows = 0;
  /// Size of X′: retained plus incoming rows.
  std::size_t staged_rows = 0;
  double millis = 0.0;
  double log_likelihood = 0.0;
};

/// T1/T2/T3 on insert plus the delete counterparts, bound to one table and view.
class TriggerSet {
 public:
  TriggerSet(Database& db, MaintenanceConfig cfg);
  ~TriggerSet();
  TriggerSet(const TriggerSet&) = delete;
  TriggerSet& operator=(const TriggerSet&) = delete;

  const MaintenanceConfig& config() const { return cfg_; }
  std::vector<std::string> trigger_names() const;
  /// Rows staged in X′; empty between statements.
  std::size_t staged() const;
  std::optional<MaintenanceReport> last_report() const;
  std::string stats_table() const { return cfg_.view + "_stats"; }
  void detach();

 private:
  struct State;
  Database* db_;
  MaintenanceConfig cfg_;
  std::shared_ptr<State> state_;
  bool attached_ = false;
};

/// Installs the triggers; the view must hold GMM parameters matching the table's x.
std::unique_ptr<TriggerSet> attach_triggers(Database& db, MaintenanceConfig cfg);

}  // namespace emview::maint
