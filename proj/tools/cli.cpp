#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "emview/csv.hpp"
#include "emview/database.hpp"
#include "emview/em/inference.hpp"
#include "emview/em/metrics.hpp"
#include "emview/em/train.hpp"
#include "emview/error.hpp"
#include "emview/eval.hpp"
#include "emview/maintenance.hpp"
#include "emview/synthetic.hpp"
#include "workspace.hpp"

namespace emview::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::string workspace = ".";
  std::uint64_t seed = 1;
  std::string trace;
};

Value parse_param(const std::string& text) {
  std::int64_t i = 0;
  const char* end = text.data() + text.size();
  if (auto [p, ec] = std::from_chars(text.data(), end, i); ec == std::errc() && p == end) return Value(i);
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(text.data(), end, d); ec == std::errc() && p == end) return Value(d);
  return Value(text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A workspace table name, or else a CSV path.
Relation table_or_file(const Workspace& ws, const std::string& ref) {
  if (ws.has_table(ref)) return ws.table(ref);
  if (ws.has_view(ref)) return ws.view(ref);
  if (fs::exists(ref)) return read_csv_file(ref);
  fail(ErrorCode::UnknownRelation, "'" + ref + "' is neither a workspace relation nor a file");
}

void emit(std::ostream& out, const Relation& rel, const std::string& path) {
  if (!path.empty()) write_csv_file(path, rel);
  write_csv(out, rel);
}

void write_train_trace(const std::string& path, const EvalTrace& trace, const std::vector<double>& ll) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "iteration,rows,changed,millis,log_likelihood\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& r = trace.iterations[i];
    out << r.iteration << ',' << r.rows << ',' << (r.changed ? 1 : 0) << ',' << format_real(r.millis) << ',';
    if (i + 1 < ll.size()) out << format_real(ll[i + 1]);
    out << '\n';
  }
}

em::GmmParams gmm_view(const Workspace& ws, const std::string& view) {
  const auto& info = ws.view_info(view);
  if (info.model != "gmm") {
    fail(ErrorCode::InvalidArgument, "view '" + view + "' is a " + info.model + " model; this command needs gmm");
  }
  return em::GmmParams::from_relation(ws.view(view));
}

void attach_all(const Workspace& ws, Database& db, std::vector<std::unique_ptr<maint::TriggerSet>>& sets) {
  for (const auto& [table, cfg] : ws.bindings()) sets.push_back(maint::attach_triggers(db, cfg));
}

void print_report(std::ostream& out, const maint::TriggerSet& set) {
  if (auto rep = set.last_report()) {
    out << "maintenance of view " << set.config().view << ": " << std::fixed << std::setprecision(3) << rep->millis
        << " ms, " << rep->staged_rows << " staged rows, log-likelihood " << std::setprecision(6)
        << rep->log_likelihood << std::defaultfloat << "\n";
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relational EM model views: train, query and maintain mixture models with recursive SQL."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--workspace", g.workspace, "Workspace directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--trace", g.trace, "Write the iteration trace to this CSV file");

  std::function<void()> action;

  // load
  std::string load_table, load_path;
  auto* load = app.add_subcommand("load", "Register a CSV file as a table");
  load->add_option("table", load_table)->required();
  load->add_option("csv", load_path)->required();
  load->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      const Relation rel = read_csv_file(load_path);
      ws.store_table(load_table, rel);
      ws.save();
      out << "loaded " << rel.size() << " rows into " << load_table << "\n";
    };
  });

  // run
  std::string run_script_path, run_out;
  std::vector<std::string> run_params;
  auto* run = app.add_subcommand("run", "Evaluate a script against the workspace");
  run->add_option("script", run_script_path)->required();
  run->add_option("--out", run_out, "Also write the result to this CSV file");
  run->add_option("--param", run_params, "Script parameter name=value (repeatable)");
  run->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      Database db;
      ws.load_into(db);
      Catalog catalog = db.catalog();
      for (const auto& p : run_params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCode::InvalidArgument, "parameter '" + p + "' is not name=value");
        catalog.params.insert_or_assign(p.substr(0, eq), parse_param(p.substr(eq + 1)));
      }
      const EvalResult res = run_script(read_file(run_script_path), catalog);
      if (!g.trace.empty()) {
        std::ofstream t(g.trace);
        if (!t) fail(ErrorCode::IoError, "cannot write " + g.trace);
        res.trace.write_csv(t);
      }
      emit(out, res.result, run_out);
    };
  });

  // train
  std::string train_view, train_model = "gmm", train_table, train_init;
  ViewInfo train_info;
  std::optional<double> train_lo, train_hi;
  auto* train = app.add_subcommand("train", "Train a model view");
  train->add_option("view", train_view)->required();
  train->add_option("--model", train_model, "gmm, mlr or moe")->check(CLI::IsMember({"gmm", "mlr", "moe"}))->capture_default_str();
  train->add_option("--table", train_table, "Training table")->required();
  train->add_option("-k,--components", train_info.components, "Number of components")->capture_default_str();
  train->add_option("--iterations", train_info.iterations, "Recursion bound")->capture_default_str();
  train->add_option("--epsilon", train_info.epsilon, "Continue until the log-likelihood gain drops below this");
  train->add_option("--init", train_init, "CSV with initial parameters");
  train->add_option("--lo", train_lo, "Lower bound of the random initialization");
  train->add_option("--hi", train_hi, "Upper bound of the random initialization");
  train->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      const Relation data = ws.table(train_table);
      em::TrainConfig cfg;
      cfg.components = train_info.components;
      cfg.max_iterations = train_info.iterations;
      cfg.seed = g.seed;
      cfg.epsilon = train_info.epsilon;
      if (!train_init.empty()) {
        cfg.init = read_csv_file(train_init);
      } else {
        cfg.init = em::RandomUniform{train_lo, train_hi};
      }
      train_info.model = train_model;
      train_info.table = train_table;
      train_info.seed = g.seed;
      Relation view;
      EvalTrace trace;
      std::vector<double> ll;
      std::vector<std::string> warnings;
      auto take = [&](auto&& r) {
        view = r.params.to_relation();
        trace = r.trace;
        ll = r.log_likelihood;
        warnings = r.warnings;
      };
      if (train_model == "gmm") {
        take(em::train_gmm(data, cfg));
      } else if (train_model == "mlr") {
        take(em::train_mlr(data, cfg));
      } else {
        take(em::train_moe(data, cfg));
      }
      ws.store_view(train_view, train_info, view);
      ws.save();
      if (!g.trace.empty()) write_train_trace(g.trace, trace, ll);
      for (const auto& w : warnings) out << "note: " << w << "\n";
      write_csv(out, view);
      out << "iterations: " << trace.iterations.size() << " (" << to_string(trace.exit) << ")\n";
      out << "log-likelihood: " << std::setprecision(10) << ll.back() << std::defaultfloat << "\n";
    };
  });

  // infer / assign
  std::string q_view, q_table, q_out;
  auto* infer = app.add_subcommand("infer", "Posterior memberships R(id, k, p) of a table under a gmm view");
  auto* assign = app.add_subcommand("assign", "Cluster assignment CLU(id, k) of a table under a gmm view");
  for (auto* sub : {infer, assign}) {
    sub->add_option("view", q_view)->required();
    sub->add_option("table", q_table)->required();
    sub->add_option("--out", q_out, "Also write the result to this CSV file");
  }
  infer->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      emit(out, em::infer_posterior(gmm_view(ws, q_view), table_or_file(ws, q_table)), q_out);
    };
  });
  assign->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      const Relation r = em::infer_posterior(gmm_view(ws, q_view), table_or_file(ws, q_table));
      emit(out, em::cluster_assign(r), q_out);
    };
  });

  // eval
  std::string eval_clusters, eval_truth, eval_label = "label";
  auto* eval = app.add_subcommand("eval", "Purity and NMI of an assignment against labels");
  eval->add_option("assignments", eval_clusters, "Table or CSV with (id, k)")->required();
  eval->add_option("truth", eval_truth, "Table or CSV with (id, label)")->required();
  eval->add_option("--label", eval_label, "Label column of the truth relation")->capture_default_str();
  eval->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      const auto score =
          em::evaluate_clustering(table_or_file(ws, eval_clusters), table_or_file(ws, eval_truth), eval_label);
      out << "purity,nmi\n" << std::setprecision(17) << score.purity << ',' << score.nmi << std::defaultfloat << "\n";
    };
  });

  // generate
  std::string gen_out, gen_kind = "gmm", gen_table;
  synth::SyntheticSpec spec;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("out", gen_out, "Output CSV file")->required();
  gen->add_option("--generator", gen_kind, "gmm, linear or rfm")->check(CLI::IsMember({"gmm", "linear", "rfm"}))->capture_default_str();
  gen->add_option("-n", spec.n, "Number of points")->capture_default_str();
  gen->add_option("-d", spec.d, "Dimension")->capture_default_str();
  gen->add_option("-k,--components", spec.components, "Number of components")->capture_default_str();
  gen->add_option("--lo", spec.lo, "Lower bound of means or coefficients")->capture_default_str();
  gen->add_option("--hi", spec.hi, "Upper bound of means or coefficients")->capture_default_str();
  gen->add_option("--sd-lo", spec.sd_lo, "Smallest component standard deviation")->capture_default_str();
  gen->add_option("--sd-hi", spec.sd_hi, "Largest component standard deviation")->capture_default_str();
  gen->add_option("--noise", spec.noise, "Regression noise standard deviation")->capture_default_str();
  gen->add_option("--table", gen_table, "Also register the data as this table");
  gen->callback([&] {
    action = [&] {
      spec.generator = synth::generator_from_string(gen_kind);
      spec.seed = g.seed;
      const Relation rel = synth::generate(spec);
      write_csv_file(gen_out, rel);
      if (!gen_table.empty()) {
        Workspace ws(g.workspace);
        ws.store_table(gen_table, rel);
        ws.save();
      }
      out << "generated " << rel.size() << " rows\n";
    };
  });

  // attach
  maint::MaintenanceConfig mc;
  std::string strategy = "entropy";
  bool no_precompute = false;
  auto* attach = app.add_subcommand("attach", "Maintain a gmm view under inserts and deletes on a table");
  attach->add_option("table", mc.table)->required();
  attach->add_option("view", mc.view)->required();
  attach->add_option("--strategy", strategy, "entropy or distance")->check(CLI::IsMember({"entropy", "distance"}))->capture_default_str();
  attach->add_option("--radius", mc.policy.radius, "Mahalanobis radius of the distance strategy")->capture_default_str();
  attach->add_option("--budget", mc.policy.budget, "Most original points retained per statement")->capture_default_str();
  attach->add_option("--passes", mc.passes, "Shuffled passes over the staged points")->capture_default_str();
  attach->add_flag("--no-precompute", no_precompute, "Recompute statistics from the table on every statement");
  attach->callback([&] {
    action = [&] {
      Workspace ws(g.workspace);
      mc.policy.strategy = maint::strategy_from_string(strategy);
      mc.seed = g.seed;
      mc.precompute = !no_precompute;
      ws.bind(mc);
      Database db;
      ws.load_into(db);
      auto set = maint::attach_triggers(db, mc);
      ws.sync_from(db);
      ws.save();
      out << "attached view " << mc.view << " to table " << mc.table << "\n";
    };
  });

  // insert / delete
  std::string mut_table, ins_path;
  std::vector<std::string> del_ids;
  auto* insert = app.add_subcommand("insert", "Insert rows from a CSV file, firing maintenance triggers");
  insert->add_option("table", mut_table)->required();
  insert->add_option("csv", ins_path)->required();
  auto* del = app.add_subcommand("delete", "Delete rows by id, firing maintenance triggers");
  del->add_option("table", mut_table)->required();
  del->add_option("ids", del_ids, "Ids, separated by spaces or commas")->required()->delimiter(',');
  auto mutate = [&](bool inserting) {
    Workspace ws(g.workspace);
    Database db;
    ws.load_into(db);
    std::vector<std::unique_ptr<maint::TriggerSet>> sets;
    attach_all(ws, db, sets);
    std::size_t n = 0;
    if (inserting) {
      const Relation current = db.get(mut_table);
      n = db.insert(mut_table, read_csv_file(ins_path, current.schema()));
    } else {
      std::vector<Value> ids;
      for (const auto& s : del_ids) ids.push_back(parse_param(s));
      n = db.delete_ids(mut_table, ids);
    }
    ws.sync_from(db);
    ws.save();
    out << (inserting ? "inserted " : "deleted ") << n << " rows " << (inserting ? "into " : "from ") << mut_table
        << "\n";
    for (const auto& s : sets) print_report(out, *s);
  };
  insert->callback([&] { action = [&] { mutate(true); }; });
  del->callback([&] { action = [&] { mutate(false); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error[Usage]: " << e.what() << "\n";
    return 2;
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error[Internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace emview::cli
