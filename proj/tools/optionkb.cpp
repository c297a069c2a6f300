// optionkb: annotate COCO/BBOB result folders, serve the knowledge base over
// HTTP, and answer template queries offline against a snapshot.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "optionkb/cli_args.hpp"
#include "optionkb/coco.hpp"
#include "optionkb/query.hpp"
#include "optionkb/rdf.hpp"
#include "optionkb/service.hpp"
#include "optionkb/store.hpp"

namespace fs = std::filesystem;
using namespace optionkb;

namespace {

struct AnnotateArgs {
  std::string input;
  std::string doi;
  std::string title;
  std::vector<std::string> authors;
  int year = 0;
  std::string out;
  std::string db;
  std::string base = std::string(coco::kDefaultBase);
  bool strict = false;
};

struct ServeArgs {
  std::string db;
  std::string addr;
};

struct QueryArgs {
  std::string db;
  bool fixed_budget = false;
  bool fixed_target = false;
  bool provenance = false;
  std::vector<std::string> algs;
  std::vector<std::string> problems;
  std::vector<std::string> instances;
  std::vector<std::string> dims;
  std::string budget;
  std::optional<double> target;
  std::string study;
  std::string format = "csv";
};

struct ValuesArgs {
  std::string db;
  std::string dimension;
};

store::QuadStore load_db(const std::string& path) { return store::load_snapshot(path); }

int run_annotate(const AnnotateArgs& a) {
  if (!a.out.empty() && !a.db.empty()) throw cli::UsageError("--out and --db are mutually exclusive");
  coco::ProvenanceRecord prov{a.doi, a.title, cli::split_list(a.authors), a.year};
  try {
    coco::validate(prov);
  } catch (const coco::IngestError& e) {
    throw cli::UsageError(e.detail());
  }
  if (!fs::is_directory(a.input)) {
    std::cerr << "error: input directory '" << a.input << "' does not exist\n";
    return cli::kExitIo;
  }

  coco::IngestOptions options{a.strict ? coco::Mode::Strict : coco::Mode::Lenient, a.base};
  auto result = coco::ingest_directory(a.input, prov, options);
  for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';

  if (!a.out.empty()) {
    store::write_file_atomic(a.out, rdf::serialize_nquads(result.quads));
  } else if (!a.db.empty()) {
    auto st = load_db(a.db);
    st.bulk_insert(result.quads);
    store::save_snapshot(st, a.db);
  }

  nlohmann::json report = {{"files_parsed", result.report.files_parsed},
                           {"runs_annotated", result.report.runs_annotated},
                           {"quads_emitted", result.report.quads_emitted},
                           {"warnings", result.report.warnings}};
  std::cout << report.dump() << '\n';
  return cli::kExitOk;
}

int run_serve(const ServeArgs& a) {
  std::string addr = a.addr;
  if (addr.empty()) {
    const char* env = std::getenv(service::kAddressEnv);
    addr = env && *env ? env : std::string(service::kDefaultAddress);
  }
  std::pair<std::string, int> host_port;
  try {
    host_port = service::parse_address(addr);
  } catch (const std::invalid_argument& e) {
    throw cli::UsageError(e.what());
  }

  service::Service svc(load_db(a.db));

  // Signals are consumed by a dedicated thread so stop() runs outside a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  httplib::Server server;
  svc.mount(server);
  int port = host_port.second;
  if (port == 0) {
    port = server.bind_to_any_port(host_port.first);
    if (port < 0) port = 0;
  } else if (!server.bind_to_port(host_port.first, port)) {
    port = 0;
  }
  if (port == 0) {
    std::cerr << "error: cannot bind " << addr << '\n';
    return cli::kExitIo;
  }
  std::cerr << "listening on http://" << host_port.first << ':' << port << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen_after_bind();
  // listen returned without a signal (e.g. socket error): release the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();

  svc.save(a.db);
  std::cerr << "snapshot saved to " << a.db << '\n';
  return cli::kExitOk;
}

int run_query(const QueryArgs& a) {
  int templates = int(a.fixed_budget) + int(a.fixed_target) + int(a.provenance);
  if (templates != 1) throw cli::UsageError("exactly one of --fixed-budget, --fixed-target, --provenance is required");
  if (a.format != "csv" && a.format != "json") throw cli::UsageError("--format must be csv or json");

  query::Selectors sel;
  if (!a.algs.empty()) {
    auto algs = cli::split_list(a.algs);
    sel.algorithms = std::set<std::string>(algs.begin(), algs.end());
  }
  if (!a.problems.empty()) sel.problems = cli::parse_int_list(a.problems, "--problems");
  if (!a.instances.empty()) sel.instances = cli::parse_int_list(a.instances, "--instances");
  if (!a.dims.empty()) sel.dimensions = cli::parse_int_list(a.dims, "--dims");

  query::ResultTable table;
  if (a.fixed_budget) {
    if (a.budget.empty()) throw cli::UsageError("--fixed-budget requires --budget");
    if (a.target || !a.study.empty()) throw cli::UsageError("--target/--study conflict with --fixed-budget");
    query::FixedBudgetQuery q{sel, cli::parse_budget_flag(a.budget)};
    auto st = load_db(a.db);
    table = query::run_fixed_budget(st, q);
  } else if (a.fixed_target) {
    if (!a.target) throw cli::UsageError("--fixed-target requires --target");
    if (!a.budget.empty() || !a.study.empty()) throw cli::UsageError("--budget/--study conflict with --fixed-target");
    query::FixedTargetQuery q{sel, *a.target};
    auto st = load_db(a.db);
    table = query::run_fixed_target(st, q);
  } else {
    if (!a.budget.empty() || a.target || sel.problems || sel.instances || sel.dimensions)
      throw cli::UsageError("--provenance takes only --study or --alg");
    query::ProvenanceQuery q;
    if (!a.study.empty()) q.doi = a.study;
    if (sel.algorithms) {
      if (sel.algorithms->size() != 1) throw cli::UsageError("--provenance takes a single --alg");
      q.algorithm = *sel.algorithms->begin();
    }
    if (q.doi.has_value() == q.algorithm.has_value())
      throw cli::UsageError("--provenance requires exactly one of --study or --alg");
    auto st = load_db(a.db);
    table = query::provenance_table(query::run_provenance(st, q));
  }

  if (a.format == "json")
    std::cout << query::to_json(table) << '\n';
  else
    std::cout << query::to_csv(table);
  return cli::kExitOk;
}

int run_values(const ValuesArgs& a) {
  if (!query::parse_value_dimension(a.dimension))
    throw cli::UsageError("--dimension must be one of algorithm, functionId, dimension, instance, study");
  service::Service svc(load_db(a.db));
  std::cout << svc.values(a.dimension).body << '\n';
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge base for black-box optimization benchmark data"};
  app.require_subcommand(1);

  AnnotateArgs ann;
  auto* annotate = app.add_subcommand("annotate", "Annotate a COCO/BBOB result folder into N-Quads");
  annotate->add_option("--input", ann.input, "Result folder holding .info/.dat files")->required();
  annotate->add_option("--doi", ann.doi, "Study DOI")->required();
  annotate->add_option("--title", ann.title, "Study title")->required();
  annotate->add_option("--authors", ann.authors, "Comma-separated author names")->required();
  annotate->add_option("--year", ann.year, "Publication year")->required();
  annotate->add_option("--out", ann.out, "Write canonical N-Quads to this file");
  annotate->add_option("--db", ann.db, "Merge into this N-Quads snapshot");
  annotate->add_option("--base", ann.base, "IRI base for minted resources")->capture_default_str();
  annotate->add_flag("--strict", ann.strict, "Reject non-monotone best fitness instead of repairing it");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Serve the query and upload endpoints");
  serve->add_option("--db", srv.db, "N-Quads snapshot (created on shutdown if absent)")->required();
  serve->add_option("--addr", srv.addr, "host:port (default $OPTIONKB_ADDR or 127.0.0.1:3330)");

  QueryArgs qa;
  auto* query_cmd = app.add_subcommand("query", "Answer a template query against a snapshot");
  query_cmd->add_option("--db", qa.db, "N-Quads snapshot")->required();
  query_cmd->add_flag("--fixed-budget", qa.fixed_budget, "Best fitness delta at a budget or within a budget range");
  query_cmd->add_flag("--fixed-target", qa.fixed_target, "Evaluations needed to reach a target");
  query_cmd->add_flag("--provenance", qa.provenance, "Provenance of a study");
  query_cmd->add_option("--alg", qa.algs, "Algorithm label(s), comma-separated");
  query_cmd->add_option("--problems", qa.problems, "Function ids, e.g. 1,7 or 1-5");
  query_cmd->add_option("--instances", qa.instances, "Instance numbers, e.g. 1-5");
  query_cmd->add_option("--dims", qa.dims, "Dimensions, e.g. 5,20");
  query_cmd->add_option("--budget", qa.budget, "Budget b or inclusive range lo:hi");
  query_cmd->add_option("--target", qa.target, "Target best fitness delta");
  query_cmd->add_option("--study", qa.study, "Study DOI");
  query_cmd->add_option("--format", qa.format, "csv or json")->capture_default_str();

  ValuesArgs va;
  auto* values = app.add_subcommand("values", "List distinct values of a dimension");
  values->add_option("--db", va.db, "N-Quads snapshot")->required();
  values->add_option("--dimension", va.dimension, "algorithm, functionId, dimension, instance or study")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*annotate) return run_annotate(ann);
    if (*serve) return run_serve(srv);
    if (*query_cmd) return run_query(qa);
    if (*values) return run_values(va);
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const coco::IngestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitData;
  } catch (const rdf::SyntaxError& e) {
    std::cerr << "error: snapshot " << e.what() << '\n';
    return cli::kExitData;
  } catch (const query::QueryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == query::QueryError::Kind::Invalid ? cli::kExitUsage : cli::kExitData;
  } catch (const store::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitIo;
  }
  return cli::kExitUsage;
}
