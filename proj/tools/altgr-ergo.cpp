// Batch front end: solve one file and print the verdict, or serve the
// workbench over HTTP.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "altgr/frontend.h"
#include "altgr/service.h"
#include "altgr/session.h"
#include "altgr/solver.h"

using namespace altgr;

namespace {

enum Exit { kValid = 0, kUnknown = 1, kTimeout = 2, kInputError = 3, kReplayAborted = 4 };

std::string one_decimal(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", seconds);
  return buf;
}

int serve(int port) {
  service::Workbench wb;
  service::HttpServer server(wb);
  int bound = server.bind("127.0.0.1", port);
  if (bound < 0) {
    std::cerr << "cannot listen on port " << port << "\n";
    return kInputError;
  }
  std::cerr << "listening on 127.0.0.1:" << bound << "\n";
  server.serve();
  return 0;
}

void print_core(const SolveResult& r, const AnnotatedAst& ast) {
  std::set<NodeId> decls;
  for (const auto& [id, shade] : core_of(r, ast).shades)
    if (ast.valid(id) && ast.node(id).is_decl) decls.insert(id);
  std::cout << "; core:\n";
  for (const auto& d : strip(ast))
    if (decls.count(d.id)) std::cout << frontend::pretty(d) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solve a problem file, or serve the interactive workbench."};
  std::string file, replay_path;
  double time_limit = 60;
  int max_rounds = 100;
  bool unsat_core = false, show_instances = false;
  int port = 8080;
  app.add_option("file", file, "Problem file");
  app.add_option("--timelimit", time_limit, "Time limit in seconds")->check(CLI::NonNegativeNumber);
  app.add_option("--max-rounds", max_rounds, "Instantiation rounds before giving up")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--unsat-core", unsat_core, "Print the declarations of the unsat core");
  app.add_option("--replay", replay_path, "Replay a saved session before solving");
  app.add_flag("--show-instances", show_instances, "Print every instance and its substitution");
  CLI::Option* serve_opt =
      app.add_option("--serve", port, "Serve the workbench over HTTP instead")->expected(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  if (*serve_opt) return serve(port);
  if (file.empty()) {
    std::cerr << "no input file\n";
    return kInputError;
  }

  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::cerr << file << ": cannot read\n";
    return kInputError;
  }
  std::stringstream text;
  text << in.rdbuf();

  Document doc;
  try {
    doc = open_document(text.str());
  } catch (const frontend::FrontendError& e) {
    std::cerr << file << ":" << e.located() << "\n";
    return kInputError;
  }
  if (!doc.ast.goal()) {
    std::cerr << file << ": no goal\n";
    return kInputError;
  }
  // Replay rebuilds the document, so keep a copy.
  const std::string name = doc.ast.goal()->name();

  if (!replay_path.empty()) {
    Session s;
    try {
      s = load_session_file(replay_path);
    } catch (const std::exception& e) {
      std::cerr << replay_path << ": " << e.what() << "\n";
      return kInputError;
    }
    ReplayReport rep = replay(s, doc);
    for (const auto& [a, why] : rep.failed)
      std::cerr << replay_path << ": cannot replay " << action_str(a) << ": " << why << "\n";
    if (rep.aborted) {
      std::cerr << replay_path << ": replay aborted\n";
      return kReplayAborted;
    }
  }

  SolveOptions opts;
  opts.time_limit = time_limit;
  opts.max_rounds = max_rounds;
  BudgetTable budgets = doc.budgets;
  SolveResult r = solve(doc.ast, opts, &budgets, nullptr, nullptr);

  if (show_instances)
    for (size_t i = 0; i < r.instances.size(); ++i) {
      // Both strings start with the lemma name.
      const std::string& f = r.instances[i];
      std::cout << "; instance " << r.substitutions[i] << "\n;   " << f.substr(f.find(": ") + 2)
                << "\n";
    }

  std::string stats = " (" + one_decimal(r.elapsed) + "s, " + std::to_string(r.rounds) + " rounds)";
  switch (r.outcome) {
    case Outcome::Valid:
      std::cout << name << ": Valid" << stats << "\n";
      if (unsat_core) print_core(r, doc.ast);
      return kValid;
    case Outcome::Timeout: std::cout << name << ": Timeout\n"; return kTimeout;
    default: std::cout << name << ": I don't know" << stats << "\n"; return kUnknown;
  }
}
