#include "altgr/service.h"

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <set>
#include <thread>
#include <vector>

#include "altgr/frontend.h"

namespace altgr::service {

namespace {

// Stats are pushed at least this often while a run is live, on top of the
// one pushed at every round boundary.
constexpr auto kStatsPeriod = std::chrono::milliseconds(250);

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

Json span_json(const Span& s) {
  return {{"start_line", s.start_line},
          {"start_col", s.start_col},
          {"end_line", s.end_line},
          {"end_col", s.end_col}};
}

ServiceError bad_request(const std::string& what) { return ServiceError("BadRequest", what); }

template <typename T>
T field(const Json& req, const char* name) {
  if (!req.is_object() || !req.contains(name)) throw bad_request(std::string("missing ") + name);
  try {
    return req.at(name).get<T>();
  } catch (const Json::exception&) {
    throw bad_request(std::string("bad ") + name);
  }
}

template <typename T>
T field_or(const Json& req, const char* name, T fallback) {
  if (!req.is_object() || !req.contains(name)) return fallback;
  return field<T>(req, name);
}

}  // namespace

/*------------------------------------------------------------------------*/
// Views

Json node_view(const AnnotatedAst& ast, NodeId id) {
  const AnnNode& n = ast.node(id);
  Json j;
  j["id"] = n.id;
  j["parent"] = n.parent;
  j["decl"] = n.decl;
  j["span"] = span_json(n.span);
  j["polarity"] = polarity_name(n.polarity);
  j["prune"] = prune_state_name(n.prune);
  j["prunable"] = n.prunable;
  if (n.is_decl) {
    const Decl& d = ast.decl(id);
    j["kind"] = decl_kind_name(d.kind);
    j["name"] = d.name();
    j["pretty"] = frontend::pretty(d);
  } else {
    j["kind"] = op_name(n.op);
    j["pretty"] = frontend::pretty(n.expr);
    if (n.expr && n.expr->type) j["type"] = frontend::pretty(n.expr->type);
  }
  if (auto it = ast.triggers.find(id); it != ast.triggers.end()) {
    Json ts = Json::array();
    for (const auto& t : it->second)
      ts.push_back({{"text", frontend::pretty_trigger(t)}, {"origin", origin_name(t.origin)}});
    j["triggers"] = ts;
  }
  if (auto it = ast.warnings.find(id); it != ast.warnings.end()) j["warning"] = it->second;
  return j;
}

Json document_view(const AnnotatedAst& ast) {
  Json decls = Json::array();
  for (const auto& d : ast.decls)
    decls.push_back({{"id", d.id}, {"name", d.name()}, {"kind", decl_kind_name(d.kind)}});
  Json nodes = Json::array();
  for (NodeId id = 0; id < static_cast<NodeId>(ast.size()); ++id) nodes.push_back(node_view(ast, id));
  return {{"source", ast.source}, {"decls", decls}, {"nodes", nodes}};
}

Json snapshot_json(const Snapshot& s) {
  Json timers;
  for (int m = 0; m < kModuleCount; ++m) timers[module_name(static_cast<Module>(m))] = s.seconds[m];
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    Json row = {{"id", r.id},
                {"name", r.name},
                {"produced", r.produced},
                {"limited", r.limited},
                {"shade", shade_red(r.produced, s.total)}};
    row["limit"] = r.limit ? Json(*r.limit) : Json(nullptr);
    rows.push_back(row);
  }
  return {{"timers", timers},
          {"wall", s.wall},
          {"rounds", s.rounds},
          {"status", run_status_name(s.status)},
          {"total", s.total},
          {"rows", rows}};
}

Json action_to_json(const Action& a) {
  Json j = {{"kind", action_kind_name(a.kind)}, {"id", a.id}};
  switch (a.kind) {
    case Action::Kind::AddInstance:
      j["name"] = a.name;
      j["vars"] = a.vars;
      j["terms"] = a.terms;
      break;
    case Action::Kind::AddTrigger:
      j["replace"] = a.replace;
      j["text"] = a.text;
      break;
    case Action::Kind::LimitLemma:
      j["name"] = a.name;
      j["limit"] = a.limit;
      break;
    case Action::Kind::UnlimitLemma: j["name"] = a.name; break;
    default: break;
  }
  return j;
}

Action action_from_json(const Json& j) {
  std::string kind = field<std::string>(j, "kind");
  NodeId id = field<NodeId>(j, "id");
  // An unsound prune is requested as a plain prune; the document decides.
  if (kind == "Prune" || kind == "IncorrectPrune") return Action::prune(id);
  if (kind == "Unprune") return Action::unprune(id);
  if (kind == "AddInstance")
    return Action::add_instance(id, field<std::string>(j, "name"),
                                field<std::vector<std::string>>(j, "vars"),
                                field<std::vector<std::string>>(j, "terms"));
  if (kind == "AddTrigger")
    return Action::add_trigger(id, field_or<bool>(j, "replace", false), field<std::string>(j, "text"));
  if (kind == "LimitLemma")
    return Action::limit_lemma(id, field_or<std::string>(j, "name", ""), field<long>(j, "limit"));
  if (kind == "UnlimitLemma") return Action::unlimit_lemma(id, field_or<std::string>(j, "name", ""));
  throw bad_request("unknown action kind " + kind);
}

/*------------------------------------------------------------------------*/
// State

struct RunState {
  std::string id;
  std::string doc;
  RunControl control;
  Telemetry telemetry;

  std::mutex mutex;
  std::condition_variable cv;
  std::vector<Json> events;
  bool finished = false;
  bool stop_ticker = false;
  std::thread thread;

  void push(Json e) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      e["seq"] = events.size();
      e["run"] = id;
      e["doc"] = doc;
      e["t"] = now_seconds();
      events.push_back(std::move(e));
    }
    cv.notify_all();
  }
};

struct DocState {
  std::string id;
  std::mutex mutex;
  Document doc;
  SolveOptions opts;
  bool core = true;
  double threshold = 0.5;
  std::shared_ptr<RunState> active;
  // Core of the last Valid run, dropped by any structural change.
  std::optional<std::map<NodeId, int>> core_hits;

  bool running() {
    if (!active) return false;
    std::lock_guard<std::mutex> lock(active->mutex);
    return !active->finished;
  }
};

namespace {

bool is_structural(const Action& a) {
  return a.kind != Action::Kind::LimitLemma && a.kind != Action::Kind::UnlimitLemma;
}

Json changed_json(const AnnotatedAst& ast, const ActionOutcome& o) {
  Json out = Json::array();
  for (NodeId id : o.changed) {
    if (!ast.valid(id)) continue;
    Json v = node_view(ast, id);
    if (id == o.recorded.id && (o.recorded.kind == Action::Kind::Prune ||
                                o.recorded.kind == Action::Kind::IncorrectPrune))
      v["soundness"] = o.recorded.kind == Action::Kind::Prune ? "Sound" : "Unsound";
    out.push_back(v);
  }
  return out;
}

Json report_json(const ReplayReport& r) {
  Json failed = Json::array();
  for (const auto& [a, why] : r.failed) failed.push_back({{"action", action_to_json(a)}, {"reason", why}});
  return {{"applied", r.applied}, {"failed", failed}, {"aborted", r.aborted}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ServiceError("IoError", "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void run_body(std::shared_ptr<RunState> run, std::shared_ptr<DocState> ds, AnnotatedAst ast,
              SolveOptions opts) {
  BudgetTable* budgets = &ds->doc.budgets;
  run->push({{"type", "Status"}, {"status", "Started"}});
  auto stats = [&] {
    run->push({{"type", "Stats"}, {"stats", snapshot_json(take_snapshot(&run->telemetry, budgets))}});
  };

  std::thread ticker([&] {
    std::unique_lock<std::mutex> lock(run->mutex);
    while (!run->cv.wait_for(lock, kStatsPeriod, [&] { return run->stop_ticker; })) {
      lock.unlock();
      stats();
      lock.lock();
    }
  });

  std::map<NodeId, long> seen;
  run->control.on_round = [&](int rounds, size_t) {
    run->push({{"type", "Status"}, {"status", "Round"}, {"n", rounds}});
    for (const auto& row : budgets->rows()) {
      long& before = seen[row.id];
      if (row.produced > before)
        run->push({{"type", "InstanceAdded"}, {"axiom", row.id}, {"count", row.produced - before}});
      before = row.produced;
    }
    stats();
  };

  SolveResult r = solve(ast, opts, budgets, &run->telemetry, &run->control);

  {
    std::lock_guard<std::mutex> lock(run->mutex);
    run->stop_ticker = true;
  }
  run->cv.notify_all();
  ticker.join();

  std::optional<std::map<NodeId, int>> hits;
  if (r.outcome == Outcome::Valid && r.core) {
    CoreView v = core_of(r, ast);
    Json nodes = Json::array();
    for (const auto& [id, shade] : v.shades) {
      auto h = v.hits.find(id);
      nodes.push_back({{"id", id}, {"hits", h == v.hits.end() ? 0 : h->second}, {"shade", shade_name(shade)}});
    }
    run->push({{"type", "Core"}, {"nodes", nodes}});
    hits = r.core;
  }
  {
    std::lock_guard<std::mutex> lock(ds->mutex);
    ds->core_hits = hits;
  }
  stats();
  Json last = {{"type", "Status"}, {"rounds", r.rounds}, {"elapsed", r.elapsed}};
  if (r.outcome == Outcome::Aborted) {
    last["status"] = "Aborted";
  } else {
    last["status"] = "Done";
    last["result"] = outcome_name(r.outcome);
  }
  Json instances = r.instances;
  last["instances"] = instances;
  {
    std::lock_guard<std::mutex> lock(run->mutex);
    last["seq"] = run->events.size();
    last["run"] = run->id;
    last["doc"] = run->doc;
    last["t"] = now_seconds();
    run->events.push_back(std::move(last));
    run->finished = true;
  }
  run->cv.notify_all();
}

}  // namespace

/*------------------------------------------------------------------------*/
// Endpoints

Workbench::Workbench() = default;

Workbench::~Workbench() {
  std::map<std::string, std::shared_ptr<RunState>> runs;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    runs = runs_;
  }
  for (auto& [id, r] : runs) r->control.abort = true;
  for (auto& [id, r] : runs)
    if (r->thread.joinable()) r->thread.join();
}

std::shared_ptr<DocState> Workbench::doc(const Json& req) {
  std::string id = field<std::string>(req, "doc");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = docs_.find(id);
  if (it == docs_.end()) throw ServiceError("NoSuchDocument", "no document " + id);
  return it->second;
}

std::shared_ptr<RunState> Workbench::run_state(const Json& req) {
  std::string id = field<std::string>(req, "run");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = runs_.find(id);
  if (it == runs_.end()) throw ServiceError("NoSuchRun", "no run " + id);
  return it->second;
}

Json Workbench::call(const std::string& endpoint, const Json& request) {
  static const std::map<std::string, Json (Workbench::*)(const Json&)> table = {
      {"load", &Workbench::load},
      {"act", &Workbench::act},
      {"run", &Workbench::run},
      {"abort", &Workbench::abort},
      {"events", &Workbench::events},
      {"extract", &Workbench::extract},
      {"session/save", &Workbench::session_save},
      {"session/load", &Workbench::session_load},
      {"option/set", &Workbench::option_set},
  };
  auto error = [](const std::string& code, const std::string& message) {
    return Json{{"ok", false}, {"error", {{"code", code}, {"message", message}}}};
  };
  auto it = table.find(endpoint);
  if (it == table.end()) return error("BadRequest", "unknown endpoint " + endpoint);
  try {
    Json out = (this->*(it->second))(request);
    out["ok"] = true;
    return out;
  } catch (const ServiceError& e) {
    return error(e.code(), e.what());
  } catch (const std::exception& e) {
    return error("BadRequest", e.what());
  }
}

Json Workbench::load(const Json& req) {
  std::string text = field<std::string>(req, "text");
  auto ds = std::make_shared<DocState>();
  try {
    ds->doc = open_document(text);
  } catch (const frontend::ParseError& e) {
    throw ServiceError("ParseError", e.located());
  } catch (const frontend::FrontendError& e) {
    throw ServiceError("TypeError", e.located());
  }
  Json view = document_view(ds->doc.ast);
  std::lock_guard<std::mutex> lock(mutex_);
  ds->id = "d" + std::to_string(++next_doc_);
  docs_[ds->id] = ds;
  return {{"doc", ds->id}, {"view", view}};
}

Json Workbench::act(const Json& req) {
  auto ds = doc(req);
  Action a = action_from_json(field<Json>(req, "action"));
  bool closure = field_or<bool>(req, "closure", false);
  std::lock_guard<std::mutex> lock(ds->mutex);
  if (is_structural(a) && ds->running())
    throw ServiceError("RunActive", "a run is in progress on " + ds->id);
  std::vector<ActionOutcome> outs;
  try {
    if (closure && a.kind == Action::Kind::Prune)
      outs = prune_with_dependents(ds->doc, a.id);
    else
      outs.push_back(apply_action(ds->doc, a));
  } catch (const ActionError& e) {
    throw ServiceError("ActionError", e.what());
  }
  if (is_structural(a)) ds->core_hits.reset();
  Json recorded = Json::array(), changed = Json::array();
  for (const auto& o : outs) {
    recorded.push_back(action_to_json(o.recorded));
    for (auto& v : changed_json(ds->doc.ast, o)) changed.push_back(v);
  }
  Json out = {{"recorded", recorded}, {"changed", changed}};
  if (a.kind == Action::Kind::AddInstance) out["decls"] = document_view(ds->doc.ast)["decls"];
  return out;
}

Json Workbench::run(const Json& req) {
  auto ds = doc(req);
  std::lock_guard<std::mutex> lock(ds->mutex);
  if (ds->running()) throw ServiceError("RunActive", "a run is in progress on " + ds->id);
  SolveOptions opts = ds->opts;
  opts.time_limit = field_or<double>(req, "time_limit", opts.time_limit);
  opts.max_rounds = field_or<int>(req, "max_rounds", opts.max_rounds);
  auto rs = std::make_shared<RunState>();
  rs->doc = ds->id;
  rs->control.core = field_or<bool>(req, "core", ds->core);
  {
    std::lock_guard<std::mutex> wl(mutex_);
    rs->id = "r" + std::to_string(++next_run_);
    runs_[rs->id] = rs;
  }
  ds->active = rs;
  ds->core_hits.reset();
  rs->thread = std::thread(run_body, rs, ds, ds->doc.ast, opts);
  return {{"run", rs->id}};
}

Json Workbench::abort(const Json& req) {
  auto rs = run_state(req);
  rs->control.abort = true;
  return Json::object();
}

Json Workbench::events(const Json& req) {
  auto rs = run_state(req);
  size_t from = field_or<size_t>(req, "from", 0);
  long wait_ms = field_or<long>(req, "wait_ms", 0);
  std::unique_lock<std::mutex> lock(rs->mutex);
  if (wait_ms > 0)
    rs->cv.wait_for(lock, std::chrono::milliseconds(wait_ms),
                    [&] { return rs->events.size() > from || rs->finished; });
  Json out = Json::array();
  for (size_t i = from; i < rs->events.size(); ++i) out.push_back(rs->events[i]);
  return {{"events", out}, {"next", rs->events.size()}, {"finished", rs->finished}};
}

Json Workbench::extract(const Json& req) {
  auto ds = doc(req);
  std::lock_guard<std::mutex> lock(ds->mutex);
  if (ds->running()) throw ServiceError("RunActive", "a run is in progress on " + ds->id);
  if (!ds->core_hits) throw ServiceError("NoCore", "no core from a valid run of the current document");
  const AnnotatedAst& ast = ds->doc.ast;
  std::set<NodeId> keep;
  for (const auto& [id, hits] : *ds->core_hits) {
    if (!ast.valid(id)) continue;
    NodeId d = ast.node(id).is_decl ? id : ast.node(id).decl;
    keep.insert(d);
  }
  std::set<NodeId> needed = keep;
  for (NodeId d : keep) {
    auto sup = dependency_support(ast, d);
    needed.insert(sup.begin(), sup.end());
  }
  std::vector<NodeId> targets;
  for (const auto& d : ast.decls)
    if (!needed.count(d.id) && d.kind != DeclKind::Goal && ast.node(d.id).prune == PruneState::Active)
      targets.push_back(d.id);
  Document scratch = ds->doc;
  Json pruned = Json::array(), actions = Json::array();
  try {
    for (NodeId d : targets) {
      ActionOutcome o = apply_action(scratch, Action::prune(d));
      pruned.push_back(d);
      actions.push_back(action_to_json(o.recorded));
    }
  } catch (const ActionError& e) {
    throw ServiceError("ActionError", e.what());
  }
  ds->doc = std::move(scratch);
  // The pruned declarations held no core node, so the core still stands.
  return {{"pruned", pruned}, {"actions", actions}};
}

Json Workbench::session_save(const Json& req) {
  auto ds = doc(req);
  std::string path = field<std::string>(req, "path");
  std::lock_guard<std::mutex> lock(ds->mutex);
  std::string text;
  try {
    text = write_session(make_session(ds->doc));
  } catch (const SaveRefused& e) {
    throw ServiceError("SaveRefused", e.what());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ServiceError("IoError", "cannot write " + path);
  return {{"bytes", text.size()}};
}

Json Workbench::session_load(const Json& req) {
  auto ds = doc(req);
  std::string path = field<std::string>(req, "path");
  std::string text = read_file(path);
  Session s;
  try {
    s = read_session(text);
  } catch (const SessionFormatError& e) {
    throw ServiceError("SessionError", e.what());
  }
  std::lock_guard<std::mutex> lock(ds->mutex);
  if (ds->running()) throw ServiceError("RunActive", "a run is in progress on " + ds->id);
  // Replay onto the document as loaded, not on top of earlier actions.
  Document fresh = open_document(ds->doc.ast.source);
  ReplayReport r = replay(s, fresh, ds->threshold);
  if (!r.aborted) {
    ds->doc = std::move(fresh);
    ds->core_hits.reset();
  }
  Json out = report_json(r);
  out["view"] = document_view(ds->doc.ast);
  return out;
}

Json Workbench::option_set(const Json& req) {
  auto ds = doc(req);
  std::string name = field<std::string>(req, "name");
  std::lock_guard<std::mutex> lock(ds->mutex);
  if (name == "time_limit") {
    double v = field<double>(req, "value");
    if (v < 0) throw bad_request("time_limit must not be negative");
    ds->opts.time_limit = v;
  } else if (name == "max_rounds") {
    int v = field<int>(req, "value");
    if (v < 0) throw bad_request("max_rounds must not be negative");
    ds->opts.max_rounds = v;
  } else if (name == "core") {
    // Also switches the live run, which decides when it finishes.
    ds->core = field<bool>(req, "value");
    if (ds->active) ds->active->control.core = ds->core;
  } else if (name == "replay_threshold") {
    double v = field<double>(req, "value");
    if (v < 0 || v > 1) throw bad_request("replay_threshold must lie in [0, 1]");
    ds->threshold = v;
  } else {
    throw bad_request("unknown option " + name);
  }
  return Json::object();
}

void Workbench::wait(const std::string& run_id) {
  auto rs = run_state({{"run", run_id}});
  std::unique_lock<std::mutex> lock(rs->mutex);
  rs->cv.wait(lock, [&] { return rs->finished; });
}

}  // namespace altgr::service
