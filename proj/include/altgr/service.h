#pragma once

// The workbench as a service: documents, actions, concurrent runs with an
// event stream, core extraction and sessions.  Requests and replies are
// JSON objects; `Workbench::call` is the whole protocol, `HttpServer` puts
// it on HTTP with the event stream as server-sent events.

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "altgr/session.h"
#include "altgr/snapshot.h"
#include "altgr/solver.h"

namespace altgr::service {

using Json = nlohmann::json;

class ServiceError : public std::runtime_error {
 public:
  /// Codes: BadRequest, NoSuchDocument, NoSuchRun, RunActive, ParseError,
  /// TypeError, ActionError, SaveRefused, NoCore, SessionError, IoError.
  ServiceError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

Json node_view(const AnnotatedAst& ast, NodeId id);
/// Every node, plus the declaration list and the source text.
Json document_view(const AnnotatedAst& ast);
Json snapshot_json(const Snapshot& s);

Json action_to_json(const Action& a);
/// Throws ServiceError(BadRequest) on a malformed action.
Action action_from_json(const Json& j);

struct DocState;
struct RunState;

class Workbench {
 public:
  Workbench();
  ~Workbench();
  Workbench(const Workbench&) = delete;
  Workbench& operator=(const Workbench&) = delete;

  /// Dispatches on the endpoint name.  Never throws: failures come back as
  /// `{"ok": false, "error": {"code", "message"}}`, successes carry
  /// `"ok": true` next to the endpoint's fields.
  Json call(const std::string& endpoint, const Json& request);

  /// {text} -> {doc, view}
  Json load(const Json& req);
  /// {doc, action, closure?} -> {recorded, changed}.  With `closure` a
  /// declaration prune also prunes everything depending on it.
  Json act(const Json& req);
  /// {doc, time_limit?, max_rounds?, core?} -> {run}
  Json run(const Json& req);
  /// {run} -> {}
  Json abort(const Json& req);
  /// {run, from?, wait_ms?} -> {events, next, finished}
  Json events(const Json& req);
  /// {doc} -> {pruned, actions}
  Json extract(const Json& req);
  /// {doc, path} -> {bytes}
  Json session_save(const Json& req);
  /// {doc, path} -> {applied, failed, aborted, view}
  Json session_load(const Json& req);
  /// {doc, name, value} -> {}.  Names: time_limit, max_rounds, core,
  /// replay_threshold.
  Json option_set(const Json& req);

  /// Blocks until the run has emitted its last event.
  void wait(const std::string& run_id);

 private:
  std::shared_ptr<DocState> doc(const Json& req);
  std::shared_ptr<RunState> run_state(const Json& req);

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<DocState>> docs_;
  std::map<std::string, std::shared_ptr<RunState>> runs_;
  long next_doc_ = 0;
  long next_run_ = 0;
};

/// HTTP front: POST /<endpoint> with a JSON body for every endpoint, and
/// GET /events?run=<id> as a server-sent event stream that closes after the
/// run's last event.
class HttpServer {
 public:
  explicit HttpServer(Workbench& wb);
  ~HttpServer();

  /// Binds (port 0 picks a free one) and returns the port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop().  Call after bind().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace altgr::service
