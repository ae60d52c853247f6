#include <httplib.h>

#include "altgr/service.h"

namespace altgr::service {

namespace {

int status_of(const Json& reply) {
  if (reply.value("ok", false)) return 200;
  std::string code = reply["error"].value("code", "");
  if (code == "NoSuchDocument" || code == "NoSuchRun") return 404;
  if (code == "RunActive") return 409;
  return 400;
}

}  // namespace

struct HttpServer::Impl {
  Workbench* wb;
  httplib::Server server;
};

HttpServer::HttpServer(Workbench& wb) : impl_(std::make_unique<Impl>()) {
  impl_->wb = &wb;
  for (const char* endpoint : {"load", "act", "run", "abort", "events", "extract", "session/save",
                               "session/load", "option/set"}) {
    std::string name = endpoint;
    impl_->server.Post("/" + name, [this, name](const httplib::Request& req, httplib::Response& res) {
      Json body = Json::parse(req.body, nullptr, false);
      Json reply = body.is_discarded()
                       ? Json{{"ok", false}, {"error", {{"code", "BadRequest"}, {"message", "body is not JSON"}}}}
                       : impl_->wb->call(name, body);
      res.status = status_of(reply);
      res.set_content(reply.dump(), "application/json");
    });
  }
  impl_->server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::string run = req.get_param_value("run");
    Json first = impl_->wb->call("events", {{"run", run}});
    if (!first.value("ok", false)) {
      res.status = status_of(first);
      res.set_content(first.dump(), "application/json");
      return;
    }
    Workbench* wb = impl_->wb;
    res.set_chunked_content_provider(
        "text/event-stream", [wb, run, next = size_t{0}](size_t, httplib::DataSink& sink) mutable {
          Json r = wb->call("events", {{"run", run}, {"from", next}, {"wait_ms", 200}});
          if (!r.value("ok", false)) {
            sink.done();
            return true;
          }
          for (const auto& e : r["events"]) {
            std::string chunk = "data: " + e.dump() + "\n\n";
            if (!sink.write(chunk.data(), chunk.size())) return false;
          }
          next = r["next"].get<size_t>();
          if (r["finished"].get<bool>() && r["events"].empty()) sink.done();
          return true;
        });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace altgr::service
