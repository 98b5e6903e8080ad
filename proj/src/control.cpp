#include "cosim/control.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <sstream>

#include "cosim/errors.hpp"

namespace cosim {

void TraceLog::append(const TraceRecord& r) {
  {
    std::lock_guard lock(mutex_);
    records_.push_back(r);
  }
  cv_.notify_all();
}

void TraceLog::finish() {
  {
    std::lock_guard lock(mutex_);
    finished_ = true;
  }
  cv_.notify_all();
}

bool TraceLog::finished() const {
  std::lock_guard lock(mutex_);
  return finished_;
}

std::size_t TraceLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<TraceRecord> TraceLog::read_from(std::uint64_t from, std::chrono::milliseconds wait) const {
  std::unique_lock lock(mutex_);
  auto available = [&] {
    return finished_ || (!records_.empty() && records_.back().seq >= from);
  };
  cv_.wait_for(lock, wait, available);
  std::vector<TraceRecord> out;
  // seq is dense from 0, but do not rely on it
  auto it = std::lower_bound(records_.begin(), records_.end(), from,
                             [](const TraceRecord& r, std::uint64_t s) { return r.seq < s; });
  out.assign(it, records_.end());
  return out;
}

std::vector<TraceRecord> parse_event_stream(const std::string& body) {
  std::vector<TraceRecord> out;
  std::size_t pos = 0;
  while (true) {
    const auto end = body.find("\n\n", pos);
    if (end == std::string::npos) break;
    std::istringstream block(body.substr(pos, end - pos));
    std::string line;
    std::string data;
    while (std::getline(block, line)) {
      if (line.rfind("data: ", 0) == 0) data += line.substr(6);
    }
    if (!data.empty()) out.push_back(trace_record_from_json(Json::parse(data)));
    pos = end + 2;
  }
  return out;
}

namespace {

void json_reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error_reply(httplib::Response& res, int status, const std::string& message) {
  json_reply(res, status, Json{{"error", message}});
}

}  // namespace

struct ControlServer::Impl {
  Scheduler& scheduler;
  const TraceLog& log;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  Impl(Scheduler& s, const TraceLog& l) : scheduler(s), log(l) {}

  void post_event(const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      return error_reply(res, 400, std::string("malformed JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("sid") || !body["sid"].is_string()) {
      return error_reply(res, 400, "'sid' (string) is required");
    }
    if (!body.contains("time") || !body["time"].is_number_integer()) {
      return error_reply(res, 400, "'time' (integer tick) is required");
    }
    const std::string sid = body["sid"].get<std::string>();
    const Tick time = body["time"].get<Tick>();
    if (time < 0) return error_reply(res, 400, "'time' must be non-negative");
    if (!scheduler.world().rt_factor) {
      return error_reply(res, 409, "external events require real-time pacing (--rt)");
    }
    try {
      const Tick tick = scheduler.inject_external_event(sid, time, "inject");
      json_reply(res, 202, Json{{"sid", sid}, {"tick", tick}});
    } catch (const RejectedError& e) {
      const std::string what = e.what();
      const int status = what.find("unknown") != std::string::npos ? 404 : 422;
      error_reply(res, status, what);
    }
  }

  void get_status(httplib::Response& res) {
    Json body = Json::object();
    body["current_tick"] = scheduler.current_tick();
    body["until"] = scheduler.until();
    body["rt_factor"] = scheduler.world().rt_factor ? Json(*scheduler.world().rt_factor) : Json(nullptr);
    body["finished"] = scheduler.finished() || log.finished();
    json_reply(res, 200, body);
  }

  void get_trace(const httplib::Request& req, httplib::Response& res) {
    std::uint64_t from = 0;
    try {
      if (req.has_param("from")) {
        from = std::stoull(req.get_param_value("from"));
      } else if (req.has_header("Last-Event-ID")) {
        from = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
      }
    } catch (const std::exception&) {
      return error_reply(res, 400, "bad resume position");
    }
    auto next = std::make_shared<std::uint64_t>(from);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, next](std::size_t, httplib::DataSink& sink) {
      while (!stopping.load()) {
        if (!sink.is_writable()) return false;
        auto batch = log.read_from(*next, std::chrono::milliseconds(200));
        if (!batch.empty()) {
          std::string chunk;
          for (const auto& r : batch) {
            std::string line = to_json_line(r);
            if (!line.empty() && line.back() == '\n') line.pop_back();
            chunk += "id: " + std::to_string(r.seq) + "\ndata: " + line + "\n\n";
          }
          *next = batch.back().seq + 1;
          return sink.write(chunk.data(), chunk.size());
        }
        if (log.finished()) {
          sink.done();
          return true;
        }
        // keep-alive comment so dead clients are noticed
        static const std::string ping = ": ping\n\n";
        if (!sink.write(ping.data(), ping.size())) return false;
      }
      sink.done();
      return true;
    });
  }
};

ControlServer::ControlServer(Scheduler& scheduler, const TraceLog& log)
    : impl_(std::make_unique<Impl>(scheduler, log)) {
  auto& srv = impl_->server;
  Impl* impl = impl_.get();
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });
  srv.Post("/events", [impl](const httplib::Request& req, httplib::Response& res) { impl->post_event(req, res); });
  srv.Get("/status", [impl](const httplib::Request&, httplib::Response& res) { impl->get_status(res); });
  srv.Get("/trace", [impl](const httplib::Request& req, httplib::Response& res) { impl->get_trace(req, res); });
}

ControlServer::~ControlServer() { stop(); }

std::uint16_t ControlServer::start(std::uint16_t port) {
  auto& srv = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = srv.bind_to_any_port("127.0.0.1");
  } else if (!srv.bind_to_port("127.0.0.1", port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("control endpoint: cannot bind 127.0.0.1:" + std::to_string(port));
  port_ = static_cast<std::uint16_t>(bound);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  spdlog::info("control endpoint on http://127.0.0.1:{}", port_);
  return port_;
}

void ControlServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->stopping = true;
  impl_->server.stop();
  impl_->thread.join();
}

}  // namespace cosim
