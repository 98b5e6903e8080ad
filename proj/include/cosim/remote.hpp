#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "cosim/api.hpp"
#include "cosim/net.hpp"
#include "cosim/wire.hpp"

namespace cosim {

/// Scheduler-side proxy for a simulator living behind the wire protocol.
/// Requests are strictly sequential; a reader thread routes responses to the
/// waiting call and set_event notifies to the attached event channel.
class RemoteSimulator final : public Simulator {
 public:
  explicit RemoteSimulator(std::unique_ptr<net::LineChannel> channel,
                           std::chrono::milliseconds call_timeout = std::chrono::seconds(60));
  ~RemoteSimulator() override;

  SimulatorMeta init(const std::string& sid, TimeResolution resolution,
                     const Json& sim_params) override;
  std::vector<EntityDescriptor> create(int num, const std::string& model,
                                       const Json& model_params) override;
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;
  void stop() override;
  void attach_event_channel(EventChannel channel) override;

 private:
  Json call(const std::string& method, Json params);
  void read_loop();

  std::unique_ptr<net::LineChannel> channel_;
  std::chrono::milliseconds call_timeout_;
  std::string sid_ = "remote";
  std::uint64_t next_id_ = 1;

  std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<wire::Message> reply_;
  std::string failure_;
  bool closed_ = false;
  EventChannel events_;
  bool stopped_ = false;

  std::thread reader_;
};

/// Simulator-side request loop: sends the hello notify, then answers requests
/// until "stop" or EOF. Errors thrown by `sim` become error responses.
void serve_simulator(net::LineChannel& channel, Simulator& sim, const std::string& sid);

/// Accepts connections on a listener and matches them to simulator ids via
/// their hello notify. Connections that announce another sid are kept for a
/// later await.
class HandshakeBroker {
 public:
  explicit HandshakeBroker(net::TcpListener& listener) : listener_(listener) {}

  /// Throws ProtocolError on timeout or when `still_alive` turns false.
  std::unique_ptr<net::LineChannel> await(const std::string& sid,
                                          std::chrono::milliseconds timeout,
                                          const std::function<bool()>& still_alive = {});

 private:
  net::TcpListener& listener_;
  std::map<std::string, std::unique_ptr<net::LineChannel>> parked_;
};

}  // namespace cosim
