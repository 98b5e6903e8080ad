// cosim_peer: serves a builtin simulator over the wire protocol.
//   cosim_peer [--fault KIND] <builtin> <host> <port> <sid>
// Faults (for error-path tests): "garbage" answers the first step with a
// non-JSON line, "stall-step" returns next_step == time.

#include <CLI11.hpp>

#include <iostream>

#include "cosim/errors.hpp"
#include "cosim/log.hpp"
#include "cosim/remote.hpp"
#include "cosim/sims.hpp"

namespace {

class StallingSim final : public cosim::Simulator {
 public:
  explicit StallingSim(std::unique_ptr<cosim::Simulator> inner) : inner_(std::move(inner)) {}
  cosim::SimulatorMeta init(const std::string& sid, cosim::TimeResolution res, const cosim::Json& p) override {
    return inner_->init(sid, res, p);
  }
  std::vector<cosim::EntityDescriptor> create(int num, const std::string& model, const cosim::Json& p) override {
    return inner_->create(num, model, p);
  }
  cosim::StepResult step(cosim::Tick time, const cosim::InputBundle& inputs, cosim::Tick max_advance) override {
    inner_->step(time, inputs, max_advance);
    return {time};
  }
  cosim::OutputBundle get_data(const cosim::OutputRequest& r) override { return inner_->get_data(r); }
  void stop() override { inner_->stop(); }

 private:
  std::unique_ptr<cosim::Simulator> inner_;
};

}  // namespace

int main(int argc, char** argv) {
  cosim::configure_logging();
  CLI::App app{"wire-protocol peer for builtin simulators"};
  std::string builtin, host, sid, fault;
  int port = 0;
  app.add_option("--fault", fault, "inject a fault")->check(CLI::IsMember({"garbage", "stall-step"}));
  app.add_option("builtin", builtin)->required();
  app.add_option("host", host)->required();
  app.add_option("port", port)->required()->check(CLI::Range(1, 65535));
  app.add_option("sid", sid)->required();
  CLI11_PARSE(app, argc, argv);

  try {
    auto channel = cosim::net::connect_tcp(host, static_cast<std::uint16_t>(port));
    std::unique_ptr<cosim::Simulator> sim = cosim::sims::make_builtin(builtin);
    if (fault == "stall-step") sim = std::make_unique<StallingSim>(std::move(sim));
    if (fault == "garbage") {
      // hello, then answer everything up to the first step normally
      channel->write(cosim::wire::encode_message(cosim::wire::Message::notify(0, "hello", {{"sid", sid}})));
      while (auto line = channel->read_line()) {
        auto msg = cosim::wire::decode_message(*line);
        if (msg.method == "step") {
          channel->write("this is not json\n");
          continue;
        }
        cosim::Json result;
        if (msg.method == "init") {
          result = cosim::to_json(sim->init(sid, cosim::TimeResolution(msg.params.value("time_resolution", 1.0)),
                                            msg.params.value("sim_params", cosim::Json::object())));
        } else if (msg.method == "create") {
          result = cosim::Json::array();
          for (const auto& e : sim->create(msg.params["num"].get<int>(), msg.params["model"].get<std::string>(),
                                           msg.params.value("model_params", cosim::Json::object()))) {
            result.push_back(cosim::to_json(e));
          }
        } else if (msg.method == "stop") {
          channel->write(cosim::wire::encode_message(cosim::wire::Message::response(msg.id, nullptr)));
          break;
        }
        channel->write(cosim::wire::encode_message(cosim::wire::Message::response(msg.id, result)));
      }
      return 0;
    }
    cosim::serve_simulator(*channel, *sim, sid);
  } catch (const std::exception& e) {
    std::cerr << "cosim_peer: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
