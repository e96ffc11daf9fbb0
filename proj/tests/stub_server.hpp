#pragma once

// Include after every Eigen-using header: <httplib.h> pulls in <resolv.h>,
// whose _res macro breaks Eigen.
#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

namespace testing_support {

struct StubReply {
  int status = 200;
  std::string body;
};

struct StubRequest {
  std::string path;
  std::string body;
  httplib::Headers headers;
};

// Local HTTP server answering every POST through `handler`.
class StubServer {
 public:
  using Handler = std::function<StubReply(const StubRequest&, int call)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post(R"(.*)", [this](const httplib::Request& req, httplib::Response& res) {
      StubRequest r{req.path, req.body, req.headers};
      int call;
      {
        std::lock_guard lock(mu_);
        requests_.push_back(r);
        call = static_cast<int>(requests_.size());
      }
      const StubReply reply = handler_(r, call);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string base_url(const std::string& prefix = "/v1") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  std::vector<StubRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<StubRequest> requests_;
};

// An OpenAI-style chat completion carrying `content`.
inline std::string openai_reply(const std::string& content) {
  nlohmann::json j = {{"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})},
                      {"usage", {{"prompt_tokens", 120}, {"completion_tokens", 45}}}};
  return j.dump();
}

}  // namespace testing_support
