#pragma once

// In-process OpenAI-style chat-completions server for judge tests. Replies
// are deterministic functions of the video name found in the system prompt.

#include <array>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace t2m::testing {

/// Sub-scores the mock assigns to a video; always within range.
std::array<int, 5> mock_scores(const std::string& video_name);

/// Well-formed reply JSON for the given scores. `verdict` overrides the band
/// verdict when non-empty.
std::string judge_reply(const std::string& video_name, const std::array<int, 5>& scores,
                        const std::string& verdict = "");

struct MockReply {
  int status = 200;
  std::string content;  // message content; ignored unless status == 200
  int delay_ms = 0;
};

class MockJudgeServer {
 public:
  using Handler = std::function<MockReply(const std::string& video_name, int call_for_video)>;

  /// Default handler answers mock_scores() in a code fence for every video.
  explicit MockJudgeServer(Handler handler = {});
  ~MockJudgeServer();

  std::string endpoint() const;  // http://127.0.0.1:<port>/v1/chat/completions
  int max_in_flight() const noexcept { return max_in_flight_; }
  int total_calls() const noexcept { return total_; }
  std::string last_authorization() const;
  std::string last_body() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  Handler handler_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::atomic<int> total_{0};
  mutable std::mutex mu_;
  std::map<std::string, int> calls_;
  std::string last_auth_;
  std::string last_body_;
};

}  // namespace t2m::testing
