#include <doctest.h>

#include "mock_judge.hpp"
#include "t2m/error.hpp"
#include "t2m/judge.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <mutex>
#include <random>

using namespace t2m;
using namespace t2m::judge;
using t2m::testing::MockJudgeServer;
using t2m::testing::MockReply;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected t2m::Error");
  return Errc::Config;
}

std::string reply_with(const std::array<int, 5>& s, int overall, const std::string& verdict) {
  auto doc = nlohmann::json::parse(t2m::testing::judge_reply("v", s, verdict));
  doc["overall_score"] = overall;
  return doc.dump();
}

JudgeRequest request_for(const std::string& endpoint, const std::string& video) {
  JudgeRequest r;
  r.video_name = video;
  r.prompt_text = "a person walks forward and turns left";
  r.image = std::string("\x89PNG\r\n\x1a\n", 8) + "strip";
  r.model = "mock-vlm";
  r.endpoint = endpoint;
  r.timeout_seconds = 5;
  return r;
}

SubmitOptions fast_options(std::vector<std::chrono::milliseconds>* sleeps = nullptr) {
  SubmitOptions o;
  o.api_key = "test-key";
  auto mu = std::make_shared<std::mutex>();
  o.retry.sleep = [sleeps, mu](std::chrono::milliseconds d) {
    if (sleeps) {
      std::lock_guard lock(*mu);
      sleeps->push_back(d);
    }
  };
  return o;
}

}  // namespace

TEST_SUITE("judge") {
  TEST_CASE("verdict bands") {
    CHECK(kAlignedMin == 50);
    CHECK(kPartialMin == 30);
    CHECK(verdict_for(55) == Verdict::Aligned);
    CHECK(verdict_for(50) == Verdict::Aligned);
    CHECK(verdict_for(49) == Verdict::Partial);
    CHECK(verdict_for(30) == Verdict::Partial);
    CHECK(verdict_for(29) == Verdict::Mismatch);
    CHECK(verdict_for(0) == Verdict::Mismatch);
    CHECK(code_of([] { verdict_for(61); }) == Errc::OutOfRange);
    CHECK(code_of([] { verdict_for(-1); }) == Errc::OutOfRange);
  }

  TEST_CASE("prompt assembly") {
    const auto p = build_prompt("clip_001", "a man \"jumps\"");
    CHECK(p.find("Video Name: clip_001\n") != std::string::npos);
    CHECK(p.find("\"\"\"a man \"\"jumps\"\"\"\"\"") != std::string::npos);
    CHECK(p.find("{video_name_escaped}") == std::string::npos);
    CHECK(p.find("{prompt_text_escaped}") == std::string::npos);
    // the prompt text placeholder appears once, the name twice
    std::size_t n = 0;
    for (auto pos = p.find("a man \"\"jumps\"\""); pos != std::string::npos;
         pos = p.find("a man \"\"jumps\"\"", pos + 1)) {
      ++n;
    }
    CHECK(n == 1);
    std::size_t names = 0;
    for (auto pos = p.find("clip_001"); pos != std::string::npos; pos = p.find("clip_001", pos + 1)) ++names;
    CHECK(names == 2);
    CHECK(build_prompt("clip_001", "a man \"jumps\"") == p);
    // substituted text is never rescanned
    const auto sneaky = build_prompt("{prompt_text_escaped}", "x");
    CHECK(sneaky.find("Video Name: {prompt_text_escaped}\n") != std::string::npos);
    CHECK(escape("a\tb\n\x7f\"") == "ab\"\"");
    CHECK(prompt_template().find("{video_name_escaped}") != std::string_view::npos);
  }

  TEST_CASE("reply validation") {
    CHECK(parse_result(reply_with({8, 18, 9, 9, 9}, 53, "aligned")).overall == 53);
    CHECK(code_of([] { parse_result(reply_with({8, 18, 9, 9, 9}, 53, "partial")); }) == Errc::BandMismatch);
    CHECK(code_of([] { parse_result(reply_with({8, 25, 9, 9, 9}, 60, "aligned")); }) == Errc::SchemaViolation);
    CHECK(code_of([] { parse_result(reply_with({8, 18, 9, 9, 9}, 52, "aligned")); }) == Errc::SchemaViolation);
    CHECK(code_of([] { parse_result(reply_with({8, 18, 9, 9, 9}, 53, "great")); }) == Errc::SchemaViolation);
    CHECK(code_of([] { parse_result("not json"); }) == Errc::SchemaViolation);

    auto doc = nlohmann::json::parse(reply_with({1, 2, 3, 4, 5}, 15, "mismatch"));
    doc["issues_found"] = std::string(201, 'x');
    CHECK(code_of([&] { parse_result(doc.dump()); }) == Errc::SchemaViolation);
    doc["issues_found"] = std::string(200, 'x');
    CHECK(parse_result(doc.dump()).issues_found.size() == 200);
    doc["scores"]["physical_plausibility"] = 5.5;
    CHECK(code_of([&] { parse_result(doc.dump()); }) == Errc::SchemaViolation);

    const std::string fenced = "```json\n" + reply_with({8, 18, 9, 9, 9}, 53, "aligned") + "\n```";
    CHECK(parse_result(fenced).verdict == Verdict::Aligned);
    CHECK(code_of([&] { parse_result(fenced, true); }) == Errc::SchemaViolation);
  }

  TEST_CASE("base64 and request body") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("Man") == "TWFu");
    CHECK(base64_encode("Ma") == "TWE=");
    CHECK(base64_encode("M") == "TQ==");
    const auto req = request_for("http://127.0.0.1:1/v1/chat/completions", "clip_9");
    const auto body = nlohmann::json::parse(request_body(req));
    CHECK(body["model"] == "mock-vlm");
    CHECK(body["temperature"] == 0);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == build_prompt("clip_9", req.prompt_text));
    const std::string url = body["messages"][1]["content"][0]["image_url"]["url"];
    CHECK(url == "data:image/png;base64," + base64_encode(req.image));

    auto bad = req;
    bad.prompt_text.clear();
    CHECK(code_of([&] { bad.validate(); }) == Errc::InvariantViolation);
    bad = req;
    bad.image.clear();
    CHECK(code_of([&] { bad.validate(); }) == Errc::InvariantViolation);
  }

  TEST_CASE("submit against the mock") {
    MockJudgeServer server;
    const auto res = submit(request_for(server.endpoint(), "clip_42"), fast_options());
    CHECK(res.video_name == "clip_42");
    CHECK(res.scores == t2m::testing::mock_scores("clip_42"));
    CHECK(server.last_authorization() == "Bearer test-key");
    const auto again = submit(request_for(server.endpoint(), "clip_42"), fast_options());
    CHECK(again.scores == res.scores);
    CHECK(again.frame_observation == res.frame_observation);
  }

  TEST_CASE("retries with exponential backoff then succeeds") {
    MockJudgeServer server([](const std::string& video, int call) {
      if (call <= 2) return MockReply{call == 1 ? 503 : 429, "", 0};
      return MockReply{200, t2m::testing::judge_reply(video, t2m::testing::mock_scores(video)), 0};
    });
    std::vector<std::chrono::milliseconds> sleeps;
    const auto out = submit_all(std::vector{request_for(server.endpoint(), "r1")}, fast_options(&sleeps), 1);
    REQUIRE(out[0].result.has_value());
    CHECK(out[0].attempts == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0].count() == 1000);
    CHECK(sleeps[1].count() == 2000);
    CHECK(server.total_calls() == 3);
  }

  TEST_CASE("retry exhaustion and non-retryable answers") {
    MockJudgeServer limited([](const std::string&, int) { return MockReply{429, "", 0}; });
    std::vector<std::chrono::milliseconds> sleeps;
    const auto out = submit_all(std::vector{request_for(limited.endpoint(), "x")}, fast_options(&sleeps), 1);
    CHECK(out[0].code == Errc::RateLimited);
    CHECK(out[0].attempts == 5);
    CHECK(limited.total_calls() == 5);
    CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000), std::chrono::milliseconds(2000),
                                                           std::chrono::milliseconds(4000), std::chrono::milliseconds(8000)});

    MockJudgeServer rejecting([](const std::string&, int) { return MockReply{400, "", 0}; });
    CHECK(code_of([&] { submit(request_for(rejecting.endpoint(), "x"), fast_options()); }) == Errc::Transport);
    CHECK(rejecting.total_calls() == 1);

    MockJudgeServer invalid([](const std::string& v, int) {
      return MockReply{200, reply_with({8, 18, 9, 9, 9}, 53, "partial"), 0};
      (void)v;
    });
    CHECK(code_of([&] { submit(request_for(invalid.endpoint(), "x"), fast_options()); }) == Errc::BandMismatch);
    CHECK(invalid.total_calls() == 1);
  }

  TEST_CASE("unreachable endpoint is a transport error") {
    std::string endpoint;
    {
      MockJudgeServer gone;
      endpoint = gone.endpoint();
    }
    const auto out = submit_all(std::vector{request_for(endpoint, "x")}, fast_options(), 1);
    CHECK(out[0].code == Errc::Transport);
    CHECK(out[0].attempts == 5);
  }

  TEST_CASE("concurrency limit and ordered outcomes") {
    MockJudgeServer server([](const std::string& video, int) {
      return MockReply{200, t2m::testing::judge_reply(video, t2m::testing::mock_scores(video)), 25};
    });
    std::vector<JudgeRequest> reqs;
    for (int i = 0; i < 32; ++i) reqs.push_back(request_for(server.endpoint(), "clip_" + std::to_string(i)));
    const auto out = submit_all(reqs, fast_options(), 4);
    CHECK(server.max_in_flight() <= 4);
    CHECK(server.max_in_flight() >= 2);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      REQUIRE(out[i].result.has_value());
      CHECK(out[i].result->video_name == reqs[i].video_name);
      CHECK(out[i].attempts == 1);
    }
  }

  TEST_CASE("selection gap") {
    std::vector<PromptScores> llm = {{"p", {3, 0, 0, 0, 0}}};
    std::vector<PromptScores> human = {{"p", {5, 0, 0, 0, 0}}};
    CHECK(llm_selection_gap(llm, human)[0] == 2.0);
    CHECK(llm_selection_gap(llm, llm) == std::array<double, 5>{});

    // 50 prompts with known fractional human averages
    std::mt19937_64 rng(2025);
    llm.clear();
    human.clear();
    std::array<long double, 5> want{};
    for (int p = 0; p < 50; ++p) {
      const std::string id = "prompt_" + std::to_string(p);
      const auto s = t2m::testing::mock_scores(id);
      PromptScores l{id, {}}, h{id, {}};
      for (int d = 0; d < 5; ++d) {
        l.scores[d] = s[d];
        h.scores[d] = static_cast<double>(rng() % 41) / 4.0;  // rater means in quarter steps
        want[d] += std::fabs(static_cast<long double>(l.scores[d]) - h.scores[d]);
      }
      llm.push_back(l);
      human.push_back(h);
    }
    const auto gap = llm_selection_gap(llm, human);
    for (int d = 0; d < 5; ++d) CHECK(std::abs(gap[d] - static_cast<double>(want[d] / 50)) <= 1e-12);

    auto shuffled = human;
    std::swap(shuffled[0], shuffled[1]);
    CHECK(code_of([&] { llm_selection_gap(llm, shuffled); }) == Errc::Misaligned);
    CHECK(code_of([&] { llm_selection_gap({}, {}); }) == Errc::Misaligned);
  }
}
