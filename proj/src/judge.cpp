#include "t2m/judge.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace t2m::judge {

namespace {

constexpr std::string_view kTemplate =
#include "judge_template.inc"
    ;

constexpr std::string_view kVideoPlaceholder = "{video_name_escaped}";
constexpr std::string_view kPromptPlaceholder = "{prompt_text_escaped}";

[[noreturn]] void schema(const std::string& field, const std::string& reason) {
  throw Error(Errc::SchemaViolation, field + ": " + reason);
}

std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string_view strip_fence(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  s = s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  if (s.substr(0, 3) != "```") return s;
  const auto nl = s.find('\n');
  if (nl == std::string_view::npos) return s;
  s.remove_prefix(nl + 1);
  if (s.size() >= 3 && s.substr(s.size() - 3) == "```") s.remove_suffix(3);
  return s;
}

std::string text_field(const nlohmann::json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) schema(key, "missing");
    return {};
  }
  if (!it->is_string()) schema(key, "not a string");
  std::string s = it->get<std::string>();
  if (code_points(s) > kMaxTextLength) schema(key, "longer than 200 characters");
  return s;
}

int int_field(const nlohmann::json& obj, const char* key, int max) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(key, "missing");
  if (!it->is_number_integer()) schema(key, "not an integer");
  const auto v = it->get<long long>();
  if (v < 0 || v > max) schema(key, std::to_string(v) + " outside [0, " + std::to_string(max) + "]");
  return static_cast<int>(v);
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::Config, "endpoint lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

struct Attempted {
  JudgeResult result;
  int attempts = 0;
};

// Sends with retries; `raw` receives the model reply text once one arrives.
Attempted submit_impl(const JudgeRequest& req, const SubmitOptions& opt, std::string& raw,
                      int& attempts) {
  req.validate();
  std::string key = opt.api_key;
  if (key.empty()) {
    if (const char* env = std::getenv(kApiKeyEnv)) key = env;
  }
  const Endpoint ep = split_endpoint(req.endpoint);
  const std::string body = request_body(req);

  httplib::Client client(ep.origin);
  const auto timeout = std::chrono::duration<double>(req.timeout_seconds);
  const auto secs = static_cast<time_t>(std::floor(timeout.count()));
  const auto usecs = static_cast<time_t>((timeout.count() - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  const int max_attempts = std::max(1, opt.retry.max_attempts);
  Errc last = Errc::Transport;
  std::string last_msg;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto d = opt.retry.delay_before(attempt);
      if (opt.retry.sleep) {
        opt.retry.sleep(d);
      } else {
        std::this_thread::sleep_for(d);
      }
    }
    attempts = attempt;
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last = Errc::Transport;
      last_msg = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429) {
      last = Errc::RateLimited;
      last_msg = "HTTP 429";
      continue;
    }
    if (res->status >= 500) {
      last = Errc::Transport;
      last_msg = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(Errc::Transport, "HTTP " + std::to_string(res->status));
    }
    const auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) schema("response", "body is not JSON");
    const nlohmann::json* content = nullptr;
    if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
      const auto& choice = doc["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content")) {
        content = &choice["message"]["content"];
      }
    }
    if (!content || !content->is_string()) schema("choices[0].message.content", "missing");
    raw = content->get<std::string>();
    return {parse_result(raw, opt.strict), attempt};
  }
  throw Error(last, last_msg + " after " + std::to_string(max_attempts) + " attempts");
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Aligned: return "aligned";
    case Verdict::Partial: return "partial";
    case Verdict::Mismatch: return "mismatch";
  }
  return "mismatch";
}

Verdict verdict_for(int overall) {
  if (overall < 0 || overall > kOverallMax) {
    throw Error(Errc::OutOfRange, "overall score " + std::to_string(overall));
  }
  if (overall >= kAlignedMin) return Verdict::Aligned;
  if (overall >= kPartialMin) return Verdict::Partial;
  return Verdict::Mismatch;
}

std::string_view prompt_template() noexcept { return kTemplate; }

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7F) continue;
    out += c;
    if (c == '"') out += '"';
  }
  return out;
}

std::string build_prompt(std::string_view video_name, std::string_view prompt_text) {
  // single pass, so substituted text is never rescanned for placeholders
  const std::string name = escape(video_name);
  const std::string text = escape(prompt_text);
  std::string out;
  std::size_t pos = 0;
  while (pos < kTemplate.size()) {
    const auto brace = kTemplate.find('{', pos);
    if (brace == std::string_view::npos) break;
    out.append(kTemplate.substr(pos, brace - pos));
    if (kTemplate.substr(brace, kVideoPlaceholder.size()) == kVideoPlaceholder) {
      out += name;
      pos = brace + kVideoPlaceholder.size();
    } else if (kTemplate.substr(brace, kPromptPlaceholder.size()) == kPromptPlaceholder) {
      out += text;
      pos = brace + kPromptPlaceholder.size();
    } else {
      out += '{';
      pos = brace + 1;
    }
  }
  if (pos < kTemplate.size()) out.append(kTemplate.substr(pos));
  return out;
}

JudgeResult parse_result(std::string_view content, bool strict) {
  const std::string_view body = strict ? content : strip_fence(content);
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) schema("response", "not valid JSON");
  if (!doc.is_object()) schema("response", "not a JSON object");

  JudgeResult r;
  r.video_name = text_field(doc, "video_name", true);
  r.prompt_name = text_field(doc, "prompt_name", false);
  auto scores = doc.find("scores");
  if (scores == doc.end() || !scores->is_object()) schema("scores", "missing object");
  int sum = 0;
  for (std::size_t i = 0; i < kSubScoreNames.size(); ++i) {
    r.scores[i] = int_field(*scores, kSubScoreNames[i], kSubScoreMax[i]);
    sum += r.scores[i];
  }
  r.overall = int_field(doc, "overall_score", kOverallMax);
  if (r.overall != sum) {
    schema("overall_score", std::to_string(r.overall) + " != sub-score sum " + std::to_string(sum));
  }
  const std::string verdict = text_field(doc, "verdict", true);
  if (verdict == "aligned") {
    r.verdict = Verdict::Aligned;
  } else if (verdict == "partial") {
    r.verdict = Verdict::Partial;
  } else if (verdict == "mismatch") {
    r.verdict = Verdict::Mismatch;
  } else {
    schema("verdict", "unknown value '" + verdict + "'");
  }
  r.frame_observation = text_field(doc, "frame_observation", true);
  r.prompt_overlap = text_field(doc, "prompt_overlap", true);
  r.issues_found = text_field(doc, "issues_found", true);

  if (verdict_for(r.overall) != r.verdict) {
    throw Error(Errc::BandMismatch, "overall " + std::to_string(r.overall) + " with verdict " +
                                        verdict);
  }
  return r;
}

void JudgeRequest::validate() const {
  if (prompt_text.empty()) throw Error(Errc::InvariantViolation, "empty prompt text");
  if (image.empty()) throw Error(Errc::InvariantViolation, "empty strip image");
  if (video_name.empty()) throw Error(Errc::InvariantViolation, "empty video name");
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string request_body(const JudgeRequest& req) {
  nlohmann::json image_part = {
      {"type", "image_url"},
      {"image_url", {{"url", "data:" + req.media_type + ";base64," + base64_encode(req.image)}}}};
  nlohmann::json body = {
      {"model", req.model},
      {"temperature", 0},
      {"messages",
       nlohmann::json::array({
           {{"role", "system"}, {"content", build_prompt(req.video_name, req.prompt_text)}},
           {{"role", "user"}, {"content", nlohmann::json::array({image_part})}},
       })},
  };
  return body.dump();
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  const double scale = std::pow(factor, std::max(0, attempt - 2));
  return std::chrono::milliseconds(
      static_cast<long long>(std::llround(static_cast<double>(base_delay.count()) * scale)));
}

JudgeResult submit(const JudgeRequest& req, const SubmitOptions& options) {
  std::string raw;
  int attempts = 0;
  return submit_impl(req, options, raw, attempts).result;
}

std::vector<JudgeOutcome> submit_all(std::span<const JudgeRequest> requests,
                                     const SubmitOptions& options, std::size_t concurrency) {
  std::vector<JudgeOutcome> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      JudgeOutcome& o = out[i];
      try {
        o.result = submit_impl(requests[i], options, o.raw, o.attempts).result;
      } catch (const Error& e) {
        o.code = e.code();
        o.error = e.what();
      }
    }
  };
  const std::size_t k = std::max<std::size_t>(1, std::min(concurrency, requests.size()));
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (std::size_t t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

PromptScores to_scores(const std::string& prompt_id, const JudgeResult& result) {
  PromptScores p;
  p.prompt_id = prompt_id;
  for (std::size_t i = 0; i < 5; ++i) p.scores[i] = result.scores[i];
  return p;
}

std::array<double, 5> llm_selection_gap(std::span<const PromptScores> llm,
                                        std::span<const PromptScores> human) {
  if (llm.empty() || llm.size() != human.size()) {
    throw Error(Errc::Misaligned, std::to_string(llm.size()) + " LLM rows vs " +
                                      std::to_string(human.size()) + " human rows");
  }
  std::array<double, 5> sum{};
  for (std::size_t p = 0; p < llm.size(); ++p) {
    if (llm[p].prompt_id != human[p].prompt_id) {
      throw Error(Errc::Misaligned, llm[p].prompt_id + " vs " + human[p].prompt_id);
    }
    for (std::size_t d = 0; d < 5; ++d) sum[d] += std::abs(llm[p].scores[d] - human[p].scores[d]);
  }
  for (double& s : sum) s /= static_cast<double>(llm.size());
  return sum;
}

}  // namespace t2m::judge
