#pragma once

// Vision-LLM judge: prompt assembly, response validation, an OpenAI-style
// chat-completions client with bounded retries and concurrency, and the
// LLM-vs-human score gap.

#include "t2m/error.hpp"

#include <array>
#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2m::judge {

enum class Verdict { Aligned, Partial, Mismatch };

inline constexpr int kAlignedMin = 50;
inline constexpr int kPartialMin = 30;
inline constexpr int kOverallMax = 60;
inline constexpr std::size_t kMaxTextLength = 200;  // code points
inline constexpr std::size_t kDefaultConcurrency = 4;
inline constexpr const char* kApiKeyEnv = "T2M_JUDGE_API_KEY";

inline constexpr std::array<const char*, 5> kSubScoreNames = {
    "extra_non_instruction_actions", "action_completeness", "multi_stage_order_correctness",
    "body_part_understanding", "physical_plausibility"};
inline constexpr std::array<int, 5> kSubScoreMax = {10, 20, 10, 10, 10};

std::string_view to_string(Verdict v) noexcept;

/// Band of an overall score in [0, 60]; OutOfRange otherwise.
Verdict verdict_for(int overall);

/// The raw template with both placeholders intact.
std::string_view prompt_template() noexcept;

/// Doubles '"' and drops control characters.
std::string escape(std::string_view text);

/// Template with every placeholder occurrence substituted by escaped input.
std::string build_prompt(std::string_view video_name, std::string_view prompt_text);

struct JudgeResult {
  std::string video_name;
  std::string prompt_name;
  std::array<int, 5> scores{};  // kSubScoreNames order
  int overall = 0;
  Verdict verdict = Verdict::Mismatch;
  std::string frame_observation;
  std::string prompt_overlap;
  std::string issues_found;
};

/// Parses and validates a model reply. Unless strict, a markdown code fence
/// around the object is tolerated. Range, type, sum and length violations
/// raise SchemaViolation; a verdict outside its band raises BandMismatch.
JudgeResult parse_result(std::string_view content, bool strict = false);

struct JudgeRequest {
  std::string video_name;
  std::string prompt_text;
  std::string image;  // encoded bytes
  std::string media_type = "image/png";
  std::string model;
  std::string endpoint;  // full URL of the chat-completions route
  double timeout_seconds = 60.0;

  /// InvariantViolation on empty prompt text or image.
  void validate() const;
};

/// Chat-completions body: the prompt as system message, the strip image as a
/// base64 data URL in the user message.
std::string request_body(const JudgeRequest& req);

std::string base64_encode(std::string_view bytes);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  // Replaced in tests to avoid real waits; defaults to this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 2
};

struct SubmitOptions {
  RetryPolicy retry;
  std::string api_key;  // empty: read kApiKeyEnv
  bool strict = false;
};

/// One request with retries on transport errors, 429 and 5xx. Validation
/// failures are never retried. Exhausted retries raise RateLimited when the
/// last answer was 429, else Transport.
JudgeResult submit(const JudgeRequest& req, const SubmitOptions& options = {});

struct JudgeOutcome {
  std::optional<JudgeResult> result;
  Errc code = Errc::InvariantViolation;
  std::string error;
  std::string raw;  // model reply text when one was received
  int attempts = 0;
};

/// submit() over all requests with at most `concurrency` in flight. Outcomes
/// are returned in input order.
std::vector<JudgeOutcome> submit_all(std::span<const JudgeRequest> requests,
                                     const SubmitOptions& options,
                                     std::size_t concurrency = kDefaultConcurrency);

struct PromptScores {
  std::string prompt_id;
  std::array<double, 5> scores{};
};

PromptScores to_scores(const std::string& prompt_id, const JudgeResult& result);

/// Per-dimension mean of |llm - human| over prompts. Lists must be non-empty
/// and aligned by prompt_id, else Misaligned.
std::array<double, 5> llm_selection_gap(std::span<const PromptScores> llm,
                                        std::span<const PromptScores> human);

}  // namespace t2m::judge
