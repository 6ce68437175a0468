// Copyright 2026 The llmtv Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Transformation predictor: the chat prompt codec and the backends that
// answer it (a remote chat-completions service, a structural heuristic,
// and a checker-backed oracle with optional label noise).

#include "llmtv/checker.h"

#include <memory>
#include <mutex>
#include <condition_variable>

namespace llmtv {

enum class Label : uint8_t { Sound, Unsound };

struct PromptBundle {
  std::string system;
  std::string user;
  bool operator==(const PromptBundle &) const = default;
};

/// The fixed system message sent with every prediction request.
extern const std::string_view kSystemText;

/// Separator between source and target IR in the user message (U+2192).
inline constexpr std::string_view kArrow = "\xE2\x86\x92";

/// Prompts estimated above this many tokens are rejected.
inline constexpr size_t kMaxPromptTokens = 4096;

PromptBundle encode_prompt(const TransformationPair &pair);

/// Splits a user message back into (source text, target text).
/// Throws std::invalid_argument when the envelope is malformed.
std::pair<std::string, std::string> decode_user(std::string_view user);

/// Rough token count: one token per three bytes, rounded up.
size_t estimate_tokens(const PromptBundle &prompt);

std::string encode_assistant(Label label, const ReasonSet &reasons);

struct Prediction {
  Label status = Label::Sound;
  ReasonSet reasons; // empty iff status is Sound
  std::string raw;
  std::string backend;
};

class DecodeError : public std::runtime_error {
public:
  enum class Kind : uint8_t { Unparseable, MissingReason };
  DecodeError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

Prediction decode_response(std::string_view text);

class PredictError : public std::runtime_error {
public:
  enum class Kind : uint8_t { Transport, Decode, Auth, TooLarge };
  PredictError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

std::string_view predict_error_name(PredictError::Kind kind);

struct RemoteConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "OPENAI_API_KEY";
  uint64_t request_timeout_ms = 60'000;
  unsigned max_retries = 3;
  uint64_t backoff_ms = 500; // first retry delay; doubles per attempt
  unsigned max_concurrent = 4;
  double temperature = 0.0;
};

struct BackendConfig {
  enum class Kind : uint8_t { Remote, Heuristic, Oracle };

  Kind kind = Kind::Heuristic;
  RemoteConfig remote;
  double noise_rate = 0.0; // Oracle only, in [0, 1]
  uint64_t seed = 1;       // Oracle only
  CheckConfig oracle_check = default_oracle_check();

  static CheckConfig default_oracle_check();
};

std::optional<BackendConfig::Kind> backend_kind_from_name(std::string_view name);
std::string_view backend_kind_name(BackendConfig::Kind kind);

class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  /// Answers an already-encoded prompt. Throws PredictError.
  virtual Prediction complete(const TransformationPair &pair,
                              const PromptBundle &prompt) = 0;
};

/// Throws std::invalid_argument for an invalid configuration.
std::unique_ptr<Backend> make_backend(const BackendConfig &cfg);

/// Encodes the pair, applies the token guard and queries the backend.
Prediction predict(const TransformationPair &pair, Backend &backend);
Prediction predict(const TransformationPair &pair, const BackendConfig &cfg);

/// Client for an OpenAI-compatible chat-completions endpoint.
class RemoteBackend final : public Backend {
public:
  explicit RemoteBackend(RemoteConfig cfg);

  std::string id() const override;
  Prediction complete(const TransformationPair &pair,
                      const PromptBundle &prompt) override;

  /// JSON request body for a prompt.
  std::string request_body(const PromptBundle &prompt) const;

private:
  std::string post_once(const std::string &body, const std::string &key,
                        bool &retryable);

  RemoteConfig cfg_;
  std::string scheme_host_;
  std::string path_;
  std::mutex mu_;
  std::condition_variable cv_;
  unsigned in_flight_ = 0;
};

} // namespace llmtv
