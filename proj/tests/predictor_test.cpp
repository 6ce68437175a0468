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

#include "support/fixtures.h"

#include <httplib.h>
#include <json.hpp>

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace llmtv;

namespace {

std::string golden(const std::string &name) {
  return read_file(std::string(LLMTV_GOLDEN_DIR) + "/" + name);
}

TEST(Prompt, GoldenSystemText) {
  EXPECT_EQ(std::string(kSystemText), golden("system_text.txt"));
}

TEST(Prompt, GoldenIdentityUser) {
  PromptBundle p = encode_prompt(fixtures::load("identity"));
  EXPECT_EQ(p.system, golden("system_text.txt"));
  EXPECT_EQ(p.user, golden("identity_user.txt"));
}

TEST(Prompt, SystemTextHeadings) {
  const std::string s(kSystemText);
  for (const char *heading :
       {"Undefined Behavior Consistency", "Return Domain Consistency",
        "Poison Value Propagation", "Undefined Value Handling",
        "Return Value Consistency", "Memory State Refinement",
        "Special Value Injection", "Step-by-Step Computation and Analysis"})
    EXPECT_NE(s.find(heading), std::string::npos) << heading;
  EXPECT_NE(s.find("Inject specific values into both original and "
                   "transformed IR"),
            std::string::npos);
}

TEST(Prompt, Deterministic) {
  auto a = encode_prompt(fixtures::load("hoist_udiv"));
  auto b = encode_prompt(fixtures::load("hoist_udiv"));
  EXPECT_EQ(a, b);
}

TEST(Prompt, UserRoundTrip) {
  auto pair = fixtures::load("pad_top_loop");
  auto [src, tgt] = decode_user(encode_prompt(pair).user);
  EXPECT_EQ(parse_function(src), pair.src);
  EXPECT_EQ(parse_function(tgt), pair.tgt);
  EXPECT_THROW(decode_user("hello"), std::invalid_argument);
  EXPECT_THROW(decode_user("Transformation: a b"), std::invalid_argument);
}

TEST(Prompt, TokenEstimate) {
  PromptBundle p{"abc", "abcd"};
  EXPECT_EQ(estimate_tokens(p), 3u);
  PromptBundle q{"", ""};
  EXPECT_EQ(estimate_tokens(q), 0u);
}

// A straight-line pair whose printed size exceeds the prompt limit.
TransformationPair huge_pair() {
  std::string body;
  std::string prev = "%x";
  for (int i = 0; i < 400; ++i) {
    std::string r = "%v" + std::to_string(i);
    body += "  " + r + " = add i8 " + prev + ", 1\n";
    prev = r;
  }
  body += "  ret i8 " + prev;
  std::string f = fixtures::fn_i8(body);
  return fixtures::pair(f, f);
}

TEST(Prompt, TokenGuard) {
  auto pair = huge_pair();
  EXPECT_GT(estimate_tokens(encode_prompt(pair)), kMaxPromptTokens);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::Heuristic;
  try {
    predict(pair, cfg);
    FAIL() << "expected PredictError";
  } catch (const PredictError &e) {
    EXPECT_EQ(e.kind(), PredictError::Kind::TooLarge);
  }
  EXPECT_NO_THROW(predict(fixtures::load("identity"), cfg));
}

TEST(Assistant, Encoding) {
  EXPECT_EQ(encode_assistant(Label::Sound, {}),
            "Transformation status: SOUND Reason: none");
  EXPECT_EQ(encode_assistant(Label::Unsound, {UnsoundReason::Memory}),
            "Transformation status: UNSOUND Reason: memory");
  EXPECT_EQ(encode_assistant(Label::Unsound, {UnsoundReason::NewUB,
                                              UnsoundReason::ReturnValue}),
            "Transformation status: UNSOUND Reason: return values, new "
            "undefined behavior");
}

TEST(Assistant, RoundTripAllCombinations) {
  std::vector<std::pair<Label, ReasonSet>> combos = {{Label::Sound, {}}};
  for (unsigned mask = 1; mask < 8; ++mask) {
    ReasonSet r;
    if (mask & 1) r.insert(UnsoundReason::ReturnValue);
    if (mask & 2) r.insert(UnsoundReason::Memory);
    if (mask & 4) r.insert(UnsoundReason::NewUB);
    combos.push_back({Label::Unsound, r});
  }
  for (const auto &[label, reasons] : combos) {
    Prediction p = decode_response(encode_assistant(label, reasons));
    EXPECT_EQ(p.status, label);
    EXPECT_EQ(p.reasons, reasons);
  }
}

TEST(Decode, Variants) {
  auto p = decode_response("Transformation status: UNSOUND Reason: memory");
  EXPECT_EQ(p.status, Label::Unsound);
  EXPECT_EQ(p.reasons, ReasonSet{UnsoundReason::Memory});

  auto c = decode_response("Status: CORRECT");
  EXPECT_EQ(c.status, Label::Sound);
  EXPECT_TRUE(c.reasons.empty());

  auto ub = decode_response("Status: UNSOUND Reason: the target adds UB");
  EXPECT_EQ(ub.reasons, ReasonSet{UnsoundReason::NewUB});

  auto lower = decode_response("status: unsound\nreason: Return value differs");
  EXPECT_EQ(lower.reasons, ReasonSet{UnsoundReason::ReturnValue});
}

TEST(Decode, Errors) {
  try {
    decode_response("I think it looks fine");
    FAIL();
  } catch (const DecodeError &e) {
    EXPECT_EQ(e.kind(), DecodeError::Kind::Unparseable);
  }
  try {
    decode_response("Status: UNSOUND Reason: vibes");
    FAIL();
  } catch (const DecodeError &e) {
    EXPECT_EQ(e.kind(), DecodeError::Kind::MissingReason);
  }
}

TEST(Backend, HeuristicIdentity) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::Heuristic;
  EXPECT_EQ(predict(fixtures::load("identity"), cfg).status, Label::Sound);
  EXPECT_EQ(predict(fixtures::load("ashr_sdiv"), cfg).status, Label::Unsound);
}

TEST(Backend, OracleWithoutNoise) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::Oracle;
  Prediction p = predict(fixtures::load("ashr_sdiv"), cfg);
  EXPECT_EQ(p.status, Label::Unsound);
  EXPECT_EQ(p.reasons, ReasonSet{UnsoundReason::ReturnValue});
  EXPECT_EQ(p.backend, "oracle");
  EXPECT_EQ(predict(fixtures::load("mul2_shl"), cfg).status, Label::Sound);
  // Loop-guarded pairs are judged on the terminating inputs.
  Prediction loop = predict(fixtures::load("pad_top_loop"), cfg);
  EXPECT_EQ(loop.status, Label::Unsound);
  EXPECT_EQ(loop.reasons, ReasonSet{UnsoundReason::Memory});
}

TEST(Backend, OracleNoiseIsSeeded) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::Oracle;
  cfg.noise_rate = 1.0;
  EXPECT_EQ(predict(fixtures::load("mul2_shl"), cfg).status, Label::Unsound);
  EXPECT_EQ(predict(fixtures::load("ashr_sdiv"), cfg).status, Label::Sound);

  cfg.noise_rate = 0.5;
  std::vector<Label> a, b;
  for (const char *id : {"identity", "mul2_shl", "add0", "ashr_sdiv",
                         "hoist_udiv", "pad_top"}) {
    a.push_back(predict(fixtures::load(id), cfg).status);
    b.push_back(predict(fixtures::load(id), cfg).status);
  }
  EXPECT_EQ(a, b);
  cfg.noise_rate = 1.5;
  EXPECT_THROW(make_backend(cfg), std::invalid_argument);
}

TEST(Backend, KindNames) {
  for (auto k : {BackendConfig::Kind::Remote, BackendConfig::Kind::Heuristic,
                 BackendConfig::Kind::Oracle})
    EXPECT_EQ(backend_kind_from_name(backend_kind_name(k)), k);
  EXPECT_FALSE(backend_kind_from_name("gpt"));
}

// --- remote backend against a local server ----------------------------------

class MockServer {
public:
  using Handler = std::function<void(const httplib::Request &,
                                     httplib::Response &, int call)>;

  explicit MockServer(Handler h) : handler_(std::move(h)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request &req, httplib::Response &res) {
                   last_body_ = req.body;
                   last_auth_ = req.get_header_value("Authorization");
                   handler_(req, res, calls_++);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  RemoteConfig config() const {
    RemoteConfig c;
    c.endpoint =
        "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.api_key_env = "LLMTV_TEST_KEY";
    c.backoff_ms = 1;
    c.request_timeout_ms = 5000;
    return c;
  }

  int calls() const { return calls_; }
  std::string last_body_, last_auth_;

private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::thread thread_;
};

std::string completion(const std::string &content) {
  nlohmann::json j = {
      {"choices",
       {{{"index", 0},
         {"message", {{"role", "assistant"}, {"content", content}}}}}}};
  return j.dump();
}

class Remote : public ::testing::Test {
protected:
  void SetUp() override { setenv("LLMTV_TEST_KEY", "sk-test", 1); }
  void TearDown() override { unsetenv("LLMTV_TEST_KEY"); }
};

TEST_F(Remote, Success) {
  MockServer server([](const httplib::Request &, httplib::Response &res, int) {
    res.set_content(
        completion("Transformation status: UNSOUND Reason: memory"),
        "application/json");
  });
  RemoteBackend backend(server.config());
  auto pair = fixtures::load("pad_top");
  Prediction p = predict(pair, backend);
  EXPECT_EQ(p.status, Label::Unsound);
  EXPECT_EQ(p.reasons, ReasonSet{UnsoundReason::Memory});
  EXPECT_EQ(server.last_auth_, "Bearer sk-test");

  auto body = nlohmann::json::parse(server.last_body_);
  EXPECT_EQ(body["model"], "gpt-3.5-turbo");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][0]["content"], std::string(kSystemText));
  EXPECT_EQ(body["messages"][1]["content"], encode_prompt(pair).user);
}

TEST_F(Remote, RetriesServerErrors) {
  MockServer server([](const httplib::Request &, httplib::Response &res,
                       int call) {
    if (call < 2) {
      res.status = call == 0 ? 500 : 429;
      return;
    }
    res.set_content(completion("Transformation status: SOUND Reason: none"),
                    "application/json");
  });
  RemoteBackend backend(server.config());
  EXPECT_EQ(predict(fixtures::load("identity"), backend).status, Label::Sound);
  EXPECT_EQ(server.calls(), 3);
}

TEST_F(Remote, GivesUpAfterRetries) {
  MockServer server([](const httplib::Request &, httplib::Response &res,
                       int) { res.status = 503; });
  RemoteConfig cfg = server.config();
  cfg.max_retries = 2;
  RemoteBackend backend(cfg);
  try {
    predict(fixtures::load("identity"), backend);
    FAIL();
  } catch (const PredictError &e) {
    EXPECT_EQ(e.kind(), PredictError::Kind::Transport);
  }
  EXPECT_EQ(server.calls(), 3);
}

TEST_F(Remote, RejectedKeyIsAuth) {
  MockServer server([](const httplib::Request &, httplib::Response &res,
                       int) { res.status = 401; });
  RemoteBackend backend(server.config());
  try {
    predict(fixtures::load("identity"), backend);
    FAIL();
  } catch (const PredictError &e) {
    EXPECT_EQ(e.kind(), PredictError::Kind::Auth);
  }
  EXPECT_EQ(server.calls(), 1);
}

TEST_F(Remote, MissingKeyIsAuth) {
  MockServer server([](const httplib::Request &, httplib::Response &, int) {});
  RemoteConfig cfg = server.config();
  cfg.api_key_env = "LLMTV_TEST_KEY_UNSET";
  RemoteBackend backend(cfg);
  try {
    predict(fixtures::load("identity"), backend);
    FAIL();
  } catch (const PredictError &e) {
    EXPECT_EQ(e.kind(), PredictError::Kind::Auth);
  }
  EXPECT_EQ(server.calls(), 0);
}

TEST_F(Remote, MalformedCompletionIsDecode) {
  MockServer server([](const httplib::Request &, httplib::Response &res,
                       int call) {
    if (call == 0)
      res.set_content("{\"oops\": 1}", "application/json");
    else
      res.set_content(completion("no idea"), "application/json");
  });
  RemoteBackend backend(server.config());
  for (int i = 0; i < 2; ++i) {
    try {
      predict(fixtures::load("identity"), backend);
      FAIL();
    } catch (const PredictError &e) {
      EXPECT_EQ(e.kind(), PredictError::Kind::Decode);
    }
  }
}

TEST_F(Remote, UnreachableEndpointIsTransport) {
  RemoteConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.api_key_env = "LLMTV_TEST_KEY";
  cfg.max_retries = 1;
  cfg.backoff_ms = 1;
  cfg.request_timeout_ms = 500;
  RemoteBackend backend(cfg);
  try {
    predict(fixtures::load("identity"), backend);
    FAIL();
  } catch (const PredictError &e) {
    EXPECT_EQ(e.kind(), PredictError::Kind::Transport);
  }
}

TEST_F(Remote, ConcurrencyIsBounded) {
  std::atomic<int> active{0}, peak{0};
  MockServer server([&](const httplib::Request &, httplib::Response &res,
                        int) {
    int now = ++active;
    int old = peak.load();
    while (now > old && !peak.compare_exchange_weak(old, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --active;
    res.set_content(completion("Status: CORRECT"), "application/json");
  });
  RemoteConfig cfg = server.config();
  cfg.max_concurrent = 2;
  RemoteBackend backend(cfg);
  auto pair = fixtures::load("identity");
  std::vector<std::thread> ts;
  for (int i = 0; i < 6; ++i)
    ts.emplace_back([&] { predict(pair, backend); });
  for (auto &t : ts)
    t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(server.calls(), 6);
}

TEST(RemoteConfig, RejectsBadEndpoint) {
  RemoteConfig cfg;
  cfg.endpoint = "ftp://example.com";
  EXPECT_THROW(RemoteBackend{cfg}, std::invalid_argument);
}

} // namespace
