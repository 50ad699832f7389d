#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "preduce/llm/http_transport.hpp"
#include "preduce/llm/llm.hpp"
#include "preduce/llm/scripted_transport.hpp"
#include "preduce/util/process.hpp"

using namespace preduce::llm;
namespace fs = std::filesystem;

namespace {

LlmRequest request(std::string user, int n = 2) {
  LlmRequest r;
  r.user_prompt = std::move(user);
  r.n = n;
  return r;
}

std::shared_ptr<ScriptedTransport> scripted(std::vector<ScriptedTransport::Entry> entries) {
  return std::make_shared<ScriptedTransport>(std::move(entries));
}

// Fails a configurable number of times before answering.
class FlakyTransport final : public LlmTransport {
 public:
  enum class Mode { transient, rate_limited, auth, fatal };
  FlakyTransport(int failures, Mode mode, bool native_n = true)
      : failures_(failures), mode_(mode), native_n_(native_n) {}
  LlmResponse send(const LlmRequest& r) override {
    ++calls;
    if (failures_-- > 0) {
      switch (mode_) {
        case Mode::transient: throw TransportError("reset", true);
        case Mode::rate_limited: throw RateLimited("slow down");
        case Mode::auth: throw AuthError("bad key");
        case Mode::fatal: throw TransportError("bad request", false);
      }
    }
    LlmResponse out;
    for (int i = 0; i < r.n; ++i) out.completions.push_back("c" + std::to_string(calls) + "-" + std::to_string(i));
    out.usage = {10, 5};
    return out;
  }
  bool supports_multiple_completions() const override { return native_n_; }
  std::string name() const override { return "flaky"; }
  int calls = 0;

 private:
  int failures_;
  Mode mode_;
  bool native_n_;
};

std::unique_ptr<LlmClient> no_sleep_client(std::shared_ptr<LlmTransport> t, RetryPolicy retry = {}) {
  auto c = std::make_unique<LlmClient>(std::move(t), retry);
  c->set_sleeper([](std::chrono::milliseconds) {});
  return c;
}

}  // namespace

TEST(Request, Validation) {
  auto r = request("x", 1);
  EXPECT_NO_THROW(r.validate());
  r.n = 0;
  EXPECT_THROW(r.validate(), std::invalid_argument);
  r.n = 1;
  r.temperature = 2.5;
  EXPECT_THROW(r.validate(), std::invalid_argument);
  r.temperature = -0.1;
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(Scripted, EchoesFixture) {
  auto t = scripted({{"A", {{"x", "y"}}, false}});
  LlmClient client(t);
  auto resp = client.complete(request("A", 2));
  EXPECT_EQ(resp.completions, (std::vector<std::string>{"x", "y"}));
  EXPECT_FALSE(resp.truncated);
}

TEST(Scripted, UnderflowIsTransportError) {
  auto t = scripted({{"A", {{"x"}}, false}});
  auto client = no_sleep_client(t);
  client->complete(request("A", 1));
  try {
    client->complete(request("A", 1));
    FAIL() << "expected underflow";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("fixture underflow"), std::string::npos);
  }
}

TEST(Scripted, CyclingEntryRepeats) {
  auto t = scripted({{"A", {{"1"}, {"2"}}, true}});
  LlmClient client(t);
  std::vector<std::string> seen;
  for (int i = 0; i < 5; ++i) seen.push_back(client.complete(request("A", 1)).completions[0]);
  EXPECT_EQ(seen, (std::vector<std::string>{"1", "2", "1", "2", "1"}));
}

TEST(Scripted, FirstMatchingEntryWins) {
  auto t = scripted({{"inline", {{"fi"}}, true}, {"", {{"other"}}, true}});
  LlmClient client(t);
  EXPECT_EQ(client.complete(request("please inline", 1)).completions[0], "fi");
  EXPECT_EQ(client.complete(request("unroll", 1)).completions[0], "other");
}

TEST(Scripted, TooFewCompletionsIsError) {
  auto t = scripted({{"", {{"only"}}, true}});
  auto client = no_sleep_client(t);
  EXPECT_THROW(client->complete(request("x", 3)), TransportError);
}

TEST(Scripted, IdenticalSequencesGiveIdenticalResponses) {
  std::vector<ScriptedTransport::Entry> entries{{"a", {{"1", "2"}, {"3", "4"}}, false}, {"b", {{"5", "6"}}, true}};
  auto run = [&] {
    LlmClient client(scripted(entries));
    std::vector<std::string> all;
    for (auto p : {"a", "b", "a", "b"}) {
      for (auto& c : client.complete(request(p, 2)).completions) all.push_back(c);
    }
    return all;
  };
  EXPECT_EQ(run(), run());
}

TEST(Scripted, LoadsManifestDirectory) {
  fs::path dir = preduce::util::make_temp_dir("preduce-llm-test");
  std::ofstream(dir / "manifest.json")
      << R"({"entries": [{"match": "fn", "responses": ["two.json", "one.txt", ["inline"]]}]})";
  std::ofstream(dir / "two.json") << R"(["a", "b"])";
  std::ofstream(dir / "one.txt") << "```c\nint x;\n```\n";
  auto t = ScriptedTransport::from_directory(dir);
  LlmClient client(t);
  EXPECT_EQ(client.complete(request("fn", 2)).completions, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(client.complete(request("fn", 1)).completions[0], "```c\nint x;\n```\n");
  EXPECT_EQ(client.complete(request("fn", 1)).completions[0], "inline");
  fs::remove_all(dir);
}

TEST(Scripted, BadManifestIsRejected) {
  fs::path dir = preduce::util::make_temp_dir("preduce-llm-test");
  std::ofstream(dir / "manifest.json") << R"({"entries": 3})";
  EXPECT_THROW(ScriptedTransport::from_directory(dir), std::runtime_error);
  fs::remove_all(dir);
  EXPECT_THROW(ScriptedTransport::from_directory(dir), std::runtime_error);
}

TEST(Client, RetriesTransientFailures) {
  auto t = std::make_shared<FlakyTransport>(2, FlakyTransport::Mode::transient);
  std::vector<long> sleeps;
  LlmClient client(t, RetryPolicy{3, std::chrono::milliseconds(100), 2.0, std::chrono::milliseconds(150)});
  client.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
  auto resp = client.complete(request("x", 2));
  EXPECT_EQ(resp.completions.size(), 2u);
  EXPECT_EQ(sleeps, (std::vector<long>{100, 150}));
  auto s = client.stats();
  EXPECT_EQ(s.wire_calls, 3u);
  EXPECT_EQ(s.retries, 2u);
  EXPECT_EQ(s.queries, 1u);
}

TEST(Client, RateLimitedAfterRetriesExhausted) {
  auto t = std::make_shared<FlakyTransport>(10, FlakyTransport::Mode::rate_limited);
  auto client = no_sleep_client(t, RetryPolicy{2, std::chrono::milliseconds(1)});
  EXPECT_THROW(client->complete(request("x")), RateLimited);
  EXPECT_EQ(t->calls, 3);
  EXPECT_EQ(client->stats().failures, 1u);
}

TEST(Client, AuthErrorIsNotRetried) {
  auto t = std::make_shared<FlakyTransport>(1, FlakyTransport::Mode::auth);
  auto client = no_sleep_client(t);
  EXPECT_THROW(client->complete(request("x")), AuthError);
  EXPECT_EQ(t->calls, 1);
}

TEST(Client, NonRetryableTransportErrorIsImmediate) {
  auto t = std::make_shared<FlakyTransport>(1, FlakyTransport::Mode::fatal);
  auto client = no_sleep_client(t);
  EXPECT_THROW(client->complete(request("x")), TransportError);
  EXPECT_EQ(t->calls, 1);
}

TEST(Client, FansOutWithoutNativeN) {
  auto t = std::make_shared<FlakyTransport>(0, FlakyTransport::Mode::transient, false);
  LlmClient client(t);
  auto resp = client.complete(request("x", 4));
  EXPECT_EQ(t->calls, 4);
  EXPECT_EQ(resp.completions, (std::vector<std::string>{"c1-0", "c2-0", "c3-0", "c4-0"}));
  EXPECT_EQ(resp.usage.prompt_tokens, 40u);
}

TEST(Client, CostNullWithoutPriceTable) {
  LlmClient client(std::make_shared<FlakyTransport>(0, FlakyTransport::Mode::transient));
  client.complete(request("x"));
  EXPECT_FALSE(client.stats().cost.has_value());
}

TEST(Client, CostFromPriceTable) {
  PriceTable prices({{"gpt-4o", ModelPrice{2.0, 8.0}}});
  LlmClient client(std::make_shared<FlakyTransport>(0, FlakyTransport::Mode::transient), {}, prices);
  client.complete(request("x"));
  ASSERT_TRUE(client.stats().cost.has_value());
  EXPECT_DOUBLE_EQ(*client.stats().cost, (10 * 2.0 + 5 * 8.0) / 1e6);
}

TEST(Client, WritesJsonlLog) {
  fs::path dir = preduce::util::make_temp_dir("preduce-llm-test");
  LlmClient client(std::make_shared<FlakyTransport>(0, FlakyTransport::Mode::transient), {}, std::nullopt,
                   dir / "llm.jsonl");
  client.complete(request("hello", 2));
  client.complete(request("world", 1));
  std::ifstream in(dir / "llm.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    auto doc = nlohmann::json::parse(line);
    EXPECT_EQ(doc["prompt_hash"].get<std::string>().size(), 16u);
    EXPECT_TRUE(doc["cost_usd"].is_null());
    ++lines;
  }
  EXPECT_EQ(lines, 2);
  fs::remove_all(dir);
}

TEST(Client, ConcurrentUse) {
  auto t = scripted({{"", {{"a", "b"}}, true}});
  LlmClient client(t);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      for (int j = 0; j < 25; ++j) client.complete(request("q", 2));
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(client.stats().queries, 200u);
  EXPECT_EQ(t->served(), 200u);
}

TEST(Http, MissingKeyIsAuthErrorAtConstruction) {
  HttpConfig cfg;
  cfg.api_key_env = "PREDUCE_TEST_SURELY_UNSET_KEY";
  ::unsetenv(cfg.api_key_env.c_str());
  EXPECT_THROW(HttpTransport{cfg}, AuthError);
}

class LocalEndpoint : public ::testing::Test {
 protected:
  void SetUp() override {
    ::setenv("PREDUCE_TEST_KEY", "secret", 1);
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_body = nlohmann::json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      if (status_queue.size() > 0) {
        int status = status_queue.front();
        status_queue.erase(status_queue.begin());
        res.status = status;
        return;
      }
      nlohmann::json out;
      out["choices"] = nlohmann::json::array();
      int n = last_body.value("n", 1);
      for (int i = 0; i < std::min(n, max_choices); ++i) {
        out["choices"].push_back({{"message", {{"role", "assistant"}, {"content", "answer " + std::to_string(i)}}}});
      }
      out["usage"] = {{"prompt_tokens", 12}, {"completion_tokens", 7}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  HttpConfig config() const {
    HttpConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    cfg.api_key_env = "PREDUCE_TEST_KEY";
    cfg.timeout = std::chrono::seconds(5);
    return cfg;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

 public:
  std::atomic<int> hits{0};
  nlohmann::json last_body;
  std::string last_auth;
  std::vector<int> status_queue;
  int max_choices = 100;
};

TEST_F(LocalEndpoint, SendsChatRequestAndParsesChoices) {
  LlmClient client(std::make_shared<HttpTransport>(config()));
  LlmRequest r = request("reduce me", 3);
  r.system_prompt = "sys";
  auto resp = client.complete(r);
  EXPECT_EQ(resp.completions, (std::vector<std::string>{"answer 0", "answer 1", "answer 2"}));
  EXPECT_EQ(resp.usage.prompt_tokens, 12u);
  EXPECT_EQ(last_auth, "Bearer secret");
  EXPECT_EQ(last_body["n"], 3);
  EXPECT_EQ(last_body["messages"][0]["role"], "system");
  EXPECT_EQ(last_body["messages"][1]["content"], "reduce me");
}

TEST_F(LocalEndpoint, ShortChoiceListIsRecordedNotPadded) {
  max_choices = 2;
  LlmClient client(std::make_shared<HttpTransport>(config()));
  auto resp = client.complete(request("x", 5));
  EXPECT_EQ(resp.completions.size(), 2u);
  EXPECT_TRUE(resp.truncated);
}

TEST_F(LocalEndpoint, StatusCodesMapToErrors) {
  auto client = no_sleep_client(std::make_shared<HttpTransport>(config()), RetryPolicy{1, std::chrono::milliseconds(1)});
  status_queue = {401};
  EXPECT_THROW(client->complete(request("x")), AuthError);
  status_queue = {429, 429};
  EXPECT_THROW(client->complete(request("x")), RateLimited);
  status_queue = {503};
  EXPECT_EQ(client->complete(request("x", 1)).completions.size(), 1u);
  status_queue = {400};
  EXPECT_THROW(client->complete(request("x")), TransportError);
}

TEST_F(LocalEndpoint, SequentialCallsWithoutNativeN) {
  auto cfg = config();
  cfg.native_n = false;
  LlmClient client(std::make_shared<HttpTransport>(cfg));
  auto resp = client.complete(request("x", 3));
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(last_body["n"], 1);
  EXPECT_EQ(resp.completions.size(), 3u);
}

TEST(ExtractCode, FirstFencedBlock) {
  EXPECT_EQ(extract_code("here:\n```\nint x;\n```done"), "int x;");
  EXPECT_EQ(extract_code("```c\nint a;\n```\ntext\n```\nint b;\n```"), "int a;");
  EXPECT_EQ(extract_code("```cpp\n  int y;\n\n```"), "int y;");
}

TEST(ExtractCode, FallbackIsTrimmedText) {
  EXPECT_EQ(extract_code("int x;"), "int x;");
  EXPECT_EQ(extract_code("\n  int x;  \n"), "int x;");
}

TEST(ExtractCode, UnterminatedFenceRunsToEnd) { EXPECT_EQ(extract_code("```c\nint x;\n"), "int x;"); }

TEST(ExtractCode, Idempotent) {
  for (std::string s : {"here:\n```\nint x;\n```done", "int x;", "```c\nint a;\n```", "  a\n  b  ", "``````", ""}) {
    auto once = extract_code(s);
    EXPECT_EQ(extract_code(once), once) << s;
  }
}

TEST(TargetList, NumberedLines) {
  EXPECT_EQ(parse_target_list("1. fn1\n2. fn8"), (std::vector<std::string>{"fn1", "fn8"}));
}

TEST(TargetList, BracketedList) {
  auto t = parse_target_list("[for (i = 0; ...), for (j = 0; ...)]");
  EXPECT_EQ(t, (std::vector<std::string>{"for (i = 0; ...)", "for (j = 0; ...)"}));
}

TEST(TargetList, ProseYieldsNothing) {
  EXPECT_TRUE(parse_target_list("I found no candidates.").empty());
  EXPECT_TRUE(parse_target_list("").empty());
  EXPECT_TRUE(parse_target_list("None").empty());
}

TEST(TargetList, BulletsBackticksAndDuplicates) {
  auto t = parse_target_list("Functions that can be inlined:\n- `helper`\n* `fn2` - called once\n- helper\n");
  EXPECT_EQ(t, (std::vector<std::string>{"helper", "fn2"}));
}

TEST(TargetList, PlainLinesKeepCode) {
  auto t = parse_target_list("Here are the loops:\nfor (i = 0; i < 7; i++)\nfor (j = 0; j < 5; j++)\n");
  EXPECT_EQ(t, (std::vector<std::string>{"for (i = 0; i < 7; i++)", "for (j = 0; j < 5; j++)"}));
}

TEST(TargetList, NeverEmptyEntries) {
  for (std::string s : {"1. \n2. a", "[ , a, ]", "-\n- b", "```\nfn1\n```"}) {
    for (const auto& t : parse_target_list(s)) EXPECT_FALSE(t.empty()) << s;
  }
  EXPECT_EQ(parse_target_list("```\nfn1\nfn2\n```"), (std::vector<std::string>{"fn1", "fn2"}));
}
