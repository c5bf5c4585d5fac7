#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace polisim {

// Which decision a completion call belongs to; recorded in transcripts so
// replays can be audited call by call.
struct CallMeta {
    int week = 0;
    int member = 0;  // ensemble member index
};

struct GatewayConfig {
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-5-nano";
    std::string api_key;  // from the environment; never serialized
    double timeout_seconds = 120.0;
    int retry_budget = 3;  // transport retries per call
    double temperature = 1.0;
    double requests_per_second = 0.0;  // 0 = unthrottled

    // Reads the key from api_key_env (default OPENAI_API_KEY); empty if unset.
    static GatewayConfig from_env(const std::string& api_key_env = "OPENAI_API_KEY");
};

// Transport boundary for one chat completion. Implementations never inspect
// or modify prompt/response content.
class ChatGateway {
public:
    virtual ~ChatGateway() = default;
    virtual std::string complete(const std::string& prompt, const CallMeta& meta) = 0;
};

// Provider-compatible HTTP client: posts {model, messages, temperature},
// extracts choices[0].message.content. Throws TransportError once the retry
// budget is exhausted. Safe for concurrent calls; the rate limit spaces out
// request starts across threads.
class HttpGateway final : public ChatGateway {
public:
    explicit HttpGateway(GatewayConfig config);
    std::string complete(const std::string& prompt, const CallMeta& meta) override;

    // Latency and token usage of completed calls, if the service reports them.
    struct Stats {
        std::int64_t calls = 0;
        std::int64_t prompt_tokens = 0;
        std::int64_t completion_tokens = 0;
        double total_latency_seconds = 0.0;
    };
    Stats stats() const;

private:
    void throttle();

    GatewayConfig config_;
    std::string host_;
    std::string path_;
    bool https_ = true;
    mutable std::mutex mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
    Stats stats_;
};

// Canned responses for deterministic runs without credentials. Bodies are
// returned in order; running past the script is a programming error.
class MockGateway final : public ChatGateway {
public:
    explicit MockGateway(std::vector<std::string> bodies);
    explicit MockGateway(std::function<std::string(const std::string&, const CallMeta&)> fn);

    std::string complete(const std::string& prompt, const CallMeta& meta) override;
    int calls() const { return calls_; }

private:
    std::vector<std::string> bodies_;
    std::function<std::string(const std::string&, const CallMeta&)> fn_;
    std::size_t next_ = 0;
    int calls_ = 0;
};

// Writes one JSON line per request/response pair: {week, member, prompt,
// response}. Wraps any inner gateway; flushed after every call.
class TranscriptRecorder final : public ChatGateway {
public:
    TranscriptRecorder(ChatGateway& inner, const std::filesystem::path& path);
    std::string complete(const std::string& prompt, const CallMeta& meta) override;

private:
    ChatGateway& inner_;
    std::ofstream out_;
};

// Replays a recorded transcript in order, verifying that each prompt matches
// the recorded one, so a replayed run reproduces the original bit for bit.
class TranscriptReplayer final : public ChatGateway {
public:
    explicit TranscriptReplayer(const std::filesystem::path& path);
    std::string complete(const std::string& prompt, const CallMeta& meta) override;

    std::size_t remaining() const { return entries_.size() - next_; }

private:
    struct Entry {
        int week;
        int member;
        std::string prompt;
        std::string response;
    };
    std::vector<Entry> entries_;
    std::size_t next_ = 0;
};

}  // namespace polisim
