#include "polisim/gateway.hpp"

#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "polisim/errors.hpp"

namespace polisim {

using nlohmann::json;

GatewayConfig GatewayConfig::from_env(const std::string& api_key_env) {
    GatewayConfig cfg;
    if (const char* key = std::getenv(api_key_env.c_str())) cfg.api_key = key;
    if (const char* url = std::getenv("POLISIM_ENDPOINT_URL")) cfg.endpoint_url = url;
    return cfg;
}

HttpGateway::HttpGateway(GatewayConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint_url;
    std::string rest;
    if (url.rfind("https://", 0) == 0) {
        https_ = true;
        rest = url.substr(8);
    } else if (url.rfind("http://", 0) == 0) {
        https_ = false;
        rest = url.substr(7);
    } else {
        throw std::invalid_argument("endpoint_url must start with http:// or https://");
    }
    const auto slash = rest.find('/');
    host_ = rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
}

void HttpGateway::throttle() {
    if (config_.requests_per_second <= 0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config_.requests_per_second));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        slot = std::max(std::chrono::steady_clock::now(), next_slot_);
        next_slot_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
}

std::string HttpGateway::complete(const std::string& prompt, const CallMeta&) {
    json payload;
    payload["model"] = config_.model;
    payload["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    payload["temperature"] = config_.temperature;
    const std::string body = payload.dump();

    std::string last_error;
    const int attempts = 1 + std::max(config_.retry_budget, 0);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        throttle();
        const auto started = std::chrono::steady_clock::now();

        httplib::Client client((https_ ? "https://" : "http://") + host_);
        const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }

        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message") ||
            !reply["choices"][0]["message"].contains("content")) {
            last_error = "malformed completion body";
            continue;
        }

        const double latency =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        {
            std::lock_guard lock(mutex_);
            stats_.calls += 1;
            stats_.total_latency_seconds += latency;
            if (reply.contains("usage")) {
                stats_.prompt_tokens += reply["usage"].value("prompt_tokens", 0);
                stats_.completion_tokens += reply["usage"].value("completion_tokens", 0);
            }
        }
        return reply["choices"][0]["message"]["content"].get<std::string>();
    }
    throw TransportError("gateway gave up after " + std::to_string(attempts) + " attempt(s): " +
                         last_error);
}

HttpGateway::Stats HttpGateway::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

MockGateway::MockGateway(std::vector<std::string> bodies) : bodies_(std::move(bodies)) {}

MockGateway::MockGateway(std::function<std::string(const std::string&, const CallMeta&)> fn)
    : fn_(std::move(fn)) {}

std::string MockGateway::complete(const std::string& prompt, const CallMeta& meta) {
    ++calls_;
    if (fn_) return fn_(prompt, meta);
    if (next_ >= bodies_.size()) throw std::logic_error("mock gateway script exhausted");
    return bodies_[next_++];
}

TranscriptRecorder::TranscriptRecorder(ChatGateway& inner, const std::filesystem::path& path)
    : inner_(inner), out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open transcript file: " + path.string());
}

std::string TranscriptRecorder::complete(const std::string& prompt, const CallMeta& meta) {
    const std::string response = inner_.complete(prompt, meta);
    json line;
    line["week"] = meta.week;
    line["member"] = meta.member;
    line["prompt"] = prompt;
    line["response"] = response;
    out_ << line.dump() << "\n";
    out_.flush();
    return response;
}

TranscriptReplayer::TranscriptReplayer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transcript file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded())
            throw std::runtime_error("corrupt transcript line in " + path.string());
        entries_.push_back(Entry{obj.at("week").get<int>(), obj.at("member").get<int>(),
                                 obj.at("prompt").get<std::string>(),
                                 obj.at("response").get<std::string>()});
    }
}

std::string TranscriptReplayer::complete(const std::string& prompt, const CallMeta& meta) {
    if (next_ >= entries_.size())
        throw TransportError("transcript exhausted at week " + std::to_string(meta.week));
    const Entry& entry = entries_[next_];
    if (entry.prompt != prompt) {
        throw TransportError("transcript prompt mismatch at week " + std::to_string(meta.week) +
                             " member " + std::to_string(meta.member) +
                             "; the run being replayed diverged from the recording");
    }
    ++next_;
    return entry.response;
}

}  // namespace polisim
