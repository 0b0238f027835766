#pragma once

// Chat-completion access: a content-addressed file cache, retry with
// exponential backoff, an in-flight request limit, an HTTP backend for
// OpenAI-compatible endpoints and a scripted mock backend.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "cowrite/errors.hpp"

namespace cowrite {

struct Message {
    std::string role;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct BackendConfig {
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    double temperature = 0.0;
    double timeout_s = 60.0;
    int max_retries = 3;        // additional attempts after the first
    int max_in_flight = 4;
    std::string cache_dir;      // empty disables the cache
    std::string api_key_env = "OPENAI_API_KEY";  // empty sends no Authorization header
    double backoff_base_s = 0.5;

    void validate() const {
        if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
        if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
        if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    }
};

inline BackendConfig backend_config_from_json(const nlohmann::json& j) {
    BackendConfig c;
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.temperature = j.value("temperature", c.temperature);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.backoff_base_s = j.value("backoff_base_s", c.backoff_base_s);
    c.validate();
    return c;
}

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

inline nlohmann::json messages_json(const std::vector<Message>& messages) {
    auto arr = nlohmann::json::array();
    for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
    return arr;
}

/// The model, temperature and messages that determine a response.
struct RequestParams {
    std::string model;
    double temperature = 0.0;
};

/// SHA-256 over the canonical JSON (sorted keys, no whitespace) of
/// {messages, model, temperature}; 64 lowercase hex digits.
inline std::string cache_key(const std::vector<Message>& messages, const RequestParams& p) {
    nlohmann::json j = {{"model", p.model}, {"temperature", p.temperature}, {"messages", messages_json(messages)}};
    return sha256_hex(j.dump());
}

inline std::string cache_key(const std::vector<Message>& messages, const BackendConfig& c) {
    return cache_key(messages, RequestParams{c.model, c.temperature});
}

/// A transport that turns one request into assistant text. Throws
/// TransportError (or StatusError) on failure; the gateway decides on retries.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string send(const std::vector<Message>& messages, const RequestParams& params,
                             const std::string& digest) = 0;
};

inline bool is_retryable(const TransportError& e) {
    if (auto* s = dynamic_cast<const StatusError*>(&e)) return s->status == 429 || s->status >= 500;
    return true;
}

/// POST {endpoint}/chat/completions with an OpenAI-compatible body.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
        const auto scheme = cfg_.endpoint.find("://");
        if (scheme == std::string::npos) throw ConfigError("endpoint must include a scheme: " + cfg_.endpoint);
        const auto slash = cfg_.endpoint.find('/', scheme + 3);
        base_ = cfg_.endpoint.substr(0, slash);
        path_ = slash == std::string::npos ? "" : cfg_.endpoint.substr(slash);
        while (!path_.empty() && path_.back() == '/') path_.pop_back();
        path_ += "/chat/completions";
    }

    /// Resolves the API key; throws ConfigError when the variable is unset.
    std::string api_key() const {
        if (cfg_.api_key_env.empty()) return {};
        const char* v = std::getenv(cfg_.api_key_env.c_str());
        if (v == nullptr || *v == '\0') throw ConfigError("API key variable " + cfg_.api_key_env + " is not set");
        return v;
    }

    std::string send(const std::vector<Message>& messages, const RequestParams& params, const std::string&) override {
        const std::string key = api_key();
        httplib::Client cli(base_);
        const auto secs = std::chrono::duration<double>(cfg_.timeout_s);
        const auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
        cli.set_connection_timeout(us);
        cli.set_read_timeout(us);
        cli.set_write_timeout(us);
        httplib::Headers headers;
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
        nlohmann::json body = {
            {"model", params.model}, {"temperature", params.temperature}, {"messages", messages_json(messages)}};
        auto res = cli.Post(path_, headers, body.dump(), "application/json");
        if (!res) throw TransportError("request to " + base_ + path_ + " failed: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300) throw StatusError(res->status, res->body.substr(0, 500));
        try {
            auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
    }

  private:
    BackendConfig cfg_;
    std::string base_;
    std::string path_;
};

/// One scripted answer: text, or a simulated failure.
struct MockReply {
    std::string text;
    bool transport_failure = false;
    int status = 0;  // non-zero simulates an HTTP error with this status

    static MockReply failure() { return {"", true, 0}; }
    static MockReply http_status(int s) { return {"", false, s}; }
};

/// Offline backend answering from registered scripts. Digest scripts win over
/// substring scripts; within a kind the earliest registration wins. A script
/// with several replies hands them out in order and then repeats the last.
class MockBackend : public Backend {
  public:
    explicit MockBackend(bool strict = true) : strict_(strict) {}

    void register_substring(std::string needle, std::vector<MockReply> replies) {
        std::lock_guard lk(mu_);
        substring_.push_back({std::move(needle), std::move(replies), 0});
    }
    void register_substring(std::string needle, std::string reply) {
        register_substring(std::move(needle), std::vector<MockReply>{{std::move(reply)}});
    }
    void register_digest(std::string digest, std::vector<MockReply> replies) {
        std::lock_guard lk(mu_);
        digest_.push_back({std::move(digest), std::move(replies), 0});
    }
    void register_digest(std::string digest, std::string reply) {
        register_digest(std::move(digest), std::vector<MockReply>{{std::move(reply)}});
    }
    /// Answer for unmatched requests when not strict.
    void set_default(std::string reply) {
        std::lock_guard lk(mu_);
        default_ = std::move(reply);
    }
    /// Artificial latency, to exercise concurrency limits.
    void set_latency(std::chrono::milliseconds d) { latency_ = d; }

    std::size_t calls() const { return calls_.load(); }
    std::size_t max_in_flight_observed() const { return max_seen_.load(); }
    std::vector<std::vector<Message>> requests() const {
        std::lock_guard lk(mu_);
        return requests_;
    }

    std::string send(const std::vector<Message>& messages, const RequestParams&, const std::string& digest) override {
        const auto now = ++in_flight_;
        std::size_t seen = max_seen_.load();
        while (now > seen && !max_seen_.compare_exchange_weak(seen, now)) {
        }
        struct Leave {
            std::atomic<std::size_t>& n;
            ~Leave() { --n; }
        } leave{in_flight_};
        ++calls_;
        if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

        MockReply reply;
        {
            std::lock_guard lk(mu_);
            requests_.push_back(messages);
            std::string joined;
            for (const auto& m : messages) joined += m.content + "\n";
            Script* hit = nullptr;
            for (auto& s : digest_)
                if (s.matcher == digest) {
                    hit = &s;
                    break;
                }
            if (!hit)
                for (auto& s : substring_)
                    if (joined.find(s.matcher) != std::string::npos) {
                        hit = &s;
                        break;
                    }
            if (!hit) {
                if (strict_ || !default_) throw UnmatchedScriptError("no mock script matches request " + digest);
                return *default_;
            }
            reply = hit->replies.empty() ? MockReply{} : hit->replies[std::min(hit->next, hit->replies.size() - 1)];
            ++hit->next;
        }
        if (reply.transport_failure) throw TransportError("scripted transport failure");
        if (reply.status != 0) throw StatusError(reply.status, "scripted status");
        return reply.text;
    }

  private:
    struct Script {
        std::string matcher;
        std::vector<MockReply> replies;
        std::size_t next;
    };
    bool strict_;
    mutable std::mutex mu_;
    std::vector<Script> digest_;
    std::vector<Script> substring_;
    std::optional<std::string> default_;
    std::vector<std::vector<Message>> requests_;
    std::chrono::milliseconds latency_{0};
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> max_seen_{0};
};

/// Loads mock scripts from JSON:
/// {"strict": bool, "default": str?, "scripts": [{"substring"|"digest": str, "reply": str | "replies": [...]}]}.
/// A reply may also be {"transport_failure": true} or {"status": 503}.
inline std::shared_ptr<MockBackend> mock_from_json(const nlohmann::json& j) {
    auto mock = std::make_shared<MockBackend>(j.value("strict", true));
    if (j.contains("default")) mock->set_default(j.at("default").get<std::string>());
    auto reply_of = [](const nlohmann::json& r) {
        if (r.is_string()) return MockReply{r.get<std::string>()};
        if (r.value("transport_failure", false)) return MockReply::failure();
        if (r.contains("status")) return MockReply::http_status(r.at("status").get<int>());
        return MockReply{r.value("text", "")};
    };
    for (const auto& s : j.value("scripts", nlohmann::json::array())) {
        std::vector<MockReply> replies;
        if (s.contains("replies"))
            for (const auto& r : s.at("replies")) replies.push_back(reply_of(r));
        else
            replies.push_back(reply_of(s.at("reply")));
        if (s.contains("digest"))
            mock->register_digest(s.at("digest").get<std::string>(), std::move(replies));
        else
            mock->register_substring(s.at("substring").get<std::string>(), std::move(replies));
    }
    return mock;
}

/// Shared entry point for all model calls.
class Gateway {
  public:
    Gateway(BackendConfig cfg, std::shared_ptr<Backend> backend) : cfg_(std::move(cfg)), backend_(std::move(backend)) {
        cfg_.validate();
        if (!backend_) throw ConfigError("gateway requires a backend");
    }

    const BackendConfig& config() const { return cfg_; }

    std::string complete(const std::vector<Message>& messages) {
        return complete(messages, RequestParams{cfg_.model, cfg_.temperature});
    }

    /// Cache hit returns stored text without touching the backend; a miss calls
    /// the backend (retrying transient failures) and persists the answer.
    std::string complete(const std::vector<Message>& messages, const RequestParams& params) {
        const std::string digest = cache_key(messages, params);
        if (auto hit = read_cache(digest)) {
            ++cache_hits_;
            return *hit;
        }
        std::string text = send_with_retry(messages, params, digest);
        write_cache(digest, messages, params, text);
        return text;
    }

    std::size_t cache_hits() const { return cache_hits_.load(); }
    std::size_t backend_calls() const { return backend_calls_.load(); }

    std::filesystem::path cache_path(const std::string& digest) const {
        return std::filesystem::path(cfg_.cache_dir) / digest.substr(0, 2) / digest.substr(2, 2) / (digest + ".json");
    }

  private:
    std::string send_with_retry(const std::vector<Message>& messages, const RequestParams& params,
                                const std::string& digest) {
        for (int attempt = 0;; ++attempt) {
            try {
                Slot slot(*this);
                ++backend_calls_;
                return backend_->send(messages, params, digest);
            } catch (const TransportError& e) {
                if (!is_retryable(e) || attempt >= cfg_.max_retries) throw;
            }
            const double wait = cfg_.backoff_base_s * static_cast<double>(1 << std::min(attempt, 16));
            if (wait > 0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        }
    }

    std::optional<std::string> read_cache(const std::string& digest) const {
        if (cfg_.cache_dir.empty()) return std::nullopt;
        std::ifstream in(cache_path(digest));
        if (!in) return std::nullopt;
        try {
            return nlohmann::json::parse(in).at("response").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    }

    void write_cache(const std::string& digest, const std::vector<Message>& messages, const RequestParams& params,
                     const std::string& text) {
        if (cfg_.cache_dir.empty()) return;
        namespace fs = std::filesystem;
        const fs::path target = cache_path(digest);
        fs::create_directories(target.parent_path());
        std::ostringstream tmp_name;
        tmp_name << target.filename().string() << ".tmp." << std::this_thread::get_id() << "." << ++tmp_counter_;
        const fs::path tmp = target.parent_path() / tmp_name.str();
        nlohmann::json entry = {{"digest", digest},
                                {"model", params.model},
                                {"temperature", params.temperature},
                                {"messages", messages_json(messages)},
                                {"response", text}};
        {
            std::ofstream out(tmp, std::ios::binary);
            out << entry.dump(2) << '\n';
            if (!out) throw Error("cannot write cache file " + tmp.string());
        }
        fs::rename(tmp, target);
    }

    /// Holds one of the max_in_flight backend slots.
    struct Slot {
        explicit Slot(Gateway& g) : g(g) {
            std::unique_lock lk(g.slot_mu_);
            g.slot_cv_.wait(lk, [&] { return g.in_flight_ < g.cfg_.max_in_flight; });
            ++g.in_flight_;
        }
        ~Slot() {
            {
                std::lock_guard lk(g.slot_mu_);
                --g.in_flight_;
            }
            g.slot_cv_.notify_one();
        }
        Gateway& g;
    };

    BackendConfig cfg_;
    std::shared_ptr<Backend> backend_;
    std::mutex slot_mu_;
    std::condition_variable slot_cv_;
    int in_flight_ = 0;
    std::atomic<std::size_t> cache_hits_{0};
    std::atomic<std::size_t> backend_calls_{0};
    std::atomic<std::size_t> tmp_counter_{0};
};

}  // namespace cowrite
