#pragma once

// Editor-facing session service: sessions keyed by id, one pending suggestion
// each, telemetry counters, append-only JSONL persistence with replay, and the
// HTTP routes over it.

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>

#include "cowrite/core.hpp"
#include "cowrite/errors.hpp"
#include "cowrite/gateway.hpp"
#include "cowrite/session.hpp"

namespace cowrite {

struct Telemetry {
    std::size_t shown = 0;
    std::size_t accepted = 0;
    std::size_t modified = 0;
    std::size_t rejected = 0;
    std::size_t window_switches = 0;
    Millis active_ms = 0;

    /// accepted / shown; nullopt before anything was shown.
    std::optional<double> acceptance_rate() const {
        if (!shown) return std::nullopt;
        return static_cast<double>(accepted) / static_cast<double>(shown);
    }

    bool operator==(const Telemetry&) const = default;
};

inline nlohmann::json to_json(const Telemetry& t) {
    return {{"shown", t.shown},
            {"accepted", t.accepted},
            {"modified", t.modified},
            {"rejected", t.rejected},
            {"window_switches", t.window_switches},
            {"active_ms", t.active_ms},
            {"acceptance_rate", t.acceptance_rate() ? nlohmann::json(*t.acceptance_rate()) : nlohmann::json(nullptr)}};
}

struct ServiceConfig {
    std::string data_dir;  // empty keeps sessions in memory only
    IdlePolicy idle;
    StrategyPolicy strategy;
    StageConfig stage;
    std::optional<std::size_t> target_length;  // tokens; stage falls back to paragraphs when unset
    ProposeConfig propose;

    void validate() const {
        idle.validate();
        strategy.validate();
    }
};

struct SuggestionRequest {
    Millis idle_ms = 0;
    bool on_demand = false;
    std::optional<double> progress;  // client hint in [0, 1]; overrides the stage estimate
};

class SessionService {
  public:
    /// Replays every session log found in cfg.data_dir.
    SessionService(ServiceConfig cfg, Gateway& gw, std::function<Millis()> clock = {})
        : cfg_(std::move(cfg)), gw_(gw), clock_(clock ? std::move(clock) : default_clock) {
        cfg_.validate();
        if (!cfg_.data_dir.empty()) {
            std::filesystem::create_directories(cfg_.data_dir);
            for (const auto& e : std::filesystem::directory_iterator(cfg_.data_dir))
                if (e.path().extension() == ".jsonl") load(e.path());
        }
    }

    const ServiceConfig& config() const { return cfg_; }

    std::string create(Paradigm paradigm, const std::string& initial_text) {
        const Millis now = clock_();
        auto e = std::make_shared<Entry>("", paradigm, DocumentState::start(initial_text, now));
        e->last = now;
        std::unique_lock lk(map_mu_);
        do e->id = new_id();
        while (sessions_.count(e->id));
        persist(*e, {{"type", "create"}, {"paradigm", to_string(paradigm)}, {"initial_text", initial_text}, {"at", now}});
        sessions_[e->id] = e;
        return e->id;
    }

    /// A new suggestion, or nullopt when idle time is below the threshold, one is
    /// already pending, or the model produced nothing. L0 answers only on demand.
    std::optional<Suggestion> request_suggestion(const std::string& id, const SuggestionRequest& req) {
        auto e = find(id);
        std::lock_guard lk(e->mu);
        const Paradigm p = e->session.paradigm();
        if (p == Paradigm::L0 && !req.on_demand) throw DomainError("L0 sessions only take on-demand requests");
        const StageEstimate stage = stage_of(*e, req.progress);
        if (e->session.pending()) return std::nullopt;
        if (!req.on_demand) {
            const auto threshold = idle_threshold(stage, cfg_.idle, p);
            if (!threshold || req.idle_ms < *threshold) return std::nullopt;
        }
        const Millis now = e->tick(clock_());
        const Strategy strategy = select_strategy(stage, cfg_.strategy, p);
        std::optional<Suggestion> s;
        try {
            s = propose(e->session.state(), strategy, gw_, e->id + "-" + std::to_string(e->counter + 1), now, p,
                        cfg_.propose);
        } catch (const EmptySuggestionError&) {
            return std::nullopt;
        }
        ++e->counter;
        apply_suggestion(*e, *s);
        persist(*e, {{"type", "suggestion"}, {"suggestion", to_json(*s)}, {"strategy", to_string(strategy)}});
        return s;
    }

    /// Applies one editor event: feedback, typed, delete, focus or active.
    nlohmann::json append_event(const std::string& id, const nlohmann::json& event) {
        auto e = find(id);
        std::lock_guard lk(e->mu);
        nlohmann::json line = event;
        if (!line.contains("type") || !line.at("type").is_string()) throw DomainError("event needs a string type");
        const std::string type = line.at("type");
        if (type != "focus" && type != "active") line["at"] = e->tick(clock_());
        apply_event(*e, line);
        persist(*e, line);
        return describe(*e);
    }

    nlohmann::json get(const std::string& id) {
        auto e = find(id);
        std::lock_guard lk(e->mu);
        return describe(*e);
    }

    std::vector<InteractionRecord> log(const std::string& id) {
        auto e = find(id);
        std::lock_guard lk(e->mu);
        return e->session.state().log;
    }

    Telemetry telemetry(const std::string& id) {
        auto e = find(id);
        std::lock_guard lk(e->mu);
        return e->telemetry;
    }

    DocumentState state(const std::string& id) {
        auto e = find(id);
        std::lock_guard lk(e->mu);
        return e->session.state();
    }

    std::vector<std::string> session_ids() const {
        std::shared_lock lk(map_mu_);
        std::vector<std::string> ids;
        for (const auto& [k, v] : sessions_) ids.push_back(k);
        return ids;
    }

    std::filesystem::path log_path(const std::string& id) const {
        return std::filesystem::path(cfg_.data_dir) / (id + ".jsonl");
    }

  private:
    struct Entry {
        Entry(std::string i, Paradigm p, DocumentState s) : id(std::move(i)), session(p, std::move(s)) {}
        std::string id;
        Session session;
        Telemetry telemetry;
        std::size_t counter = 0;
        Millis last = 0;
        std::mutex mu;

        /// Strictly increasing per-session time, so decided_at always advances.
        Millis tick(Millis wall) {
            last = std::max(wall, last + 1);
            return last;
        }
    };

    static Millis default_clock() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    std::string new_id() {
        static thread_local std::mt19937_64 rng{std::random_device{}()};
        std::ostringstream ss;
        ss << std::hex << rng();
        return ss.str();
    }

    std::shared_ptr<Entry> find(const std::string& id) const {
        std::shared_lock lk(map_mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFoundError("no session " + id);
        return it->second;
    }

    StageEstimate stage_of(const Entry& e, std::optional<double> hint) const {
        if (hint) {
            if (!(*hint >= 0 && *hint <= 1)) throw DomainError("progress hint outside [0, 1]");
            return {stage_for_progress(*hint), *hint, StageBasis::heuristic};
        }
        return estimate_stage(e.session.state(), cfg_.target_length, cfg_.stage);
    }

    static void apply_suggestion(Entry& e, const Suggestion& s) {
        e.session.offer(s);
        ++e.telemetry.shown;
    }

    static void apply_event(Entry& e, const nlohmann::json& ev) {
        const std::string type = ev.at("type");
        const Millis at = ev.value("at", Millis{0});
        if (type == "feedback") {
            UserFeedback fb;
            fb.kind = parse_feedback_kind(ev.at("kind").get<std::string>());
            fb.final_text = ev.value("final_text", "");
            fb.decided_at = at;
            e.session.handle_feedback(ev.at("suggestion_id").get<std::string>(), fb);
            switch (fb.kind) {
                case FeedbackKind::accept: ++e.telemetry.accepted; break;
                case FeedbackKind::modify: ++e.telemetry.modified; break;
                case FeedbackKind::reject: ++e.telemetry.rejected; break;
            }
        } else if (type == "typed") {
            e.session.type(ev.at("text").get<std::string>(), at);
        } else if (type == "delete") {
            e.session.erase(ev.at("offset").get<std::size_t>(), ev.at("length").get<std::size_t>(), at);
        } else if (type == "focus") {
            ++e.telemetry.window_switches;
        } else if (type == "active") {
            const auto ms = ev.at("ms").get<Millis>();
            if (ms < 0) throw DomainError("active time must be non-negative");
            e.telemetry.active_ms += ms;
        } else {
            throw DomainError("unknown event type " + type);
        }
    }

    nlohmann::json describe(const Entry& e) const {
        const auto& st = e.session.state();
        const auto stage = estimate_stage(st, cfg_.target_length, cfg_.stage);
        const auto threshold = idle_threshold(stage, cfg_.idle, e.session.paradigm());
        return {{"session_id", e.id},
                {"paradigm", to_string(e.session.paradigm())},
                {"text", st.text},
                {"pending", e.session.pending() ? to_json(*e.session.pending()) : nlohmann::json(nullptr)},
                {"telemetry", to_json(e.telemetry)},
                {"log_size", st.log.size()},
                {"stage", to_string(stage.stage)},
                {"progress", stage.progress},
                {"strategy", to_string(select_strategy(stage, cfg_.strategy, e.session.paradigm()))},
                {"idle_threshold_ms", threshold ? nlohmann::json(*threshold) : nlohmann::json(nullptr)}};
    }

    void persist(const Entry& e, const nlohmann::json& line) const {
        if (cfg_.data_dir.empty()) return;
        std::ofstream out(log_path(e.id), std::ios::app);
        out << line.dump() << '\n';
        out.flush();
        if (!out) throw Error("cannot append to session log " + log_path(e.id).string());
    }

    /// Rebuilds a session by re-applying its logged events in order.
    void load(const std::filesystem::path& path) {
        std::ifstream in(path);
        std::string line;
        std::shared_ptr<Entry> e;
        for (std::size_t n = 1; std::getline(in, line); ++n) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                const std::string type = j.at("type");
                if (type == "create") {
                    const Millis at = j.at("at").get<Millis>();
                    e = std::make_shared<Entry>(path.stem().string(), parse_paradigm(j.at("paradigm").get<std::string>()),
                                                DocumentState::start(j.at("initial_text").get<std::string>(), at));
                    e->last = at;
                    continue;
                }
                if (!e) throw ParseError("session log does not start with a create event", line);
                if (type == "suggestion") {
                    auto s = suggestion_from_json(j.at("suggestion"));
                    e->last = std::max(e->last, s.created_at);
                    apply_suggestion(*e, s);
                    ++e->counter;
                } else {
                    e->last = std::max(e->last, j.value("at", e->last));
                    apply_event(*e, j);
                }
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& ex) {
                throw ParseError(path.string() + " line " + std::to_string(n) + ": " + ex.what(), line);
            }
        }
        if (e) {
            std::unique_lock lk(map_mu_);
            sessions_[e->id] = e;
        }
    }

    ServiceConfig cfg_;
    Gateway& gw_;
    std::function<Millis()> clock_;
    mutable std::shared_mutex map_mu_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// ---------------------------------------------------------------------------
// HTTP

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const StaleFeedbackError& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const ConflictError& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const TransportError& e) {
        send_json(res, 502, {{"error", e.what()}});
    } catch (const DomainError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

inline nlohmann::json body_of(const httplib::Request& req) {
    return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
}

}  // namespace detail

// Patterns avoid the substring "/:", which httplib reads as a path parameter.
/// POST /sessions, GET /sessions/{id}, POST /sessions/{id}/suggestion[:demand],
/// POST /sessions/{id}/events, GET /sessions/{id}/log.
inline void register_routes(httplib::Server& server, SessionService& svc) {
    using detail::guarded;
    using detail::send_json;
    server.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = detail::body_of(req);
            const auto id = svc.create(parse_paradigm(body.value("paradigm", "L1")), body.value("initial_text", ""));
            send_json(res, 201, {{"session_id", id}});
        });
    });
    server.Get(R"(/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, svc.get(req.matches[1])); });
    });
    server.Post(R"(/sessions/([^:/]+)/suggestion(:demand)?)", [&svc](const httplib::Request& req,
                                                                      httplib::Response& res) {
        guarded(res, [&] {
            const auto body = detail::body_of(req);
            SuggestionRequest r;
            r.idle_ms = body.value("idle_ms", Millis{0});
            r.on_demand = req.matches[2].matched;
            if (body.contains("progress") && !body.at("progress").is_null()) r.progress = body.at("progress").get<double>();
            if (auto s = svc.request_suggestion(req.matches[1], r))
                send_json(res, 200, to_json(*s));
            else
                res.status = 204;
        });
    });
    server.Post(R"(/sessions/([^/]+)/events)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, svc.append_event(req.matches[1], detail::body_of(req))); });
    });
    server.Get(R"(/sessions/([^/]+)/log)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto arr = nlohmann::json::array();
            for (const auto& r : svc.log(req.matches[1])) arr.push_back(to_json(r));
            send_json(res, 200, arr);
        });
    });
}

}  // namespace cowrite
