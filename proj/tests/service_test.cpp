#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "cowrite/service.hpp"
#include "test_support.hpp"

namespace cowrite {
namespace {

using namespace testing_support;

class ServiceTest : public ::testing::Test {
  protected:
    std::shared_ptr<MockBackend> mock = [] {
        auto m = std::make_shared<MockBackend>(false);
        m->set_default(" and the story goes on.");
        return m;
    }();
    Gateway gw{offline_config(), mock};
    Millis now = 1000;
    std::function<Millis()> clock = [this] { return now; };

    SuggestionRequest idle(Millis ms, std::optional<double> progress = std::nullopt) {
        return {ms, false, progress};
    }
};

TEST_F(ServiceTest, IdleThresholdGatesSuggestions) {
    SessionService svc({}, gw, clock);
    const auto id = svc.create(Paradigm::L1, "Once upon a time");
    EXPECT_FALSE(svc.request_suggestion(id, idle(1000)).has_value());
    EXPECT_EQ(mock->calls(), 0u);
    auto s = svc.request_suggestion(id, idle(2500));
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->content, " and the story goes on.");
    EXPECT_EQ(s->paradigm, Paradigm::L1);
    // Single pending suggestion.
    EXPECT_FALSE(svc.request_suggestion(id, idle(5000)).has_value());
    EXPECT_EQ(mock->calls(), 1u);
    EXPECT_EQ(svc.telemetry(id).shown, 1u);
}

TEST_F(ServiceTest, OnDemandOnlyForL0) {
    SessionService svc({}, gw, clock);
    const auto id = svc.create(Paradigm::L0, "Draft");
    EXPECT_THROW(svc.request_suggestion(id, idle(10000)), DomainError);
    EXPECT_TRUE(svc.request_suggestion(id, {0, true, std::nullopt}).has_value());
    EXPECT_THROW(svc.request_suggestion("missing", idle(3000)), NotFoundError);
}

TEST_F(ServiceTest, AdaptiveThresholdFollowsStage) {
    SessionService svc({}, gw, clock);
    const auto id = svc.create(Paradigm::L3, "Opening line.");
    EXPECT_FALSE(svc.request_suggestion(id, idle(2500, 0.1)).has_value());
    auto s = svc.request_suggestion(id, idle(1600, 0.9));
    ASSERT_TRUE(s.has_value());
    // Late stage prompts with the history-aware template.
    EXPECT_EQ(mock->requests().back()[0].content, std::string(prompts::completion_l2));
    EXPECT_THROW(svc.request_suggestion(id, idle(1600, 1.5)), DomainError);
}

TEST_F(ServiceTest, EventsDriveDocumentAndCounters) {
    SessionService svc({}, gw, clock);
    const auto id = svc.create(Paradigm::L1, "Once upon a time");
    auto s = svc.request_suggestion(id, idle(3000));
    now += 400;
    auto ack = svc.append_event(id, {{"type", "feedback"}, {"suggestion_id", s->id}, {"kind", "accept"}});
    EXPECT_EQ(ack.at("text"), "Once upon a time and the story goes on.");
    EXPECT_EQ(svc.log(id).back().feedback.decided_at, 1400);
    EXPECT_EQ(svc.log(id).back().feedback.decision_ms, 1400 - s->created_at);
    EXPECT_THROW(svc.append_event(id, {{"type", "feedback"}, {"suggestion_id", s->id}, {"kind", "accept"}}),
                 StaleFeedbackError);

    svc.append_event(id, {{"type", "focus"}});
    svc.append_event(id, {{"type", "focus"}});
    svc.append_event(id, {{"type", "active"}, {"ms", 1500}});
    svc.append_event(id, {{"type", "typed"}, {"text", " The end."}});
    EXPECT_EQ(svc.state(id).pending.added_text, " The end.");
    const auto t = svc.telemetry(id);
    EXPECT_EQ(t.window_switches, 2u);
    EXPECT_EQ(t.active_ms, 1500);
    EXPECT_EQ(t.accepted, 1u);
    EXPECT_THROW(svc.append_event(id, {{"type", "teleport"}}), DomainError);
    EXPECT_THROW(svc.append_event(id, {{"type", "active"}, {"ms", -1}}), DomainError);
}

TEST_F(ServiceTest, AcceptanceRateMatchesLogCounting) {
    SessionService svc({}, gw, clock);
    const auto id = svc.create(Paradigm::L2, "Notes:");
    const char* kinds[] = {"accept", "reject", "accept", "modify", "reject", "accept"};
    for (const char* k : kinds) {
        auto s = svc.request_suggestion(id, idle(2500));
        nlohmann::json ev = {{"type", "feedback"}, {"suggestion_id", s->id}, {"kind", k}};
        if (std::string(k) == "modify") ev["final_text"] = " edited.";
        svc.append_event(id, ev);
    }
    const auto log = svc.log(id);
    std::size_t accepts = 0;
    for (const auto& r : log) accepts += r.feedback.kind == FeedbackKind::accept;
    const auto t = svc.telemetry(id);
    EXPECT_EQ(t.shown, log.size());
    EXPECT_EQ(t.accepted + t.modified + t.rejected, t.shown);
    EXPECT_DOUBLE_EQ(*t.acceptance_rate(), static_cast<double>(accepts) / static_cast<double>(log.size()));
}

// Random event script; returns the ids of the sessions it touched.
std::vector<std::string> random_activity(SessionService& svc, std::mt19937& rng, Millis& now) {
    std::vector<std::string> ids;
    for (int s = 0; s < 4; ++s) {
        const Paradigm p = static_cast<Paradigm>(rng() % 4);
        const auto id = svc.create(p, "Seed text " + std::to_string(s) + ".");
        ids.push_back(id);
        for (int step = 0; step < 40; ++step) {
            now += 1 + rng() % 900;
            const auto st = svc.state(id);
            switch (rng() % 6) {
                case 0:
                    svc.request_suggestion(id, {static_cast<Millis>(rng() % 4000), p == Paradigm::L0, std::nullopt});
                    break;
                case 1:
                    if (auto pending = svc.get(id).at("pending"); !pending.is_null()) {
                        const char* kinds[] = {"accept", "modify", "reject"};
                        const std::string k = kinds[rng() % 3];
                        nlohmann::json ev = {{"type", "feedback"}, {"suggestion_id", pending.at("id")}, {"kind", k}};
                        if (k == "modify") ev["final_text"] = " changed " + std::to_string(step);
                        svc.append_event(id, ev);
                    }
                    break;
                case 2: svc.append_event(id, {{"type", "typed"}, {"text", " w" + std::to_string(step)}}); break;
                case 3: {
                    const std::size_t len = utf8::decode(st.text).size();
                    if (len > 2) {
                        const std::size_t off = rng() % (len - 1);
                        svc.append_event(id, {{"type", "delete"}, {"offset", off}, {"length", 1 + rng() % 2}});
                    }
                    break;
                }
                case 4: svc.append_event(id, {{"type", "focus"}}); break;
                case 5: svc.append_event(id, {{"type", "active"}, {"ms", rng() % 10000}}); break;
            }
        }
    }
    return ids;
}

TEST_F(ServiceTest, RestartReplaysIdenticalSessions) {
    const auto dir = fresh_dir("service_replay");
    ServiceConfig cfg;
    cfg.data_dir = dir.string();
    std::mt19937 rng(77);
    std::map<std::string, std::tuple<DocumentState, Telemetry, nlohmann::json>> before;
    {
        SessionService svc(cfg, gw, clock);
        for (const auto& id : random_activity(svc, rng, now))
            before[id] = {svc.state(id), svc.telemetry(id), svc.get(id).at("pending")};
    }
    auto offline = std::make_shared<MockBackend>(true);
    Gateway gw2(offline_config(), offline);
    SessionService restored(cfg, gw2, clock);
    EXPECT_EQ(restored.session_ids().size(), before.size());
    for (const auto& [id, snap] : before) {
        EXPECT_EQ(restored.state(id), std::get<0>(snap));
        EXPECT_EQ(restored.telemetry(id), std::get<1>(snap));
        EXPECT_EQ(restored.get(id).at("pending"), std::get<2>(snap));
    }
    EXPECT_EQ(offline->calls(), 0u);
    std::filesystem::remove_all(dir);
}

TEST_F(ServiceTest, CorruptLogNamesLine) {
    const auto dir = fresh_dir("service_corrupt");
    {
        std::ofstream out(dir / "abc.jsonl");
        out << R"({"type":"create","paradigm":"L1","initial_text":"x","at":1})" << "\n" << "{broken\n";
    }
    ServiceConfig cfg;
    cfg.data_dir = dir.string();
    try {
        SessionService svc(cfg, gw, clock);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

class HttpService : public ServiceTest {
  protected:
    void SetUp() override {
        svc = std::make_unique<SessionService>(ServiceConfig{}, gw, clock);
        register_routes(server, *svc);
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    void TearDown() override {
        server.stop();
        thread.join();
    }
    httplib::Result post(const std::string& path, const nlohmann::json& body) {
        httplib::Client cli("127.0.0.1", port);
        return cli.Post(path, body.dump(), "application/json");
    }
    httplib::Result get(const std::string& path) {
        httplib::Client cli("127.0.0.1", port);
        return cli.Get(path);
    }
    std::unique_ptr<SessionService> svc;
    httplib::Server server;
    int port = 0;
    std::thread thread;
};

TEST_F(HttpService, SessionRoundTrip) {
    auto created = post("/sessions", {{"paradigm", "L1"}, {"initial_text", "Hello"}});
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    const std::string id = nlohmann::json::parse(created->body).at("session_id");

    auto quiet = post("/sessions/" + id + "/suggestion", {{"idle_ms", 1000}});
    EXPECT_EQ(quiet->status, 204);
    auto s = post("/sessions/" + id + "/suggestion", {{"idle_ms", 2500}});
    ASSERT_EQ(s->status, 200);
    const auto sug = nlohmann::json::parse(s->body);
    EXPECT_EQ(sug.at("content"), " and the story goes on.");
    EXPECT_EQ(post("/sessions/" + id + "/suggestion", {{"idle_ms", 2500}})->status, 204);

    auto ack = post("/sessions/" + id + "/events",
                    {{"type", "feedback"}, {"suggestion_id", sug.at("id")}, {"kind", "accept"}});
    ASSERT_EQ(ack->status, 200);
    EXPECT_EQ(nlohmann::json::parse(ack->body).at("text"), "Hello and the story goes on.");
    auto stale = post("/sessions/" + id + "/events",
                      {{"type", "feedback"}, {"suggestion_id", sug.at("id")}, {"kind", "accept"}});
    EXPECT_EQ(stale->status, 409);

    auto state = nlohmann::json::parse(get("/sessions/" + id)->body);
    EXPECT_EQ(state.at("telemetry").at("shown"), 1);
    EXPECT_EQ(state.at("idle_threshold_ms"), 2000);
    auto log = nlohmann::json::parse(get("/sessions/" + id + "/log")->body);
    ASSERT_EQ(log.size(), 1u);
    EXPECT_EQ(log[0].at("feedback").at("kind"), "accept");
}

TEST_F(HttpService, L0DemandVariantAndErrors) {
    const std::string id =
        nlohmann::json::parse(post("/sessions", {{"paradigm", "L0"}, {"initial_text", "x"}})->body).at("session_id");
    EXPECT_EQ(post("/sessions/" + id + "/suggestion", {{"idle_ms", 9000}})->status, 400);
    EXPECT_EQ(post("/sessions/" + id + "/suggestion:demand", nlohmann::json::object())->status, 200);
    EXPECT_EQ(get("/sessions/nope")->status, 404);
    EXPECT_EQ(post("/sessions/nope/events", {{"type", "focus"}})->status, 404);
    EXPECT_EQ(post("/sessions", {{"paradigm", "L9"}})->status, 400);
    httplib::Client cli("127.0.0.1", port);
    EXPECT_EQ(cli.Post("/sessions/" + id + "/events", "{not json", "application/json")->status, 400);
}

}  // namespace
}  // namespace cowrite
