#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cowrite/core.hpp"

namespace cowrite {
namespace {

Suggestion sugg(std::string id, std::string content) {
    return {std::move(id), std::move(content), Paradigm::L1, "h", 0};
}

UserFeedback fb(FeedbackKind k, Millis at, std::string final_text = "") {
    return {k, std::move(final_text), at, 10};
}

TEST(Transition, Accept) {
    auto s = transition(DocumentState::start("Hello", 0), sugg("1", "world"), fb(FeedbackKind::accept, 1));
    EXPECT_EQ(s.text, "Helloworld");
    EXPECT_EQ(s.log.size(), 1u);
}

TEST(Transition, Reject) {
    auto s = transition(DocumentState::start("Hello", 0), sugg("1", "world"), fb(FeedbackKind::reject, 1));
    EXPECT_EQ(s.text, "Hello");
    EXPECT_EQ(s.log.size(), 1u);
}

TEST(Transition, Modify) {
    auto s = transition(DocumentState::start("A", 0), sugg("1", "x"), fb(FeedbackKind::modify, 1, "B!"));
    EXPECT_EQ(s.text, "AB!");
}

TEST(Transition, DuplicateIdRejected) {
    auto s = transition(DocumentState::start("A", 0), sugg("1", "x"), fb(FeedbackKind::accept, 1));
    EXPECT_THROW(transition(s, sugg("1", "y"), fb(FeedbackKind::accept, 2)), DuplicateTransitionError);
}

TEST(Transition, FeedbackInvariants) {
    auto s = DocumentState::start("A", 0);
    EXPECT_THROW(transition(s, sugg("1", "x"), fb(FeedbackKind::modify, 1)), DomainError);
    EXPECT_THROW(transition(s, sugg("1", "x"), fb(FeedbackKind::accept, 1, "y")), DomainError);
    EXPECT_THROW(transition(s, sugg("1", ""), fb(FeedbackKind::accept, 1)), EmptySuggestionError);
    auto t = transition(s, sugg("1", "x"), fb(FeedbackKind::accept, 5));
    EXPECT_THROW(transition(t, sugg("2", "y"), fb(FeedbackKind::accept, 5)), DomainError);
}

TEST(Transition, InputStateUnchanged) {
    const auto s = DocumentState::start("Hello", 0);
    auto t = transition(s, sugg("1", "!"), fb(FeedbackKind::accept, 1));
    EXPECT_EQ(s.text, "Hello");
    EXPECT_TRUE(s.log.empty());
    EXPECT_EQ(t.updated_at, 1);
}

TEST(UserEdits, DeleteSplitsBaseAndTyped) {
    auto s = DocumentState::start("abcdef", 0);
    s = type_text(s, "XYZ", 1);
    EXPECT_EQ(s.text, "abcdefXYZ");
    s = delete_range(s, 4, 3, 2);  // "ef" from base, "X" from typed
    EXPECT_EQ(s.text, "abcdYZ");
    ASSERT_EQ(s.pending.deleted_spans.size(), 1u);
    EXPECT_EQ(s.pending.deleted_spans[0], (DeletedSpan{4, "ef"}));
    EXPECT_EQ(s.pending.added_text, "YZ");
    EXPECT_THROW(delete_range(s, 5, 2, 3), DomainError);
}

TEST(RenderSnapshot, NoLogIsRawText) {
    EXPECT_EQ(render_snapshot(DocumentState::start("plain text", 0)), "plain text");
}

TEST(RenderSnapshot, AcceptedSuggestionTagged) {
    auto s = transition(DocumentState::start("Say ", 0), sugg("1", "foo"), fb(FeedbackKind::accept, 1));
    EXPECT_NE(render_snapshot(s).find("<accept>foo</accept>"), std::string::npos);
}

TEST(RenderSnapshot, ModifyRendersRejectThenAdd) {
    auto s = transition(DocumentState::start("A ", 0), sugg("1", "foo"), fb(FeedbackKind::modify, 1, "bar"));
    EXPECT_EQ(render_snapshot(s), "A <reject>foo</reject><add>bar</add>");
}

TEST(RenderSnapshot, DeleteThenTypeInDocumentOrder) {
    // Three events: accept "bar", delete it, type "baz".
    auto s = DocumentState::start("foo ", 0);
    s = transition(s, sugg("1", "bar"), fb(FeedbackKind::accept, 1));
    s = delete_range(s, 4, 3, 2);
    s = type_text(s, "baz", 3);
    EXPECT_EQ(s.text, "foo baz");
    EXPECT_EQ(render_snapshot(s), "foo <del>bar</del><add>baz</add>");
}

TEST(RenderSnapshot, WindowFlattensOlderRounds) {
    auto s = DocumentState::start("x ", 0);
    s = transition(s, sugg("1", "one "), fb(FeedbackKind::accept, 1));
    s = transition(s, sugg("2", "two "), fb(FeedbackKind::reject, 2));
    s = transition(s, sugg("3", "three"), fb(FeedbackKind::accept, 3));
    EXPECT_EQ(render_snapshot(s), "x <accept>one </accept><reject>two </reject><accept>three</accept>");
    EXPECT_EQ(render_snapshot(s, {.window = 1}), "x one <accept>three</accept>");
    EXPECT_EQ(render_snapshot(s, {.window = 0}), "x one three");
}

// Random event sequences over a small alphabet; no '<' so tags cannot collide.
struct RandomSession {
    DocumentState state;
    std::vector<InteractionRecord> records;
};

RandomSession random_session(std::mt19937& rng, int events) {
    static const std::u32string alphabet = U"ab c.世界";
    auto word = [&](std::size_t max_len) {
        std::uniform_int_distribution<std::size_t> len(1, max_len);
        std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
        std::u32string w(len(rng), U'a');
        for (auto& c : w) c = alphabet[pick(rng)];
        return utf8::encode(w);
    };
    RandomSession r{DocumentState::start(word(6), 0), {}};
    Millis now = 1;
    int next_id = 0;
    std::uniform_int_distribution<int> kind(0, 4);
    for (int e = 0; e < events; ++e) {
        ++now;
        switch (kind(rng)) {
            case 0: r.state = type_text(r.state, word(4), now); break;
            case 1: {
                const std::size_t n = utf8::length(r.state.text);
                if (n == 0) break;
                std::uniform_int_distribution<std::size_t> off(0, n - 1);
                const std::size_t o = off(rng);
                std::uniform_int_distribution<std::size_t> len(1, std::min<std::size_t>(3, n - o));
                r.state = delete_range(r.state, o, len(rng), now);
                break;
            }
            default: {
                const auto k = static_cast<FeedbackKind>(std::uniform_int_distribution<int>(0, 2)(rng));
                r.state = transition(r.state, sugg(std::to_string(next_id++), word(5)),
                                     fb(k, now, k == FeedbackKind::modify ? word(3) : ""));
            }
        }
    }
    return r;
}

TEST(Properties, TagRoundTrip) {
    std::mt19937 rng(17);
    for (int t = 0; t < 300; ++t) {
        auto r = random_session(rng, 25);
        EXPECT_EQ(strip_snapshot(render_snapshot(r.state)), r.state.text);
        EXPECT_EQ(strip_snapshot(render_snapshot(r.state, {.window = 2})), r.state.text);
    }
}

TEST(Properties, ReplayReproducesText) {
    std::mt19937 rng(19);
    for (int t = 0; t < 300; ++t) {
        auto r = random_session(rng, 25);
        auto again = replay(r.state.initial_text, r.state.log);
        EXPECT_EQ(utf8::encode(utf8::decode(again.text)), again.text);
        // Pending edits of the final round are not part of the log.
        auto with_pending = again;
        std::u32string t32 = utf8::decode(with_pending.text);
        for (const auto& d : r.state.pending.deleted_spans) t32.erase(d.offset, utf8::length(d.text));
        t32 += utf8::decode(r.state.pending.added_text);
        EXPECT_EQ(utf8::encode(t32), r.state.text);
        EXPECT_EQ(again.log, r.state.log);
    }
}

TEST(Properties, MonotoneLog) {
    auto s = DocumentState::start("", 0);
    for (int n = 1; n <= 20; ++n) {
        s = transition(s, sugg(std::to_string(n), "w"), fb(FeedbackKind::reject, n));
        EXPECT_EQ(s.log.size(), static_cast<std::size_t>(n));
    }
}

TEST(EventLog, JsonLinesRoundTrip) {
    std::mt19937 rng(23);
    auto r = random_session(rng, 40);
    std::stringstream ss;
    write_log(ss, r.state.log);
    std::size_t lines = 0;
    for (char c : ss.str()) lines += c == '\n';
    EXPECT_EQ(lines, r.state.log.size());
    EXPECT_EQ(read_log(ss), r.state.log);
}

TEST(EventLog, ReplayRejectsInconsistentSpan) {
    auto s = DocumentState::start("abc", 0);
    s = delete_range(s, 0, 1, 1);
    s = transition(s, sugg("1", "x"), fb(FeedbackKind::accept, 2));
    auto log = s.log;
    log[0].deleted_spans[0].text = "z";
    EXPECT_THROW(replay("abc", log), DomainError);
}

TEST(EvalQueryRow, Validation) {
    nlohmann::json row = {{"id", "q1"},        {"domain_tag", "Wildlife"}, {"category", "creative"},
                          {"article_id", "a"}, {"position", "middle"},     {"progress", 0.5},
                          {"context", "c"},    {"reference", "r"}};
    auto q = query_from_json(row);
    EXPECT_EQ(q.domain_tag, "D7");
    row["progress"] = 1.5;
    EXPECT_THROW(query_from_json(row), DomainError);
    row["progress"] = 0.5;
    row["domain_tag"] = "D17";
    EXPECT_THROW(query_from_json(row), DomainError);
}

}  // namespace
}  // namespace cowrite
