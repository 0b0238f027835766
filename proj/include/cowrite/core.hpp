#pragma once

// Document state of a co-writing session and the transition that applies a
// suggestion plus the writer's feedback to it.
//
// Suggestions always attach at the end of the document. Between two feedback
// events the writer may type (appended at the end) or delete ranges; those
// edits are held as pending and folded into the next InteractionRecord.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cowrite/errors.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite {

using Millis = std::int64_t;

enum class Paradigm { L0 = 0, L1 = 1, L2 = 2, L3 = 3 };

inline const char* to_string(Paradigm p) {
    switch (p) {
        case Paradigm::L0: return "L0";
        case Paradigm::L1: return "L1";
        case Paradigm::L2: return "L2";
        case Paradigm::L3: return "L3";
    }
    return "L0";
}

inline Paradigm parse_paradigm(std::string_view s) {
    if (s == "L0") return Paradigm::L0;
    if (s == "L1") return Paradigm::L1;
    if (s == "L2") return Paradigm::L2;
    if (s == "L3") return Paradigm::L3;
    throw DomainError("unknown paradigm: " + std::string(s));
}

struct Suggestion {
    std::string id;
    std::string content;
    Paradigm paradigm = Paradigm::L1;
    std::string prompt_hash;
    Millis created_at = 0;

    bool operator==(const Suggestion&) const = default;
};

enum class FeedbackKind { accept, modify, reject };

inline const char* to_string(FeedbackKind k) {
    switch (k) {
        case FeedbackKind::accept: return "accept";
        case FeedbackKind::modify: return "modify";
        case FeedbackKind::reject: return "reject";
    }
    return "reject";
}

inline FeedbackKind parse_feedback_kind(std::string_view s) {
    if (s == "accept") return FeedbackKind::accept;
    if (s == "modify") return FeedbackKind::modify;
    if (s == "reject") return FeedbackKind::reject;
    throw DomainError("unknown feedback kind: " + std::string(s));
}

struct UserFeedback {
    FeedbackKind kind = FeedbackKind::reject;
    std::string final_text;  // non-empty iff kind == modify
    Millis decided_at = 0;
    Millis decision_ms = 0;

    bool operator==(const UserFeedback&) const = default;
};

/// A deletion of `text` starting at codepoint `offset` of the base text, i.e.
/// the document without the text typed in the same round.
struct DeletedSpan {
    std::size_t offset = 0;
    std::string text;

    bool operator==(const DeletedSpan&) const = default;
};

struct PendingEdits {
    std::vector<DeletedSpan> deleted_spans;  // applied in order
    std::string added_text;                  // follows the base text

    bool empty() const { return deleted_spans.empty() && added_text.empty(); }
    bool operator==(const PendingEdits&) const = default;
};

struct InteractionRecord {
    Suggestion suggestion;
    UserFeedback feedback;
    std::vector<DeletedSpan> deleted_spans;
    std::string added_text;

    bool operator==(const InteractionRecord&) const = default;
};

struct DocumentState {
    std::string text;
    std::string initial_text;
    std::vector<InteractionRecord> log;
    PendingEdits pending;
    Millis created_at = 0;
    Millis updated_at = 0;

    static DocumentState start(std::string initial, Millis now) {
        DocumentState s;
        s.text = initial;
        s.initial_text = std::move(initial);
        s.created_at = now;
        s.updated_at = now;
        return s;
    }

    bool operator==(const DocumentState&) const = default;
};

namespace detail {

inline Millis last_decision(const DocumentState& s) {
    return s.log.empty() ? s.created_at : s.log.back().feedback.decided_at;
}

inline void validate_feedback(const UserFeedback& f) {
    if (f.kind == FeedbackKind::modify && f.final_text.empty())
        throw DomainError("modify feedback requires final_text");
    if (f.kind != FeedbackKind::modify && !f.final_text.empty())
        throw DomainError("final_text is only allowed with modify feedback");
    if (f.decision_ms < 0) throw DomainError("decision_ms must be non-negative");
}

/// Codepoint length of the base region (text without this round's typed text).
inline std::size_t base_length(const DocumentState& s) {
    return utf8::length(s.text) - utf8::length(s.pending.added_text);
}

}  // namespace detail

/// Appends typed text at the end of the document.
inline DocumentState type_text(const DocumentState& state, std::string_view typed, Millis now) {
    DocumentState next = state;
    next.text += typed;
    next.pending.added_text += typed;
    next.updated_at = std::max(next.updated_at, now);
    return next;
}

/// Removes `length` codepoints starting at codepoint `offset`.
inline DocumentState delete_range(const DocumentState& state, std::size_t offset, std::size_t length, Millis now) {
    std::u32string cur = utf8::decode(state.text);
    if (offset > cur.size() || length > cur.size() - offset)
        throw DomainError("deletion range outside the document");
    if (length == 0) return state;
    DocumentState next = state;
    const std::size_t base = detail::base_length(state);
    if (offset < base) {
        const std::size_t in_base = std::min(length, base - offset);
        next.pending.deleted_spans.push_back({offset, utf8::encode(std::u32string_view(cur).substr(offset, in_base))});
    }
    const std::size_t typed_from = std::max(offset, base) - base;
    const std::size_t typed_to = offset + length > base ? offset + length - base : 0;
    if (typed_to > typed_from) {
        std::u32string added = utf8::decode(next.pending.added_text);
        added.erase(typed_from, typed_to - typed_from);
        next.pending.added_text = utf8::encode(added);
    }
    cur.erase(offset, length);
    next.text = utf8::encode(cur);
    next.updated_at = std::max(next.updated_at, now);
    return next;
}

/// Applies a suggestion and the writer's response. Pending edits move into the
/// new record. Decision times must strictly increase along the log.
inline DocumentState transition(const DocumentState& state, const Suggestion& suggestion, const UserFeedback& feedback) {
    for (const auto& r : state.log)
        if (r.suggestion.id == suggestion.id)
            throw DuplicateTransitionError("suggestion already in log: " + suggestion.id);
    if (suggestion.content.empty()) throw EmptySuggestionError("suggestion content is empty");
    detail::validate_feedback(feedback);
    if (!state.log.empty() && feedback.decided_at <= detail::last_decision(state))
        throw DomainError("feedback decided_at must increase along the log");

    DocumentState next = state;
    if (feedback.kind == FeedbackKind::accept) next.text += suggestion.content;
    if (feedback.kind == FeedbackKind::modify) next.text += feedback.final_text;
    next.log.push_back({suggestion, feedback, state.pending.deleted_spans, state.pending.added_text});
    next.pending = {};
    next.updated_at = std::max(next.updated_at, feedback.decided_at);
    return next;
}

namespace detail {

/// Applies one round of user edits to `text` (codepoints), checking that each
/// recorded span matches what is actually there.
inline void apply_edits(std::u32string& text, const std::vector<DeletedSpan>& spans, std::string_view added) {
    for (const auto& d : spans) {
        const std::u32string removed = utf8::decode(d.text);
        if (d.offset > text.size() || text.compare(d.offset, removed.size(), removed) != 0)
            throw DomainError("deleted span does not match the document at offset " + std::to_string(d.offset));
        text.erase(d.offset, removed.size());
    }
    text += utf8::decode(added);
}

}  // namespace detail

/// Rebuilds a document from its initial text and a sequence of records.
inline DocumentState replay(const std::string& initial_text, const std::vector<InteractionRecord>& log,
                            Millis created_at = 0) {
    DocumentState s = DocumentState::start(initial_text, created_at);
    for (const auto& r : log) {
        std::u32string t = utf8::decode(s.text);
        detail::apply_edits(t, r.deleted_spans, r.added_text);
        s.text = utf8::encode(t);
        s.pending = {r.deleted_spans, r.added_text};
        s = transition(s, r.suggestion, r.feedback);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Annotated snapshot

enum class SegmentTag { none, del, accept, reject, add };

inline bool is_visible(SegmentTag t) { return t != SegmentTag::del && t != SegmentTag::reject; }

struct Segment {
    SegmentTag tag = SegmentTag::none;
    std::size_t round = 0;  // index of the record that produced it; log.size() for pending edits
    std::u32string text;
};

namespace detail {

inline void delete_visible(std::vector<Segment>& segs, std::size_t offset, std::size_t length, std::size_t round) {
    std::vector<Segment> out;
    std::size_t pos = 0;
    const std::size_t end = offset + length;
    for (auto& seg : segs) {
        if (!is_visible(seg.tag)) {
            out.push_back(std::move(seg));
            continue;
        }
        const std::size_t n = seg.text.size();
        const std::size_t lo = std::clamp(offset, pos, pos + n) - pos;
        const std::size_t hi = std::clamp(end, pos, pos + n) - pos;
        if (lo > 0) out.push_back({seg.tag, seg.round, seg.text.substr(0, lo)});
        if (hi > lo) out.push_back({SegmentTag::del, round, seg.text.substr(lo, hi - lo)});
        if (n > hi) out.push_back({seg.tag, seg.round, seg.text.substr(hi)});
        pos += n;
    }
    if (end > pos) throw DomainError("deleted span outside the document");
    segs = std::move(out);
}

inline void apply_round(std::vector<Segment>& segs, const std::vector<DeletedSpan>& spans, const std::string& added,
                        std::size_t round) {
    for (const auto& d : spans) delete_visible(segs, d.offset, utf8::length(d.text), round);
    if (!added.empty()) segs.push_back({SegmentTag::add, round, utf8::decode(added)});
}

}  // namespace detail

/// The document as tagged segments covering every round, pending edits last.
inline std::vector<Segment> snapshot_segments(const DocumentState& state) {
    std::vector<Segment> segs;
    if (!state.initial_text.empty()) segs.push_back({SegmentTag::none, 0, utf8::decode(state.initial_text)});
    for (std::size_t r = 0; r < state.log.size(); ++r) {
        const auto& rec = state.log[r];
        detail::apply_round(segs, rec.deleted_spans, rec.added_text, r);
        const std::u32string sugg = utf8::decode(rec.suggestion.content);
        switch (rec.feedback.kind) {
            case FeedbackKind::accept: segs.push_back({SegmentTag::accept, r, sugg}); break;
            case FeedbackKind::reject: segs.push_back({SegmentTag::reject, r, sugg}); break;
            case FeedbackKind::modify:
                segs.push_back({SegmentTag::reject, r, sugg});
                segs.push_back({SegmentTag::add, r, utf8::decode(rec.feedback.final_text)});
                break;
        }
    }
    detail::apply_round(segs, state.pending.deleted_spans, state.pending.added_text, state.log.size());
    return segs;
}

struct SnapshotOptions {
    /// Number of most recent records whose annotations are kept; older rounds
    /// render as plain text with their hidden content dropped. Pending edits are
    /// always annotated.
    std::optional<std::size_t> window;
};

/// The document annotated with <del>, <accept>, <reject> and <add> tags.
inline std::string render_snapshot(const DocumentState& state, SnapshotOptions opts = {}) {
    const std::size_t n = state.log.size();
    const std::size_t first_kept = opts.window && *opts.window < n ? n - *opts.window : 0;
    std::vector<Segment> merged;
    for (auto& seg : snapshot_segments(state)) {
        if (seg.tag != SegmentTag::none && seg.round < first_kept) {
            if (!is_visible(seg.tag)) continue;
            seg.tag = SegmentTag::none;
        }
        if (seg.text.empty()) continue;
        if (!merged.empty() && merged.back().tag == seg.tag)
            merged.back().text += seg.text;
        else
            merged.push_back(std::move(seg));
    }
    std::string out;
    for (const auto& seg : merged) {
        const char* name = nullptr;
        switch (seg.tag) {
            case SegmentTag::none: break;
            case SegmentTag::del: name = "del"; break;
            case SegmentTag::accept: name = "accept"; break;
            case SegmentTag::reject: name = "reject"; break;
            case SegmentTag::add: name = "add"; break;
        }
        if (name) out += std::string("<") + name + ">";
        out += utf8::encode(seg.text);
        if (name) out += std::string("</") + name + ">";
    }
    return out;
}

/// Removes the snapshot tags together with <del> and <reject> payloads.
inline std::string strip_snapshot(std::string_view s) {
    std::string out;
    std::size_t k = 0;
    bool hidden = false;
    while (k < s.size()) {
        bool matched = false;
        for (std::string_view tag : {"del", "accept", "reject", "add"}) {
            for (bool closing : {false, true}) {
                std::string t = std::string(closing ? "</" : "<") + std::string(tag) + ">";
                if (s.compare(k, t.size(), t) == 0) {
                    if (tag == "del" || tag == "reject") hidden = !closing;
                    k += t.size();
                    matched = true;
                    break;
                }
            }
            if (matched) break;
        }
        if (matched) continue;
        if (!hidden) out += s[k];
        ++k;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON serialization

inline nlohmann::json to_json(const Suggestion& s) {
    return {{"id", s.id},
            {"content", s.content},
            {"paradigm", to_string(s.paradigm)},
            {"prompt_hash", s.prompt_hash},
            {"created_at", s.created_at}};
}

inline nlohmann::json to_json(const UserFeedback& f) {
    return {{"kind", to_string(f.kind)},
            {"final_text", f.final_text},
            {"decided_at", f.decided_at},
            {"decision_ms", f.decision_ms}};
}

inline nlohmann::json to_json(const std::vector<DeletedSpan>& spans) {
    auto arr = nlohmann::json::array();
    for (const auto& d : spans) arr.push_back({{"offset", d.offset}, {"text", d.text}});
    return arr;
}

inline nlohmann::json to_json(const InteractionRecord& r) {
    return {{"suggestion", to_json(r.suggestion)},
            {"feedback", to_json(r.feedback)},
            {"deleted_spans", to_json(r.deleted_spans)},
            {"added_text", r.added_text}};
}

inline Suggestion suggestion_from_json(const nlohmann::json& j) {
    Suggestion s;
    s.id = j.at("id").get<std::string>();
    s.content = j.at("content").get<std::string>();
    s.paradigm = parse_paradigm(j.at("paradigm").get<std::string>());
    s.prompt_hash = j.value("prompt_hash", "");
    s.created_at = j.value("created_at", Millis{0});
    return s;
}

inline UserFeedback feedback_from_json(const nlohmann::json& j) {
    UserFeedback f;
    f.kind = parse_feedback_kind(j.at("kind").get<std::string>());
    f.final_text = j.value("final_text", "");
    f.decided_at = j.at("decided_at").get<Millis>();
    f.decision_ms = j.value("decision_ms", Millis{0});
    return f;
}

inline std::vector<DeletedSpan> spans_from_json(const nlohmann::json& j) {
    std::vector<DeletedSpan> out;
    for (const auto& d : j) out.push_back({d.at("offset").get<std::size_t>(), d.at("text").get<std::string>()});
    return out;
}

inline InteractionRecord record_from_json(const nlohmann::json& j) {
    return {suggestion_from_json(j.at("suggestion")), feedback_from_json(j.at("feedback")),
            spans_from_json(j.value("deleted_spans", nlohmann::json::array())), j.value("added_text", "")};
}

/// One record per line.
inline void write_log(std::ostream& os, const std::vector<InteractionRecord>& log) {
    for (const auto& r : log) os << to_json(r).dump() << '\n';
}

inline std::vector<InteractionRecord> read_log(std::istream& is) {
    std::vector<InteractionRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("log line " + std::to_string(lineno) + ": " + e.what(), line);
        }
    }
    return out;
}

inline nlohmann::json to_json(const DocumentState& s) {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& r : s.log) log.push_back(to_json(r));
    return {{"text", s.text},
            {"initial_text", s.initial_text},
            {"log", log},
            {"pending", {{"deleted_spans", to_json(s.pending.deleted_spans)}, {"added_text", s.pending.added_text}}},
            {"created_at", s.created_at},
            {"updated_at", s.updated_at}};
}

// ---------------------------------------------------------------------------
// Evaluation queries

enum class Category { scientific, creative };
enum class Position { early, middle, late };

inline const char* to_string(Category c) { return c == Category::scientific ? "scientific" : "creative"; }

inline const char* to_string(Position p) {
    switch (p) {
        case Position::early: return "early";
        case Position::middle: return "middle";
        case Position::late: return "late";
    }
    return "early";
}

inline Category parse_category(std::string_view s) {
    if (s == "scientific") return Category::scientific;
    if (s == "creative") return Category::creative;
    throw DomainError("unknown category: " + std::string(s));
}

inline Position parse_position(std::string_view s) {
    if (s == "early") return Position::early;
    if (s == "middle") return Position::middle;
    if (s == "late") return Position::late;
    throw DomainError("unknown position: " + std::string(s));
}

/// The sixteen article domains, tagged D1..D16.
inline constexpr std::string_view kDomainNames[16] = {
    "Technique Report",      "Paper Reading",        "Survey Report",         "Popular Science Article",
    "Principle Analysis",    "Healthy News",         "Wildlife",              "Architecture & Hardware",
    "CS & Education",        "Prose Poem Collection", "Short Fiction",        "Culture",
    "Travel",                "Psychology & Philosophy", "Miscellaneous Talks", "Tweet",
};

/// Accepts "D7" or the domain name; returns the tag "D1".."D16".
inline std::string canonical_domain(std::string_view s) {
    if (s.size() >= 2 && s.size() <= 3 && s[0] == 'D') {
        int n = 0;
        for (char c : s.substr(1)) {
            if (c < '0' || c > '9') throw DomainError("unknown domain: " + std::string(s));
            n = n * 10 + (c - '0');
        }
        if (n >= 1 && n <= 16) return "D" + std::to_string(n);
    }
    for (int i = 0; i < 16; ++i)
        if (kDomainNames[i] == s) return "D" + std::to_string(i + 1);
    throw DomainError("unknown domain: " + std::string(s));
}

struct EvalQuery {
    std::string id;
    std::string domain_tag;  // "D1".."D16"
    Category category = Category::scientific;
    std::string article_id;
    Position position = Position::early;
    double progress = 0.0;  // in [0, 1]
    std::string context;
    std::string reference;

    bool operator==(const EvalQuery&) const = default;
};

/// Validates and builds a query from its JSON row.
inline EvalQuery query_from_json(const nlohmann::json& j) {
    EvalQuery q;
    q.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    q.domain_tag = canonical_domain(j.at("domain_tag").get<std::string>());
    q.category = parse_category(j.at("category").get<std::string>());
    q.article_id = j.at("article_id").is_string() ? j.at("article_id").get<std::string>() : j.at("article_id").dump();
    q.position = parse_position(j.at("position").get<std::string>());
    q.progress = j.at("progress").get<double>();
    q.context = j.at("context").get<std::string>();
    q.reference = j.at("reference").get<std::string>();
    if (!(q.progress >= 0.0 && q.progress <= 1.0)) throw DomainError("progress outside [0, 1]");
    if (q.context.empty()) throw DomainError("empty context");
    if (q.reference.empty()) throw DomainError("empty reference");
    return q;
}

inline nlohmann::json to_json(const EvalQuery& q) {
    return {{"id", q.id},
            {"domain_tag", q.domain_tag},
            {"category", to_string(q.category)},
            {"article_id", q.article_id},
            {"position", to_string(q.position)},
            {"progress", q.progress},
            {"context", q.context},
            {"reference", q.reference}};
}

}  // namespace cowrite
