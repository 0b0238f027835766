#pragma once

// Assistant side of a co-writing session: writing-stage estimate, choice of
// stateless or history-aware prompting, idle thresholds per paradigm, and the
// single-pending-suggestion lifecycle.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cowrite/core.hpp"
#include "cowrite/errors.hpp"
#include "cowrite/gateway.hpp"
#include "cowrite/prompt_templates.hpp"
#include "cowrite/text/tokenize.hpp"

namespace cowrite {

enum class Stage { early = 0, middle = 1, late = 2 };
enum class StageBasis { heuristic, model };
enum class Strategy { stateless, stateful };

inline const char* to_string(Stage s) {
    switch (s) {
        case Stage::early: return "early";
        case Stage::middle: return "middle";
        case Stage::late: return "late";
    }
    return "early";
}

inline Stage parse_stage(std::string_view s) {
    if (s == "early") return Stage::early;
    if (s == "middle") return Stage::middle;
    if (s == "late") return Stage::late;
    throw DomainError("unknown stage: " + std::string(s));
}

inline const char* to_string(Strategy s) { return s == Strategy::stateless ? "stateless" : "stateful"; }
inline const char* to_string(StageBasis b) { return b == StageBasis::heuristic ? "heuristic" : "model"; }

struct StageEstimate {
    Stage stage = Stage::early;
    double progress = 0.0;
    StageBasis basis = StageBasis::heuristic;
};

/// early below 1/3, middle below 2/3, late from there on.
inline Stage stage_for_progress(double progress) {
    if (3.0 * progress < 1.0) return Stage::early;
    if (3.0 * progress < 2.0) return Stage::middle;
    return Stage::late;
}

struct StageConfig {
    std::size_t typical_paragraphs = 12;  // article length assumed when no target is known
};

inline std::size_t paragraph_count(std::string_view text) {
    std::size_t count = 0;
    bool in_para = false;
    std::size_t newlines = 0;
    for (char c : text) {
        if (c == '\n') {
            ++newlines;
            if (newlines >= 2) in_para = false;
        } else if (c != ' ' && c != '\t' && c != '\r') {
            if (!in_para) ++count;
            in_para = true;
            newlines = 0;
        }
    }
    return count;
}

/// Progress is tokens / target_length when a target is given, otherwise
/// paragraphs / typical_paragraphs; clamped to [0, 1].
inline StageEstimate estimate_stage(const DocumentState& state, std::optional<std::size_t> target_length = std::nullopt,
                                    const StageConfig& cfg = {}) {
    double progress = 0.0;
    if (target_length && *target_length > 0) {
        const auto tokens = text::tokenize(state.text, {.keep_punct = false, .fold_case = false}).size();
        progress = static_cast<double>(tokens) / static_cast<double>(*target_length);
    } else if (cfg.typical_paragraphs > 0) {
        progress = static_cast<double>(paragraph_count(state.text)) / static_cast<double>(cfg.typical_paragraphs);
    }
    progress = std::clamp(progress, 0.0, 1.0);
    return {stage_for_progress(progress), progress, StageBasis::heuristic};
}

inline std::string stage_prompt(std::string_view document) {
    return "Classify the writing stage of the document below as exactly one word: early, middle, or late.\n\n"
           "DOCUMENT:\n" +
           std::string(document);
}

/// Stage named by a one-word model reply (case and surrounding punctuation
/// ignored); nullopt for anything else.
inline std::optional<Stage> parse_stage_reply(std::string_view reply) {
    const auto junk = [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return std::isspace(u) || std::ispunct(u);
    };
    while (!reply.empty() && junk(reply.front())) reply.remove_prefix(1);
    while (!reply.empty() && junk(reply.back())) reply.remove_suffix(1);
    std::string w(reply);
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (w == "early") return Stage::early;
    if (w == "middle") return Stage::middle;
    if (w == "late") return Stage::late;
    return std::nullopt;
}

/// Asks the model for the stage; keeps the heuristic progress and falls back to
/// the heuristic stage when the reply is not one of the three words.
inline StageEstimate estimate_stage_with_model(const DocumentState& state, Gateway& gw,
                                               std::optional<std::size_t> target_length = std::nullopt,
                                               const StageConfig& cfg = {}) {
    StageEstimate h = estimate_stage(state, target_length, cfg);
    if (state.text.empty()) return h;
    if (auto s = parse_stage_reply(gw.complete({{"user", stage_prompt(state.text)}})))
        return {*s, h.progress, StageBasis::model};
    return h;
}

struct StrategyPolicy {
    Stage switch_stage = Stage::middle;  // first stage at which L3 turns stateful

    void validate() const {
        if (switch_stage == Stage::early) throw ConfigError("switch_stage must be middle or late");
    }
};

inline Strategy select_strategy(const StageEstimate& stage, const StrategyPolicy& policy, Paradigm paradigm) {
    switch (paradigm) {
        case Paradigm::L0:
        case Paradigm::L1: return Strategy::stateless;
        case Paradigm::L2: return Strategy::stateful;
        case Paradigm::L3: return stage.stage >= policy.switch_stage ? Strategy::stateful : Strategy::stateless;
    }
    return Strategy::stateless;
}

struct IdlePolicy {
    Millis base_ms = 2000;
    Millis early_ms = 3000;
    Millis middle_ms = 2000;
    Millis late_ms = 1500;

    void validate() const {
        if (base_ms <= 0 || early_ms <= 0 || middle_ms <= 0 || late_ms <= 0)
            throw ConfigError("idle thresholds must be positive");
        if (!(early_ms >= middle_ms && middle_ms >= late_ms))
            throw ConfigError("idle thresholds must not increase from early to late");
    }
};

/// Idle time after which a suggestion is offered; nullopt means never (L0).
inline std::optional<Millis> idle_threshold(const StageEstimate& stage, const IdlePolicy& policy, Paradigm paradigm) {
    switch (paradigm) {
        case Paradigm::L0: return std::nullopt;
        case Paradigm::L1:
        case Paradigm::L2: return policy.base_ms;
        case Paradigm::L3:
            switch (stage.stage) {
                case Stage::early: return policy.early_ms;
                case Stage::middle: return policy.middle_ms;
                case Stage::late: return policy.late_ms;
            }
    }
    return std::nullopt;
}

struct ProposeConfig {
    std::string model;                   // empty uses the gateway's model
    std::optional<double> temperature;   // empty uses the gateway's temperature
    SnapshotOptions snapshot;
};

/// Stateless: the first-level completion prompt plus "CONTEXT:\n" and the text.
/// Stateful: the history-aware prompt plus the annotated snapshot.
inline std::vector<Message> completion_messages(const DocumentState& state, Strategy strategy,
                                                const SnapshotOptions& snapshot = {}) {
    if (strategy == Strategy::stateless)
        return {{"system", std::string(prompts::completion_l1)}, {"user", "CONTEXT:\n" + state.text}};
    if (state.text.empty()) throw DomainError("stateful proposal needs a non-empty document");
    return {{"system", std::string(prompts::completion_l2)}, {"user", render_snapshot(state, snapshot)}};
}

inline Suggestion propose(const DocumentState& state, Strategy strategy, Gateway& gw, std::string id, Millis now,
                          Paradigm paradigm, const ProposeConfig& cfg = {}) {
    const auto messages = completion_messages(state, strategy, cfg.snapshot);
    const RequestParams params{cfg.model.empty() ? gw.config().model : cfg.model,
                               cfg.temperature.value_or(gw.config().temperature)};
    std::string content = gw.complete(messages, params);
    if (content.find_first_not_of(" \t\r\n") == std::string::npos)
        throw EmptySuggestionError("model returned an empty continuation");
    return {std::move(id), std::move(content), paradigm, cache_key(messages, params), now};
}

/// A document plus at most one pending suggestion.
class Session {
  public:
    Session(Paradigm paradigm, DocumentState state) : paradigm_(paradigm), state_(std::move(state)) {}

    Paradigm paradigm() const { return paradigm_; }
    const DocumentState& state() const { return state_; }
    const std::optional<Suggestion>& pending() const { return pending_; }

    void offer(Suggestion s) {
        if (pending_) throw ConflictError("a suggestion is already pending");
        pending_ = std::move(s);
    }

    /// Applies feedback to the pending suggestion; decision_ms is measured from
    /// the suggestion's creation.
    const DocumentState& handle_feedback(const std::string& suggestion_id, UserFeedback feedback) {
        if (!pending_ || pending_->id != suggestion_id)
            throw StaleFeedbackError("feedback for a suggestion that is not pending: " + suggestion_id);
        feedback.decision_ms = std::max<Millis>(0, feedback.decided_at - pending_->created_at);
        state_ = transition(state_, *pending_, feedback);
        pending_.reset();
        return state_;
    }

    void type(std::string_view typed, Millis now) { state_ = type_text(state_, typed, now); }
    void erase(std::size_t offset, std::size_t length, Millis now) { state_ = delete_range(state_, offset, length, now); }

  private:
    Paradigm paradigm_;
    DocumentState state_;
    std::optional<Suggestion> pending_;
};

}  // namespace cowrite
