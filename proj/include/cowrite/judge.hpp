#pragma once

// Acceptance judges: the hierarchical checklist (full or truncated to its
// first layers) and the single-dimension and holistic baselines.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cowrite/boxed_json.hpp"
#include "cowrite/core.hpp"
#include "cowrite/errors.hpp"
#include "cowrite/gateway.hpp"
#include "cowrite/prompt_templates.hpp"
#include "cowrite/text/checks.hpp"

namespace cowrite {

enum class Layer { L1_interaction = 1, L2_surface = 2, L3_semantic = 3 };
enum class RuleAction { reject, accept, comprehensive };

inline const char* to_string(Layer l) {
    switch (l) {
        case Layer::L1_interaction: return "L1_interaction";
        case Layer::L2_surface: return "L2_surface";
        case Layer::L3_semantic: return "L3_semantic";
    }
    return "L3_semantic";
}

struct RuleSpec {
    int number;
    std::string_view name;     // short name used in triggered_condition
    std::string_view heading;  // bold lead-in as it appears in the prompt
    Layer layer;
    RuleAction action;
    std::string_view body;     // text after the heading

    std::string label() const { return std::to_string(number) + ". " + std::string(name); }
};

// clang-format off
inline constexpr std::array<RuleSpec, 17> kHarRules = {{
    {1, "Start repetition", "Start repetition", Layer::L1_interaction, RuleAction::reject,
     "if <COMPLETION> starts with a **repetition** of <USER_INPUT> → reject."},
    {2, "Language mismatch", "Language mismatch", Layer::L1_interaction, RuleAction::reject,
     "if <COMPLETION> and <REFERENCE> are in different languages (e.g., English vs. Simplified Chinese vs. Traditional Chinese) → reject."},
    {3, "Semantic coherence", "Semantic coherence", Layer::L1_interaction, RuleAction::reject,
     "if <USER_INPUT> + <COMPLETION> form a contradictory or incoherent sequence → reject."},
    {4, "Early semantic overlap", "Early semantic overlap with <REFERENCE>", Layer::L1_interaction, RuleAction::accept,
     "if the overlapping content between the beginning of <COMPLETION> and the beginning of <REFERENCE> accounts for more than 50% of the total <COMPLETION> content → accept."},
    {5, "Paired punctuation mark closure", "Paired punctuation mark closure", Layer::L1_interaction, RuleAction::reject,
     "unclosed quotes/brackets introduced in <USER_INPUT> remain unclosed in <COMPLETION> → reject."},
    {6, "Markdown/LaTeX/Code closure", "Markdown/LaTeX/Code closure", Layer::L1_interaction, RuleAction::reject,
     "any opened Markdown/LaTeX/code fences from <USER_INPUT> not properly closed in <COMPLETION> → reject."},
    {7, "Format mismatch", "Format mismatch", Layer::L2_surface, RuleAction::reject,
     "if format mismatch between <COMPLETION> and <REFERENCE> (headings, tables, lists, text) → reject."},
    {8, "Format consistency with preceding text", "Format consistency with preceding text", Layer::L2_surface, RuleAction::reject,
     "the format/style used in <COMPLETION> diverges from the format established by the preceding content of <USER_INPUT> and <REFERENCE>, e.g., changes in list type, indentation levels, heading levels → reject."},
    {9, "Depth mismatch", "Depth mismatch", Layer::L2_surface, RuleAction::reject,
     "specificity/level of detail diverges from <REFERENCE> beyond tolerance (±30%) → reject."},
    {10, "Style/Register mismatch", "Style/Register mismatch", Layer::L2_surface, RuleAction::reject,
     "academic vs conversational vs authoritative diverges from <REFERENCE> → reject."},
    {11, "Sentence type mismatch", "Sentence type mismatch", Layer::L2_surface, RuleAction::reject,
     "declarative vs interrogative vs imperative diverges from <REFERENCE> → reject."},
    {12, "Personal perspective check", "Personal perspective check", Layer::L2_surface, RuleAction::reject,
     "If <COMPLETION> shifts the narrative perspective (first person, second person, third person) established in <USER_INPUT> → reject."},
    {13, "Subset acceptance", "Subset acceptance (lists/tables)", Layer::L3_semantic, RuleAction::accept,
     "if <COMPLETION> is a true subset of <REFERENCE> (same order, no new items; tables must keep columns and header order) → accept."},
    {14, "Topic divergence", "Topic divergence", Layer::L3_semantic, RuleAction::reject,
     "if <COMPLETION> and <REFERENCE> address different topics → reject."},
    {15, "Key entities", "Key entities", Layer::L3_semantic, RuleAction::reject,
     "missing or altered key entities (names, trial IDs, datasets, metrics, units, dates, statistics data, terminology) compared to <REFERENCE> → reject."},
    {16, "Intent mismatch", "Intent mismatch", Layer::L3_semantic, RuleAction::reject,
     "if the intent of <COMPLETION> differs from <REFERENCE> (e.g., summary vs. argument vs. instruction) → reject."},
    {17, "Comprehensive judgment", "Comprehensive judgment", Layer::L3_semantic, RuleAction::comprehensive,
     "if none of the above conditions are triggered, please carefully analyze the <USER_INPUT> and <REFERENCE>, then make a comprehensive judgment on whether to accept the <COMPLETION> based on style, semantics, entities, and other factors."},
}};
// clang-format on

inline const RuleSpec& har_rule(int number) {
    if (number < 1 || number > 17) throw DomainError("no checklist rule " + std::to_string(number));
    return kHarRules[static_cast<std::size_t>(number - 1)];
}

namespace detail {

inline constexpr std::string_view kHarPreamble = R"PROMPT(## Task Description

You are a professional researcher collaborating with your Writing Assistant to complete a document. The Writing Assistant will fill in subsequent content based on the user's typed input <USER_INPUT>. Your responsibility is: given the user's typed input <USER_INPUT>, the Assistant-generated completion <COMPLETION>, and the reference text (original content at the completion position) <REFERENCE>, determine whether this completion should be "accepted" or "rejected".

## Decision Criteria (Checklist)

Please execute strictly in order, first checking blocking conditions. When triggered, make a direct judgment without proceeding to subsequent comparisons.

)PROMPT";

inline constexpr std::string_view kHarPostamble = R"PROMPT(
# Output Format

Please strictly use the following JSON format for output and enclose the entire JSON in \boxed{{ ... }},

\boxed{{
    "accept": true | false,
    "triggered_condition": "the rule number and name (e.g., \"1. Start repetition\")",
    "reasoning": "Provide your reasoning, explicitly mentioning which rule number was triggered and why."
}}

## Task Input

<USER_INPUT>: "{context}"

<REFERENCE>: "{sentence_A}"

<COMPLETION>: "{sentence_B}"
)PROMPT";

}  // namespace detail

/// Rules shown for a checklist whose deepest layer is `deepest`, in prompt
/// order. The comprehensive rule always comes last.
inline std::vector<RuleSpec> included_rules(Layer deepest) {
    std::vector<RuleSpec> out;
    for (const auto& r : kHarRules)
        if (r.action != RuleAction::comprehensive && r.layer <= deepest) out.push_back(r);
    out.push_back(kHarRules[16]);
    return out;
}

/// The checklist template with placeholders intact; rules renumbered 1..n.
inline std::string har_template(Layer deepest = Layer::L3_semantic) {
    std::string out(detail::kHarPreamble);
    int n = 0;
    for (const auto& r : included_rules(deepest)) {
        out += std::to_string(++n) + ". **" + std::string(r.heading) + ":** " + std::string(r.body) + "\n";
    }
    out += detail::kHarPostamble;
    return out;
}

struct FastPathConfig {
    bool enabled = false;
    std::size_t repetition_min_tokens = 2;
    double overlap_threshold = 0.5;
};

struct ChecklistConfig {
    Layer deepest = Layer::L3_semantic;  // included layers are L1 up to this one
    std::string judge_model;             // empty uses the gateway's model
    double temperature = 0.0;
    int max_parse_retries = 2;
    FastPathConfig fast_path;
};

inline std::string render_har_prompt(const EvalQuery& query, std::string_view completion,
                                     const ChecklistConfig& config = {}) {
    return fill_template(har_template(config.deepest), {{"{context}", query.context},
                                                        {"{sentence_A}", query.reference},
                                                        {"{sentence_B}", completion}});
}

enum class JudgeKind { har, logic, style, semantic, holistic };

inline const char* to_string(JudgeKind k) {
    switch (k) {
        case JudgeKind::har: return "har";
        case JudgeKind::logic: return "logic";
        case JudgeKind::style: return "style";
        case JudgeKind::semantic: return "semantic";
        case JudgeKind::holistic: return "holistic";
    }
    return "har";
}

inline JudgeKind parse_judge_kind(std::string_view s) {
    for (auto k : {JudgeKind::har, JudgeKind::logic, JudgeKind::style, JudgeKind::semantic, JudgeKind::holistic})
        if (s == to_string(k)) return k;
    throw DomainError("unknown judge kind: " + std::string(s));
}

struct Verdict {
    bool accept = false;
    std::string triggered_condition;
    std::string reasoning;
    std::string raw_response;
    JudgeKind judge = JudgeKind::har;
    std::map<std::string, double> scores;
    bool parse_error = false;  // conservative reject after exhausting retries
    bool fast_path = false;    // decided without a model call
    int attempts = 0;

    bool operator==(const Verdict&) const = default;
};

inline nlohmann::json to_json(const Verdict& v) {
    nlohmann::json j = {{"accept", v.accept},
                        {"triggered_condition", v.triggered_condition},
                        {"reasoning", v.reasoning},
                        {"raw_response", v.raw_response},
                        {"judge", to_string(v.judge)},
                        {"parse_error", v.parse_error},
                        {"fast_path", v.fast_path},
                        {"attempts", v.attempts}};
    if (!v.scores.empty()) j["scores"] = v.scores;
    return j;
}

namespace detail {

inline std::string string_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    const auto& v = j.at(key);
    return v.is_string() ? v.get<std::string>() : v.dump();
}

/// Integer-valued number, or a string holding one.
inline std::optional<long long> integer_of(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d) return static_cast<long long>(d);
        return std::nullopt;
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        try {
            std::size_t used = 0;
            long long n = std::stoll(s, &used);
            if (used == s.size()) return n;
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

inline long long required_int(const nlohmann::json& j, const char* key, long long lo, long long hi,
                              std::string_view raw) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"", std::string(raw));
    auto n = integer_of(j.at(key));
    if (!n || *n < lo || *n > hi)
        throw SchemaError(std::string("field \"") + key + "\" must be an integer in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]",
                          std::string(raw));
    return *n;
}

inline bool required_bool(const nlohmann::json& j, const char* key, std::string_view raw) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"", std::string(raw));
    const auto& v = j.at(key);
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string() && (v == "true" || v == "false")) return v == "true";
    throw SchemaError(std::string("field \"") + key + "\" must be a boolean", std::string(raw));
}

}  // namespace detail

/// Parses a checklist verdict.
inline Verdict parse_boxed_verdict(std::string_view response) {
    const auto j = extract_json_object(response);
    Verdict v;
    v.accept = detail::required_bool(j, "accept", response);
    v.triggered_condition = detail::string_field(j, "triggered_condition");
    v.reasoning = detail::string_field(j, "reasoning");
    v.raw_response = std::string(response);
    return v;
}

/// Rule number cited by a triggered_condition: its leading number, else the
/// first rule whose short name it mentions.
inline std::optional<int> cited_rule(std::string_view triggered_condition) {
    std::size_t k = 0;
    while (k < triggered_condition.size() && triggered_condition[k] == ' ') ++k;
    int n = 0;
    std::size_t digits = 0;
    while (k < triggered_condition.size() && triggered_condition[k] >= '0' && triggered_condition[k] <= '9') {
        n = n * 10 + (triggered_condition[k++] - '0');
        ++digits;
    }
    if (digits > 0 && n >= 1 && n <= 17) return n;
    for (const auto& r : kHarRules)
        if (triggered_condition.find(r.name) != std::string_view::npos) return r.number;
    return std::nullopt;
}

/// Deterministic checklist shortcuts: rule 1 reject, rule 4 accept, then rules
/// 5 and 6 reject for openers that come from the context. nullopt means the
/// model has to decide.
inline std::optional<Verdict> fast_path_verdict(const EvalQuery& query, std::string_view completion,
                                                const FastPathConfig& fp) {
    if (completion.empty()) return std::nullopt;
    auto verdict = [](int rule, bool accept, std::string why) {
        Verdict v;
        v.accept = accept;
        v.triggered_condition = har_rule(rule).label();
        v.reasoning = std::move(why);
        v.fast_path = true;
        return v;
    };
    const std::size_t rep = text::repeated_prefix_tokens(query.context, completion);
    if (rep >= fp.repetition_min_tokens)
        return verdict(1, false, "completion repeats the last " + std::to_string(rep) + " tokens of the context");
    const double overlap = text::early_overlap_ratio(completion, query.reference);
    if (overlap > fp.overlap_threshold)
        return verdict(4, true, "common prefix with the reference covers " + std::to_string(overlap) + " of the completion");
    const auto report = text::check_closure(query.context, completion);
    const std::size_t ctx_len = utf8::length(query.context);
    for (const auto& p : report.unclosed_pairs)
        if (p.position < ctx_len)
            return verdict(5, false, "opener at context position " + std::to_string(p.position) + " is never closed");
    for (const auto& f : report.unclosed_fences)
        if (f.position < ctx_len)
            return verdict(6, false, std::string(text::to_string(f.kind)) + " opened in the context is never closed");
    return std::nullopt;
}

namespace detail {

inline constexpr std::string_view kFormatReminder =
    "Your previous reply could not be parsed. Reply again with only the JSON object described above, wrapped in "
    "\\boxed{}, with every required field present and every score inside its range.";

/// Sends the prompt and parses the reply, re-asking on parse or schema errors.
/// After the last attempt returns a flagged conservative reject.
template <class Parse>
Verdict ask_with_retries(Gateway& gw, const std::string& prompt, const std::string& model, double temperature,
                         int max_parse_retries, JudgeKind kind, Parse parse) {
    std::vector<Message> messages = {{"user", prompt}};
    const RequestParams params{model.empty() ? gw.config().model : model, temperature};
    std::string last_raw;
    std::string last_error;
    for (int attempt = 0; attempt <= max_parse_retries; ++attempt) {
        last_raw = gw.complete(messages, params);
        try {
            Verdict v = parse(last_raw);
            v.judge = kind;
            v.attempts = attempt + 1;
            return v;
        } catch (const ParseError& e) {
            last_error = e.what();
            messages.push_back({"assistant", last_raw});
            messages.push_back({"user", std::string(kFormatReminder)});
        }
    }
    Verdict v;
    v.accept = false;
    v.triggered_condition = "parse_error";
    v.reasoning = last_error;
    v.raw_response = last_raw;
    v.judge = kind;
    v.parse_error = true;
    v.attempts = max_parse_retries + 1;
    return v;
}

}  // namespace detail

/// Checklist verdict for one completion. Transport failures propagate as
/// TransportError; unparseable output ends in a flagged reject.
inline Verdict judge_har(const EvalQuery& query, std::string_view completion, const ChecklistConfig& config,
                         Gateway& gw) {
    if (config.fast_path.enabled)
        if (auto v = fast_path_verdict(query, completion, config.fast_path)) return *v;
    return detail::ask_with_retries(gw, render_har_prompt(query, completion, config), config.judge_model,
                                    config.temperature, config.max_parse_retries, JudgeKind::har,
                                    [](const std::string& raw) { return parse_boxed_verdict(raw); });
}

// ---------------------------------------------------------------------------
// Baseline judges

struct BaselineConfig {
    double style_threshold = 8.0;
    int semantic_threshold = 8;
    std::string judge_model;
    double temperature = 0.0;
    int max_parse_retries = 2;
};

inline std::string_view baseline_template(JudgeKind kind) {
    switch (kind) {
        case JudgeKind::logic: return prompts::logic;
        case JudgeKind::style: return prompts::style;
        case JudgeKind::semantic: return prompts::semantic;
        case JudgeKind::holistic: return prompts::holistic;
        case JudgeKind::har: break;
    }
    throw DomainError("har is not a baseline judge");
}

/// Baseline prompt with {sentence_A} = reference and {sentence_B} = completion.
inline std::string render_baseline_prompt(JudgeKind kind, std::string_view reference, std::string_view completion) {
    return fill_template(baseline_template(kind), {{"{sentence_A}", reference}, {"{sentence_B}", completion}});
}

/// Weighted style score in tenths: round half up of (25 s1 + 25 s2 + 30 s3 + 20 s4) / 10.
/// Integer scores are computed exactly; fractional scores go through long double.
inline long long style_overall_tenths(const std::array<double, 4>& s) {
    bool integral = true;
    for (double x : s) integral = integral && std::floor(x) == x;
    if (integral) {
        const long long w = 25LL * static_cast<long long>(s[0]) + 25LL * static_cast<long long>(s[1]) +
                            30LL * static_cast<long long>(s[2]) + 20LL * static_cast<long long>(s[3]);
        return (w + 5) / 10;
    }
    const long double w = 25.0L * s[0] + 25.0L * s[1] + 30.0L * s[2] + 20.0L * s[3];
    return static_cast<long long>(std::floor(w / 10.0L + 0.5L + 1e-9L));
}

inline double style_overall(const std::array<double, 4>& s) {
    return static_cast<double>(style_overall_tenths(s)) / 10.0;
}

namespace detail {

inline double score_in(const nlohmann::json& j, const char* key, double lo, double hi, std::string_view raw) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing score \"") + key + "\"", std::string(raw));
    const auto& v = j.at(key);
    double d;
    if (v.is_number()) {
        d = v.get<double>();
    } else if (v.is_string()) {
        try {
            d = std::stod(v.get<std::string>());
        } catch (const std::exception&) {
            throw SchemaError(std::string("score \"") + key + "\" is not a number", std::string(raw));
        }
    } else {
        throw SchemaError(std::string("score \"") + key + "\" is not a number", std::string(raw));
    }
    if (!(d >= lo && d <= hi)) throw SchemaError(std::string("score \"") + key + "\" out of range", std::string(raw));
    return d;
}

inline const nlohmann::json& child(const nlohmann::json& j, const char* key, std::string_view raw) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"", std::string(raw));
    return j.at(key);
}

}  // namespace detail

inline Verdict parse_logic_verdict(std::string_view raw) {
    const auto j = extract_json_object(raw);
    Verdict v;
    const auto a = detail::required_int(j, "Preference_logic", 1, 7, raw);
    const auto b = detail::required_int(j, "Prediction_logic", 1, 7, raw);
    const std::string cmp = detail::string_field(j, "logicalCompare");
    if (cmp != "A" && cmp != "B") throw SchemaError("logicalCompare must be \"A\" or \"B\"", std::string(raw));
    v.accept = cmp == "A";
    v.triggered_condition = "logicalCompare=" + cmp;
    v.scores = {{"Preference_logic", static_cast<double>(a)}, {"Prediction_logic", static_cast<double>(b)}};
    v.raw_response = std::string(raw);
    return v;
}

/// Rejects the reply when its reported overall is more than 0.05 away from the
/// recomputed one.
inline Verdict parse_style_verdict(std::string_view raw, double threshold = 8.0) {
    const auto j = extract_json_object(raw);
    const auto& a = detail::child(j, "analysis", raw);
    const std::array<double, 4> s = {
        detail::score_in(detail::child(a, "lexical_style", raw), "score1", 1, 10, raw),
        detail::score_in(detail::child(a, "syntactic_structure", raw), "score2", 1, 10, raw),
        detail::score_in(detail::child(a, "linguistic_features", raw), "score3", 1, 10, raw),
        detail::score_in(detail::child(a, "genre_features", raw), "score4", 1, 10, raw),
    };
    const long long tenths = style_overall_tenths(s);
    const double overall = static_cast<double>(tenths) / 10.0;
    if (j.contains("styleSimilarity_overall")) {
        const double reported = detail::score_in(j, "styleSimilarity_overall", 0, 10, raw);
        if (std::fabs(reported - overall) > 0.05 + 1e-9)
            throw SchemaError("reported styleSimilarity_overall " + std::to_string(reported) +
                                  " disagrees with the weighted scores",
                              std::string(raw));
    }
    Verdict v;
    v.accept = static_cast<double>(tenths) >= threshold * 10.0 - 1e-9;
    v.triggered_condition = "styleSimilarity_overall=" + std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
    v.reasoning = detail::string_field(j, "conclusion");
    v.scores = {{"score1", s[0]}, {"score2", s[1]}, {"score3", s[2]}, {"score4", s[3]}, {"overall", overall}};
    v.raw_response = std::string(raw);
    return v;
}

inline Verdict parse_semantic_verdict(std::string_view raw, int threshold = 8) {
    const auto j = extract_json_object(raw);
    const auto score = detail::required_int(j, "semanticSimilarity_score", 0, 10, raw);
    Verdict v;
    v.accept = score >= threshold;
    v.triggered_condition = "semanticSimilarity_score=" + std::to_string(score);
    v.reasoning = detail::string_field(j, "reason");
    v.scores = {{"semanticSimilarity_score", static_cast<double>(score)}};
    v.raw_response = std::string(raw);
    return v;
}

inline Verdict parse_holistic_verdict(std::string_view raw) {
    const auto j = extract_json_object(raw);
    Verdict v;
    v.accept = detail::required_bool(j, "accept", raw);
    if (j.contains("similarities") && j.at("similarities").is_array()) {
        for (const auto& item : j.at("similarities")) {
            for (const char* key : {"score1", "score2", "score3", "score4"})
                if (item.is_object() && item.contains(key)) v.scores[key] = detail::score_in(item, key, 1, 10, raw);
        }
    }
    v.triggered_condition = v.accept ? "accept" : "reject";
    v.reasoning = detail::string_field(j, "overall_reasoning");
    v.raw_response = std::string(raw);
    return v;
}

inline Verdict parse_baseline_verdict(JudgeKind kind, std::string_view raw, const BaselineConfig& cfg = {}) {
    switch (kind) {
        case JudgeKind::logic: return parse_logic_verdict(raw);
        case JudgeKind::style: return parse_style_verdict(raw, cfg.style_threshold);
        case JudgeKind::semantic: return parse_semantic_verdict(raw, cfg.semantic_threshold);
        case JudgeKind::holistic: return parse_holistic_verdict(raw);
        case JudgeKind::har: break;
    }
    throw DomainError("har is not a baseline judge");
}

inline Verdict judge_baseline(JudgeKind kind, const EvalQuery& query, std::string_view completion, Gateway& gw,
                              const BaselineConfig& cfg = {}) {
    return detail::ask_with_retries(gw, render_baseline_prompt(kind, query.reference, completion), cfg.judge_model,
                                    cfg.temperature, cfg.max_parse_retries, kind,
                                    [&](const std::string& raw) { return parse_baseline_verdict(kind, raw, cfg); });
}

}  // namespace cowrite
