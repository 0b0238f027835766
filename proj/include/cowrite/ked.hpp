#pragma once

// Knowledge-aware editing cost: the model proposes a costed edit plan that
// turns a completion into the reference; item costs are re-validated and
// summed here, and that sum is the score.

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

namespace cowrite {

enum class EditOperation { ADD, DELETE, MODIFY };
enum class EntityComplexity { simple, complex };

inline const char* to_string(EditOperation op) {
    switch (op) {
        case EditOperation::ADD: return "ADD";
        case EditOperation::DELETE: return "DELETE";
        case EditOperation::MODIFY: return "MODIFY";
    }
    return "MODIFY";
}

struct EntityMention {
    std::string text;
    EntityComplexity complexity = EntityComplexity::simple;

    bool operator==(const EntityMention&) const = default;
};

struct EditAction {
    EditOperation operation = EditOperation::MODIFY;
    std::string instruction;
    long long cost = 0;
    std::string reasoning;
    std::optional<std::vector<EntityMention>> entity_breakdown;
    std::optional<int> phrasing_score;  // 0, 1 or 2

    bool operator==(const EditAction&) const = default;
};

struct EditPlan {
    std::vector<EditAction> actions;
    long long total_editing_cost = 0;  // as reported by the model
    std::string summary;
    long long validated_total = 0;     // sum of action costs
    bool total_mismatch = false;
    bool valid = true;                 // every action with a breakdown agrees with its points
    std::vector<std::string> issues;

    bool operator==(const EditPlan&) const = default;
};

inline std::string render_ked_prompt(std::string_view reference, std::string_view completion) {
    if (reference.empty() || completion.empty()) throw DomainError("render_ked_prompt: empty input");
    return fill_template(prompts::ked, {{"{sentence_A}", reference}, {"{sentence_B}", completion}});
}

inline int entity_points(EditOperation op, EntityComplexity c) {
    if (op == EditOperation::DELETE) return 0;
    return c == EntityComplexity::complex ? 3 : 1;
}

namespace detail {

inline long long non_negative_int(const nlohmann::json& j, const char* key, std::string_view raw) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"", std::string(raw));
    const auto& v = j.at(key);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) return v.get<long long>();
    if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())))
        return static_cast<long long>(v.get<double>());
    throw SchemaError(std::string("field \"") + key + "\" must be a non-negative integer", std::string(raw));
}

inline std::string upper(std::string s) {
    for (auto& c : s)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return s;
}

inline EditAction parse_action(const nlohmann::json& j, std::string_view raw) {
    if (!j.is_object()) throw SchemaError("edit_plan items must be objects", std::string(raw));
    EditAction a;
    const std::string op = j.contains("operation") && j.at("operation").is_string()
                               ? upper(j.at("operation").get<std::string>())
                               : std::string();
    if (op == "ADD") a.operation = EditOperation::ADD;
    else if (op == "DELETE") a.operation = EditOperation::DELETE;
    else if (op == "MODIFY") a.operation = EditOperation::MODIFY;
    else throw SchemaError("operation must be ADD, DELETE or MODIFY", std::string(raw));
    a.cost = non_negative_int(j, "cost", raw);
    a.instruction = j.value("instruction", "");
    a.reasoning = j.value("reasoning", "");
    if (j.contains("entity_breakdown") && !j.at("entity_breakdown").is_null()) {
        std::vector<EntityMention> ents;
        for (const auto& e : j.at("entity_breakdown")) {
            EntityMention m;
            m.text = e.is_object() ? e.value("entity", e.value("text", "")) : std::string();
            const std::string c = e.is_object() ? upper(e.value("complexity", "")) : std::string();
            if (c == "SIMPLE") m.complexity = EntityComplexity::simple;
            else if (c == "COMPLEX") m.complexity = EntityComplexity::complex;
            else throw SchemaError("entity complexity must be simple or complex", std::string(raw));
            ents.push_back(std::move(m));
        }
        a.entity_breakdown = std::move(ents);
    }
    if (j.contains("phrasing_score") && !j.at("phrasing_score").is_null()) {
        const auto p = non_negative_int(j, "phrasing_score", raw);
        if (p > 2) throw SchemaError("phrasing_score must be 0, 1 or 2", std::string(raw));
        a.phrasing_score = static_cast<int>(p);
    }
    return a;
}

/// Checks one action against its breakdown; returns a description of the problem.
inline std::optional<std::string> action_issue(const EditAction& a, std::size_t index) {
    if (!a.entity_breakdown) return std::nullopt;
    long long points = 0;
    for (const auto& e : *a.entity_breakdown) points += entity_points(a.operation, e.complexity);
    const long long n = static_cast<long long>(a.entity_breakdown->size());
    const std::string where = "action " + std::to_string(index + 1) + ": ";
    if (a.cost > 3 * n + 2) return where + "cost exceeds 3 per entity plus 2 for phrasing";
    if (a.phrasing_score) {
        if (a.cost != points + *a.phrasing_score)
            return where + "cost " + std::to_string(a.cost) + " differs from entity points plus phrasing score (" +
                   std::to_string(points + *a.phrasing_score) + ")";
    } else if (a.cost < points || a.cost > points + 2) {
        return where + "cost " + std::to_string(a.cost) + " outside entity points plus 0..2";
    }
    return std::nullopt;
}

}  // namespace detail

/// Parses and validates an edit plan. Throws SchemaError when the edit_plan
/// array is missing or an action is malformed; bad arithmetic only marks the
/// plan (total_mismatch, valid).
inline EditPlan parse_edit_plan(std::string_view raw) {
    const auto j = extract_json_object(raw);
    if (!j.contains("edit_plan") || !j.at("edit_plan").is_array())
        throw SchemaError("missing edit_plan array", std::string(raw));
    EditPlan plan;
    for (const auto& item : j.at("edit_plan")) plan.actions.push_back(detail::parse_action(item, raw));
    for (const auto& a : plan.actions) plan.validated_total += a.cost;
    plan.total_editing_cost =
        j.contains("total_editing_cost") ? detail::non_negative_int(j, "total_editing_cost", raw) : plan.validated_total;
    plan.total_mismatch = plan.total_editing_cost != plan.validated_total;
    plan.summary = j.value("summary", "");
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        if (auto issue = detail::action_issue(plan.actions[i], i)) {
            plan.valid = false;
            plan.issues.push_back(*issue);
        }
    }
    return plan;
}

struct KedConfig {
    std::string model;  // empty uses the gateway's model
    double temperature = 0.0;
    int max_parse_retries = 2;
};

struct KedResult {
    std::optional<long long> cost;  // empty after parse exhaustion
    EditPlan plan;
    bool parse_error = false;
    int attempts = 0;
    std::string raw_response;
};

/// Editing cost of turning `completion` into the query's reference. The cost is
/// always the validated item sum.
inline KedResult evaluate_ked(const EvalQuery& query, std::string_view completion, Gateway& gw,
                              const KedConfig& cfg = {}) {
    std::vector<Message> messages = {{"user", render_ked_prompt(query.reference, completion)}};
    const RequestParams params{cfg.model.empty() ? gw.config().model : cfg.model, cfg.temperature};
    KedResult out;
    for (int attempt = 0; attempt <= cfg.max_parse_retries; ++attempt) {
        out.raw_response = gw.complete(messages, params);
        out.attempts = attempt + 1;
        try {
            out.plan = parse_edit_plan(out.raw_response);
            out.cost = out.plan.validated_total;
            return out;
        } catch (const ParseError&) {
            messages.push_back({"assistant", out.raw_response});
            messages.push_back({"user",
                                "Your previous reply could not be parsed. Reply again with only the JSON object "
                                "containing \"edit_plan\", \"total_editing_cost\" and \"summary\", wrapped in "
                                "\\boxed{}; every cost must be a non-negative integer."});
        }
    }
    out.parse_error = true;
    return out;
}

inline nlohmann::json to_json(const EditPlan& p) {
    auto actions = nlohmann::json::array();
    for (const auto& a : p.actions) {
        nlohmann::json j = {{"operation", to_string(a.operation)},
                            {"instruction", a.instruction},
                            {"cost", a.cost},
                            {"reasoning", a.reasoning}};
        if (a.entity_breakdown) {
            auto ents = nlohmann::json::array();
            for (const auto& e : *a.entity_breakdown)
                ents.push_back({{"entity", e.text},
                                {"complexity", e.complexity == EntityComplexity::complex ? "complex" : "simple"}});
            j["entity_breakdown"] = ents;
        }
        if (a.phrasing_score) j["phrasing_score"] = *a.phrasing_score;
        actions.push_back(std::move(j));
    }
    return {{"edit_plan", actions},     {"total_editing_cost", p.total_editing_cost},
            {"summary", p.summary},     {"validated_total", p.validated_total},
            {"total_mismatch", p.total_mismatch}, {"valid", p.valid},
            {"issues", p.issues}};
}

}  // namespace cowrite
