#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cowrite/ked.hpp"
#include "test_support.hpp"

namespace cowrite {
namespace {

using namespace testing_support;

TEST(RenderKed, GoldenAfterSubstitution) {
    const std::string ref = "The protein is eluted from the polyacrylamide gel.";
    const std::string comp = "The protein is transferred from the gel.";
    const auto out = render_ked_prompt(ref, comp);
    std::string expected = replace_all(replace_all(golden("ked"), "{sentence_A}", ref), "{sentence_B}", comp);
    EXPECT_EQ(out, expected);
    EXPECT_EQ(sha256_hex(out), sha256_hex(expected));
    EXPECT_NE(out.find("Cost Assessment Rules of Action"), std::string::npos);
    EXPECT_NE(out.find("The protein is eluted"), std::string::npos);
    EXPECT_THROW(render_ked_prompt("", comp), DomainError);
}

TEST(ParseEditPlan, WorkedExample) {
    auto plan = parse_edit_plan(ked_example_output());
    ASSERT_EQ(plan.actions.size(), 3u);
    EXPECT_EQ(plan.actions[0].cost, 1);
    EXPECT_EQ(plan.actions[1].cost, 3);
    EXPECT_EQ(plan.actions[2].cost, 2);
    EXPECT_EQ(plan.validated_total, 6);
    EXPECT_EQ(plan.total_editing_cost, 6);
    EXPECT_FALSE(plan.total_mismatch);
    EXPECT_TRUE(plan.valid);
    for (const auto& a : plan.actions) EXPECT_EQ(a.operation, EditOperation::MODIFY);
}

TEST(ParseEditPlan, ReportedTotalMismatch) {
    auto plan = parse_edit_plan(R"(\boxed{"edit_plan": [
        {"operation": "ADD", "instruction": "a", "cost": 1, "reasoning": ""},
        {"operation": "MODIFY", "instruction": "b", "cost": 3, "reasoning": ""},
        {"operation": "DELETE", "instruction": "c", "cost": 2, "reasoning": ""}],
        "total_editing_cost": 7, "summary": "s"})");
    EXPECT_TRUE(plan.total_mismatch);
    EXPECT_EQ(plan.validated_total, 6);
    EXPECT_EQ(plan.total_editing_cost, 7);
}

TEST(ParseEditPlan, EmptyPlan) {
    auto plan = parse_edit_plan(R"(\boxed{{"edit_plan": [], "total_editing_cost": 0, "summary": "identical"}})");
    EXPECT_TRUE(plan.actions.empty());
    EXPECT_EQ(plan.validated_total, 0);
    EXPECT_FALSE(plan.total_mismatch);
}

TEST(ParseEditPlan, SchemaErrors) {
    EXPECT_THROW(parse_edit_plan(R"(\boxed{"total_editing_cost": 0})"), SchemaError);
    EXPECT_THROW(parse_edit_plan(R"(\boxed{"edit_plan": [{"operation": "ADD", "cost": 1.5}]})"), SchemaError);
    EXPECT_THROW(parse_edit_plan(R"(\boxed{"edit_plan": [{"operation": "ADD", "cost": -1}]})"), SchemaError);
    EXPECT_THROW(parse_edit_plan(R"(\boxed{"edit_plan": [{"operation": "ADD", "cost": "two"}]})"), SchemaError);
    EXPECT_THROW(parse_edit_plan(R"(\boxed{"edit_plan": [{"operation": "SWAP", "cost": 1}]})"), SchemaError);
    EXPECT_THROW(parse_edit_plan("no plan"), ParseError);
}

std::string plan_with(const std::string& op, const std::string& ents, int cost, std::optional<int> phrasing) {
    std::string a = R"({"operation": ")" + op + R"(", "instruction": "i", "cost": )" + std::to_string(cost) +
                    R"(, "entity_breakdown": [)" + ents + "]";
    if (phrasing) a += R"(, "phrasing_score": )" + std::to_string(*phrasing);
    a += "}";
    return R"(\boxed{"edit_plan": [)" + a + R"(], "total_editing_cost": )" + std::to_string(cost) + "}";
}

TEST(ParseEditPlan, BreakdownValidation) {
    const std::string complex = R"({"entity": "polyacrylamide gel", "complexity": "complex"})";
    const std::string simple = R"({"entity": "protein", "complexity": "SIMPLE"})";
    EXPECT_TRUE(parse_edit_plan(plan_with("MODIFY", complex, 3, 0)).valid);
    EXPECT_TRUE(parse_edit_plan(plan_with("MODIFY", complex + "," + simple, 6, 2)).valid);
    EXPECT_FALSE(parse_edit_plan(plan_with("MODIFY", complex, 4, 0)).valid);
    // Above 3 per entity plus 2 for phrasing.
    auto over = parse_edit_plan(plan_with("ADD", simple, 6, std::nullopt));
    EXPECT_FALSE(over.valid);
    EXPECT_EQ(over.validated_total, 6);
    // DELETE carries no entity points.
    EXPECT_TRUE(parse_edit_plan(plan_with("DELETE", complex, 1, 1)).valid);
    EXPECT_FALSE(parse_edit_plan(plan_with("DELETE", complex, 4, 1)).valid);
    EXPECT_THROW(parse_edit_plan(plan_with("ADD", simple, 1, 3)), SchemaError);
}

TEST(ParseEditPlan, TotalInvariantToActionOrder) {
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> cost(0, 8);
    for (int t = 0; t < 100; ++t) {
        nlohmann::json items = nlohmann::json::array();
        long long sum = 0;
        for (int i = 0; i < 5; ++i) {
            int c = cost(rng);
            sum += c;
            items.push_back({{"operation", "MODIFY"}, {"instruction", std::to_string(i)}, {"cost", c}});
        }
        auto a = parse_edit_plan(nlohmann::json{{"edit_plan", items}}.dump());
        std::shuffle(items.begin(), items.end(), rng);
        auto b = parse_edit_plan(nlohmann::json{{"edit_plan", items}}.dump());
        EXPECT_EQ(a.validated_total, sum);
        EXPECT_EQ(b.validated_total, sum);
    }
}

class KedWithMock : public ::testing::Test {
  protected:
    std::shared_ptr<MockBackend> mock = std::make_shared<MockBackend>(true);
    Gateway gw{offline_config(), mock};
    EvalQuery q = query("Proteins were separated by SDS-PAGE.",
                        "The protein is eluted from the polyacrylamide gel and immobilized on the membrane surface.");
};

TEST_F(KedWithMock, WorkedExampleCostsSix) {
    mock->register_substring("Cost Assessment Rules of Action", ked_example_output());
    auto r = evaluate_ked(q, "The protein is transferred from the gel to the membrane.", gw);
    ASSERT_TRUE(r.cost.has_value());
    EXPECT_EQ(*r.cost, 6);
    EXPECT_FALSE(r.parse_error);
}

TEST_F(KedWithMock, EmptyPlanCostsZero) {
    mock->register_substring("Cost Assessment Rules of Action", R"(\boxed{"edit_plan": [], "total_editing_cost": 0})");
    EXPECT_EQ(evaluate_ked(q, q.reference, gw).cost, 0);
}

TEST_F(KedWithMock, ItemSumWinsOverReportedTotal) {
    mock->register_substring("Cost Assessment Rules of Action",
                             R"(\boxed{"edit_plan": [{"operation": "ADD", "cost": 2}, {"operation": "ADD", "cost": 2}],
                                 "total_editing_cost": 9})");
    auto r = evaluate_ked(q, "x", gw);
    EXPECT_EQ(r.cost, 4);
    EXPECT_TRUE(r.plan.total_mismatch);
}

TEST_F(KedWithMock, ParseExhaustionGivesFlaggedSentinel) {
    mock->register_substring("Cost Assessment Rules of Action", "I cannot do that.");
    auto r = evaluate_ked(q, "x", gw);
    EXPECT_FALSE(r.cost.has_value());
    EXPECT_TRUE(r.parse_error);
    EXPECT_EQ(r.attempts, 3);
}

TEST_F(KedWithMock, TransportErrorIsDistinct) {
    mock->register_substring("Cost Assessment Rules of Action", std::vector<MockReply>{MockReply::failure()});
    EXPECT_THROW(evaluate_ked(q, "x", gw), TransportError);
}

}  // namespace
}  // namespace cowrite
