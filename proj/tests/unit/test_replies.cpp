#include <gtest/gtest.h>

#include "synthweaver/errors.hpp"
#include "synthweaver/replies.hpp"
#include "test_support.hpp"

namespace synthweaver {
namespace {

using nlohmann::json;

json refine_reply(const std::string& decision, std::vector<int> order, const std::string& none_value = "done",
                  const std::string& drop_reason = "") {
  return {{"task", "t"},           {"score", 50},           {"decision", decision},
          {"order", order},        {"modify_end", false},   {"append_end", false},
          {"final_none_value", none_value}, {"drop_reason", drop_reason}};
}

json next_action(const std::string& type, const json& element_id, const json& value) {
  json action = {{"type", type}, {"element_id", element_id}, {"value", value}};
  return {{"next_action", {{"action", action}, {"low-level_instruction", "do it"}}}};
}

TEST(Replies, Categorization) {
  const json j = {{"Analysis", "a"},
                  {"Categorization",
                   {{"Navigation", {{{"action", "CLICK"}, {"element_id", 3}, {"low-level_instruction", "open"}}}},
                    {"Search", {{{"action", "type"}, {"element_id", "1"}, {"value", "mouse"}}}},
                    {"Uninteractive", {7, 8}}}}};
  const auto r = parse_categorization(j, {std::set<std::int64_t>{1, 3, 7, 8}, std::nullopt});
  ASSERT_EQ(r.categories.size(), 2u);
  EXPECT_EQ(r.categories.at("Navigation")[0].element_id, 3);
  EXPECT_EQ(r.categories.at("Search")[0].value, "mouse");
  EXPECT_EQ(r.uninteractive, (std::vector<std::int64_t>{7, 8}));

  EXPECT_THROW(parse_categorization(j, {std::set<std::int64_t>{1, 3}, std::nullopt}), SchemaViolation);
  json dup = j;
  dup["Categorization"]["Uninteractive"] = {3};
  EXPECT_THROW(parse_categorization(dup), SchemaViolation);
  json scroll = j;
  scroll["Categorization"]["Navigation"][0]["action"] = "scroll";
  EXPECT_THROW(parse_categorization(scroll), SchemaViolation);
  EXPECT_THROW(parse_categorization(json::array()), SchemaViolation);
}

TEST(Replies, TaskProposal) {
  const auto r = parse_task_proposal({{"Sub-Instruction", "s"},
                                      {"Analysis", "a"},
                                      {"High-Level-Instruction", "  Find the cheapest mouse. "},
                                      {"Task-Type", "Information Seeking"}});
  EXPECT_EQ(r.high_level_instruction, "Find the cheapest mouse.");
  EXPECT_EQ(r.task_type, TaskType::InformationSeeking);
  EXPECT_FALSE(parse_task_proposal({{"High-Level-Instruction", "x"}}).task_type);
  EXPECT_THROW(parse_task_proposal({{"High-Level-Instruction", "  "}}), SchemaViolation);
  EXPECT_THROW(parse_task_proposal({{"High-Level-Instruction", "x"}, {"Task-Type", "gardening"}}), SchemaViolation);
}

TEST(Replies, NextAction) {
  auto r = parse_next_action(next_action("click", "4", ""));
  EXPECT_EQ(r.action.kind, ActionKind::Click);
  EXPECT_EQ(r.action.element_id, 4);

  r = parse_next_action(next_action("scroll", nullptr, "DOWN"));
  EXPECT_EQ(r.action.value, "down");
  r = parse_next_action(next_action("go-back", nullptr, ""));
  EXPECT_EQ(r.action.kind, ActionKind::GoBack);

  EXPECT_THROW(parse_next_action(next_action("click", nullptr, "")), SchemaViolation);
  EXPECT_THROW(parse_next_action(next_action("type", "2", "")), SchemaViolation);
  EXPECT_THROW(parse_next_action(next_action("jump", "2", "")), SchemaViolation);
  EXPECT_THROW(parse_next_action(next_action("click", "x1", "")), SchemaViolation);
  EXPECT_THROW(parse_next_action(next_action("type", "2", "a]b")), SchemaViolation);
  EXPECT_THROW(parse_next_action({{"next_action", "click"}}), SchemaViolation);
}

TEST(Replies, RefineTaskConsistency) {
  EXPECT_FALSE(parse_refine_task({{"Need-to-Refine", "No"}, {"High-Level-Task", ""}}).need_to_refine);
  const auto yes = parse_refine_task({{"Need-to-Refine", "yes"}, {"High-Level-Task", "Buy it"}});
  EXPECT_TRUE(yes.need_to_refine);
  EXPECT_EQ(yes.high_level_task, "Buy it");
  EXPECT_THROW(parse_refine_task({{"Need-to-Refine", "yes"}, {"High-Level-Task", ""}}), SchemaViolation);
  EXPECT_THROW(parse_refine_task({{"Need-to-Refine", "no"}, {"High-Level-Task", "x"}}), SchemaViolation);
  EXPECT_THROW(parse_refine_task({{"Need-to-Refine", "maybe"}, {"High-Level-Task", ""}}), SchemaViolation);
}

TEST(Replies, RefineTrajectoryInvariants) {
  EXPECT_EQ(parse_refine_trajectory(refine_reply("keep", {0, 1, 2}), 3).decision, RefineDecision::Keep);
  EXPECT_EQ(parse_refine_trajectory(refine_reply("refine", {2, 0}), 3).order, (std::vector<int>{2, 0}));
  EXPECT_EQ(parse_refine_trajectory(refine_reply("drop", {}, "", "useless"), 3).drop_reason, "useless");

  EXPECT_THROW(parse_refine_trajectory(refine_reply("refine", {0, 0}), 3), SchemaViolation);
  EXPECT_THROW(parse_refine_trajectory(refine_reply("refine", {3}), 3), SchemaViolation);
  EXPECT_THROW(parse_refine_trajectory(refine_reply("refine", {0}, ""), 3), SchemaViolation);
  EXPECT_THROW(parse_refine_trajectory(refine_reply("keep", {0, 2, 1}), 3), SchemaViolation);
  EXPECT_THROW(parse_refine_trajectory(refine_reply("drop", {0}, "", "x"), 3), SchemaViolation);
  EXPECT_THROW(parse_refine_trajectory(refine_reply("drop", {}, "", ""), 3), SchemaViolation);
  EXPECT_THROW(parse_refine_trajectory(refine_reply("shrug", {0}), 3), SchemaViolation);
  json bad_score = refine_reply("keep", {0});
  bad_score["score"] = 101;
  EXPECT_THROW(parse_refine_trajectory(bad_score, 1), SchemaViolation);
  json float_order = refine_reply("refine", {0});
  float_order["order"] = {0.5};
  EXPECT_THROW(parse_refine_trajectory(float_order, 1), SchemaViolation);
}

TEST(Replies, Diversity) {
  json j = {{"score", 70},
            {"subscores",
             {{"intent_variety", 18}, {"action_diversity", 17}, {"goal_coverage", 20}, {"redundancy_minimization", 15}}},
            {"analysis", "ok"},
            {"representative_examples", {"a", "b"}}};
  const auto r = parse_diversity(j);
  EXPECT_EQ(r.score, 70);
  EXPECT_EQ(r.representative_examples.size(), 2u);

  json mismatch = j;
  mismatch["score"] = 71;
  EXPECT_THROW(parse_diversity(mismatch), SchemaViolation);
  json over = j;
  over["subscores"]["goal_coverage"] = 26;
  over["score"] = 76;
  EXPECT_THROW(parse_diversity(over), SchemaViolation);
  json missing = j;
  missing["subscores"].erase("goal_coverage");
  EXPECT_THROW(parse_diversity(missing), SchemaViolation);
}

TEST(Replies, Quality) {
  EXPECT_EQ(parse_quality({{"score", 0}}).score, 0);
  EXPECT_THROW(parse_quality({{"score", -1}}), SchemaViolation);
  EXPECT_THROW(parse_quality({{"score", "80"}}), SchemaViolation);
}

TEST(Replies, RefineViolationMatchesParserOnRandomReplies) {
  Rng rng(11);
  const char* decisions[] = {"keep", "refine", "drop"};
  for (int i = 0; i < 2000; ++i) {
    const std::size_t k = 1 + rng.below(6);
    std::vector<int> order;
    const std::size_t n = rng.below(k + 2);
    for (std::size_t m = 0; m < n; ++m) order.push_back(static_cast<int>(rng.below(k + 1)));
    const json j = refine_reply(decisions[rng.below(3)], order, rng.below(4) ? "v" : "", rng.below(2) ? "r" : "");
    // Independent check of the documented invariants.
    std::set<int> uniq(order.begin(), order.end());
    bool ok = uniq.size() == order.size() && std::all_of(order.begin(), order.end(), [&](int x) {
                return x < static_cast<int>(k);
              });
    const std::string d = j["decision"];
    if (d == "keep") {
      bool identity = order.size() == k;
      for (std::size_t m = 0; identity && m < k; ++m) identity = order[m] == static_cast<int>(m);
      ok = ok && identity && j["final_none_value"] != "";
    } else if (d == "refine") {
      ok = ok && j["final_none_value"] != "";
    } else {
      ok = ok && order.empty() && j["drop_reason"] != "";
    }
    if (ok) {
      EXPECT_NO_THROW(parse_refine_trajectory(j, k)) << j.dump();
    } else {
      EXPECT_THROW(parse_refine_trajectory(j, k), SchemaViolation) << j.dump();
    }
  }
}

}  // namespace
}  // namespace synthweaver
