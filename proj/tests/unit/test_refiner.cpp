#include <gtest/gtest.h>

#include <algorithm>

#include "synthweaver/errors.hpp"
#include "synthweaver/refiner.hpp"
#include "synthweaver/serde.hpp"
#include "test_support.hpp"

namespace synthweaver {
namespace {

using nlohmann::json;

RefineTrajectoryReply refine_with(std::vector<int> order, std::string value = "answer") {
  RefineTrajectoryReply r;
  r.decision = RefineDecision::Refine;
  r.order = std::move(order);
  r.final_none_value = std::move(value);
  return r;
}

TEST(Summarize, ListsEveryStep) {
  Rng rng(1);
  const auto t = testing::random_completed_trajectory(rng, 4);
  const auto s = summarize_trajectory(t);
  EXPECT_TRUE(s.starts_with("Length of trajectory: 4\n"));
  for (int i = 0; i < 4; ++i) EXPECT_NE(s.find("Step " + std::to_string(i) + ":"), std::string::npos);
  EXPECT_NE(s.find(render_action(t.steps.back().action)), std::string::npos);
}

TEST(ApplyEdits, KeepAndDrop) {
  Rng rng(2);
  const auto t = testing::random_completed_trajectory(rng, 3);
  RefineTrajectoryReply keep;
  keep.order = {0, 1, 2};
  keep.final_none_value = "x";
  EXPECT_EQ(apply_edits(t, keep), t);
  RefineTrajectoryReply drop;
  drop.decision = RefineDecision::Drop;
  drop.drop_reason = "r";
  EXPECT_FALSE(apply_edits(t, drop));

  auto stopped = t;
  stopped.steps.back().action = Action::stop("gave up");
  stopped.terminal = TerminalClass::StoppedByAgent;
  EXPECT_THROW(apply_edits(stopped, keep), EditContractViolation);
}

TEST(ApplyEdits, ContractViolations) {
  Rng rng(3);
  const auto t = testing::random_completed_trajectory(rng, 4);
  EXPECT_THROW(apply_edits(t, refine_with({0, 0})), EditContractViolation);
  EXPECT_THROW(apply_edits(t, refine_with({4})), EditContractViolation);
  EXPECT_THROW(apply_edits(t, refine_with({})), EditContractViolation);
  auto both = refine_with({0});
  both.modify_end = both.append_end = true;
  EXPECT_THROW(apply_edits(t, both), EditContractViolation);
  // Dropping the final none without replacing it leaves no answer.
  EXPECT_THROW(apply_edits(t, refine_with({0, 1})), EditContractViolation);
  auto none_in_middle = refine_with({0, 3, 1});
  none_in_middle.modify_end = true;
  EXPECT_THROW(apply_edits(t, none_in_middle), EditContractViolation);
  auto append_after_none = refine_with({0, 3});
  append_after_none.append_end = true;
  EXPECT_THROW(apply_edits(t, append_after_none), EditContractViolation);
  auto bad_value = refine_with({0});
  bad_value.modify_end = true;
  bad_value.final_none_value = "a]b";
  EXPECT_THROW(apply_edits(t, bad_value), EditContractViolation);
}

// Reference edit: the documented semantics written out directly.
std::vector<Step> expected_steps(const Trajectory& t, const RefineTrajectoryReply& r) {
  std::vector<Step> out;
  for (int idx : r.order) out.push_back(t.steps[static_cast<std::size_t>(idx)]);
  if (r.modify_end) out.back().action = Action::none(r.final_none_value);
  if (r.append_end) {
    Step s;
    s.observation = out.back().observation;
    s.action = Action::none(r.final_none_value);
    s.task_snapshot = t.task.text;
    out.push_back(s);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
  return out;
}

TEST(ApplyEdits, FidelityOnRandomEdits) {
  Rng rng(4);
  int applied = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 1 + rng.below(12);
    const auto t = testing::random_completed_trajectory(rng, k);
    std::vector<int> idx(k);
    for (std::size_t m = 0; m < k; ++m) idx[m] = static_cast<int>(m);
    auto order = sample_without_replacement(idx, 1 + rng.below(k), rng);
    if (rng.below(2)) std::sort(order.begin(), order.end());
    auto r = refine_with(order, "v" + std::to_string(i));
    const int mode = static_cast<int>(rng.below(3));
    r.modify_end = mode == 1;
    r.append_end = mode == 2;
    const int last = static_cast<int>(k - 1);
    const auto pos = std::find(order.begin(), order.end(), last) - order.begin();
    const bool has_last = pos < static_cast<std::ptrdiff_t>(order.size());
    const bool last_at_end = has_last && pos + 1 == static_cast<std::ptrdiff_t>(order.size());
    bool valid = false;
    if (mode == 0) valid = last_at_end;
    if (mode == 1) valid = !has_last || last_at_end;
    if (mode == 2) valid = !has_last;
    if (!valid) {
      EXPECT_THROW(apply_edits(t, r), EditContractViolation);
      continue;
    }
    const auto out = apply_edits(t, r);
    ASSERT_TRUE(out);
    EXPECT_EQ(out->steps, expected_steps(t, r));
    EXPECT_EQ(out->terminal, TerminalClass::CompletedNone);
    EXPECT_EQ(out->task, t.task);
    EXPECT_EQ(out->id, t.id);
    EXPECT_EQ(trajectory_violation(*out), "") << i;
    ++applied;
  }
  EXPECT_GT(applied, 500);
}

TEST(ApplyEdits, CutsALoop) {
  Rng rng(5);
  auto t = testing::random_completed_trajectory(rng, 21);
  RefineTrajectoryReply r = refine_with({0, 1, 2, 3, 4, 5, 6, 7, 20});
  const auto out = apply_edits(t, r);
  ASSERT_EQ(out->steps.size(), 9u);
  EXPECT_EQ(out->steps.back().action.kind, ActionKind::None);
  EXPECT_EQ(out->steps.back().observation, t.steps[20].observation);
  EXPECT_EQ(out->steps.back().index, 8);
}

TEST(Refine, ConvertsFailuresToDrops) {
  Rng rng(6);
  const auto t = testing::random_completed_trajectory(rng, 3);

  auto drop_reply = std::make_shared<testing::QueueBackend>(std::vector<std::string>{
      R"({"task": "", "score": 10, "decision": "drop", "order": [], "drop_reason": "loops"})"});
  auto o1 = testing::make_oracle(drop_reply);
  auto r1 = refine(*o1, t);
  EXPECT_FALSE(r1.refined);
  EXPECT_EQ(r1.drop->reason, "loops");
  EXPECT_EQ(r1.drop->trajectory_id, t.id);
  EXPECT_EQ(r1.drop->site, t.site);

  auto garbage = std::make_shared<testing::QueueBackend>(std::vector<std::string>{"no"});
  auto o2 = testing::make_oracle(garbage);
  EXPECT_EQ(refine(*o2, t).drop->reason, "unparseable judge reply");

  auto broken_edit = std::make_shared<testing::QueueBackend>(std::vector<std::string>{
      R"({"task": "", "score": 50, "decision": "refine", "order": [0], "final_none_value": "v"})"});
  auto o3 = testing::make_oracle(broken_edit);
  const auto r3 = refine(*o3, t);
  EXPECT_TRUE(r3.drop);
  EXPECT_NE(r3.drop->reason.find("EditContractViolation"), std::string::npos);

  auto empty = t;
  empty.steps.clear();
  EXPECT_NE(refine(*o1, empty).drop->reason.find("EmptyTrajectory"), std::string::npos);
}

TEST(Refine, PassesLengthAndMetaToOracle) {
  Rng rng(7);
  const auto t = testing::random_completed_trajectory(rng, 5);
  auto backend = std::make_shared<testing::QueueBackend>(std::vector<std::string>{
      R"({"task": "", "score": 90, "decision": "keep", "order": [0,1,2,3,4], "final_none_value": "v"})"});
  auto oracle = testing::make_oracle(backend);
  const auto r = refine(*oracle, t);
  EXPECT_EQ(r.refined, t);
  const auto seen = backend->seen();
  EXPECT_EQ(seen[0].vars.at("_k"), "5");
  EXPECT_EQ(seen[0].vars.at("_terminal"), "completed_none");
  EXPECT_EQ(seen[0].vars.at("_scope"), t.id);
}

TEST(DropRecord, JsonRoundTrip) {
  const DropRecord d{"s-traj-0001", "s", "s-task-0001", "why"};
  const json j = d;
  EXPECT_EQ(j["drop_reason"], "why");
  EXPECT_EQ(j.get<DropRecord>(), d);
}

}  // namespace
}  // namespace synthweaver
