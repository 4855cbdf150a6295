#include <gtest/gtest.h>

#include "synthweaver/action.hpp"
#include "synthweaver/errors.hpp"
#include "synthweaver/model.hpp"
#include "test_support.hpp"

namespace synthweaver {
namespace {

TEST(ActionParse, ClickWithId) {
  const Action a = parse_action("click [12]");
  EXPECT_EQ(a.kind, ActionKind::Click);
  EXPECT_EQ(a.element_id, 12);
  EXPECT_EQ(a.value, "");
}

TEST(ActionParse, NoArgumentKinds) {
  EXPECT_EQ(parse_action("go_back"), Action::go_back());
  EXPECT_EQ(parse_action("go_forward"), Action::go_forward());
  EXPECT_EQ(parse_action("  go_back  "), Action::go_back());
}

TEST(ActionParse, TypeKeepsValueVerbatim) {
  const Action a = parse_action("type [3] [  hello [world  ]");
  EXPECT_EQ(a.kind, ActionKind::Type);
  EXPECT_EQ(a.element_id, 3);
  EXPECT_EQ(a.value, "  hello [world  ");
}

TEST(ActionParse, EveryKindFromTheTable) {
  EXPECT_EQ(parse_action("hover [0]"), Action::hover(0));
  EXPECT_EQ(parse_action("press [Ctrl+V]"), Action::press("Ctrl+V"));
  EXPECT_EQ(parse_action("scroll [down]"), Action::scroll("down"));
  EXPECT_EQ(parse_action("scroll [up]"), Action::scroll("up"));
  EXPECT_EQ(parse_action("goto [https://a.test/x?y=1]"), Action::go_to("https://a.test/x?y=1"));
  EXPECT_EQ(parse_action("none [Cheapest is X]"), Action::none("Cheapest is X"));
  EXPECT_EQ(parse_action("stop [page is broken]"), Action::stop("page is broken"));
}

TEST(ActionParse, RejectsMalformed) {
  const char* bad[] = {"",
                       "tap [1]",
                       "Click [1]",
                       "click",
                       "click []",
                       "click [a]",
                       "click [-1]",
                       "click [+1]",
                       "click [1",
                       "click 1",
                       "click [1] [x]",
                       "type [3] []",
                       "type [3]",
                       "type [x] [hello]",
                       "scroll [left]",
                       "scroll []",
                       "goto []",
                       "none []",
                       "none",
                       "stop",
                       "go_back [1]",
                       "press []",
                       "none [a]b]",
                       "click [99999999999999999999]"};
  for (const char* s : bad) {
    EXPECT_THROW(parse_action(s), MalformedAction) << s;
  }
}

TEST(ActionRender, CanonicalStrings) {
  EXPECT_EQ(render_action(Action::scroll("down")), "scroll [down]");
  EXPECT_EQ(render_action(Action::none("Cheapest is X")), "none [Cheapest is X]");
  EXPECT_EQ(render_action(Action::type(3, "hi")), "type [3] [hi]");
  EXPECT_EQ(render_action(Action::go_back()), "go_back");
}

TEST(ActionRender, InvalidActionsThrow) {
  EXPECT_THROW(render_action(Action{ActionKind::Click, std::nullopt, "", ""}), InvalidAction);
  EXPECT_THROW(render_action(Action{ActionKind::Scroll, 4, "down", ""}), InvalidAction);
  EXPECT_THROW(render_action(Action::none("")), InvalidAction);
  EXPECT_THROW(render_action(Action::stop("a]b")), InvalidAction);
  EXPECT_THROW(render_action(Action{ActionKind::GoBack, std::nullopt, "x", ""}), InvalidAction);
}

TEST(ActionRoundTrip, GeneratedActionsOfEveryKind) {
  Rng rng(7);
  for (ActionKind kind : kAllActionKinds) {
    for (int i = 0; i < 300; ++i) {
      const Action a = testing::random_action(rng, kind);
      ASSERT_EQ(action_violation(a), "");
      const Action back = parse_action(render_action(a));
      ASSERT_TRUE(same_wire(a, back)) << render_action(a);
    }
  }
}

TEST(ActionRoundTrip, LowLevelInstructionIsNotOnTheWire) {
  Action a = Action::click(4);
  a.low_level_instruction = "Click the Search button";
  const Action back = parse_action(render_action(a));
  EXPECT_TRUE(same_wire(a, back));
  EXPECT_EQ(back.low_level_instruction, "");
}

Step step_with(Action a) {
  Step s;
  s.action = std::move(a);
  s.task_snapshot = "t";
  return s;
}

TEST(TerminalClass, PartitionsByLastAction) {
  std::vector<Step> steps = {step_with(Action::click(1)), step_with(Action::none("done"))};
  EXPECT_EQ(classify_terminal(steps, 30), TerminalClass::CompletedNone);
  steps.back() = step_with(Action::stop("stuck"));
  EXPECT_EQ(classify_terminal(steps, 30), TerminalClass::StoppedByAgent);
  steps.back() = step_with(Action::click(2));
  EXPECT_THROW(classify_terminal(steps, 30), InvalidTrajectory);
  EXPECT_EQ(classify_terminal(steps, 2), TerminalClass::BudgetExceeded);
  EXPECT_THROW(classify_terminal({}, 30), InvalidTrajectory);
}

TEST(TerminalClass, ExhaustiveOverShortSequences) {
  // Every sequence of length 1..4 over {click, none, stop}: exactly one class
  // or InvalidTrajectory, decided by the last step and the length alone.
  const Action choices[] = {Action::click(1), Action::none("a"), Action::stop("b")};
  for (int len = 1; len <= 4; ++len) {
    int combos = 1;
    for (int i = 0; i < len; ++i) combos *= 3;
    for (int c = 0; c < combos; ++c) {
      std::vector<Step> steps;
      int code = c;
      for (int i = 0; i < len; ++i) {
        steps.push_back(step_with(choices[code % 3]));
        code /= 3;
      }
      for (int budget = len; budget <= len + 1; ++budget) {
        const ActionKind last = steps.back().action.kind;
        if (last == ActionKind::None) {
          EXPECT_EQ(classify_terminal(steps, budget), TerminalClass::CompletedNone);
        } else if (last == ActionKind::Stop) {
          EXPECT_EQ(classify_terminal(steps, budget), TerminalClass::StoppedByAgent);
        } else if (budget == len) {
          EXPECT_EQ(classify_terminal(steps, budget), TerminalClass::BudgetExceeded);
        } else {
          EXPECT_THROW(classify_terminal(steps, budget), InvalidTrajectory);
        }
      }
    }
  }
}

}  // namespace
}  // namespace synthweaver
