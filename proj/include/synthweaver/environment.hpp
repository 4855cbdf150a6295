#pragma once

#include <memory>
#include <optional>
#include <string>

#include "synthweaver/action.hpp"
#include "synthweaver/model.hpp"

namespace synthweaver {

struct TransitionOutcome {
  bool changed = false;               // serialized observation differs before/after
  std::optional<std::string> error;   // navigation or form error surfaced by the page
};

// The partially observable environment a pipeline worker drives. Both the
// site-graph simulator and the WebDriver adapter implement it.
//
// A session is single-owner. Throws ElementNotFound when an action targets an
// id absent from the current observation and SessionTerminal for any action
// after none/stop.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual void reset() = 0;
  virtual Observation observe() = 0;
  virtual TransitionOutcome execute(const Action& action) = 0;
  virtual bool terminal() const = 0;
};

// Opens one fresh session per episode so that workers never share state.
class EnvironmentFactory {
 public:
  virtual ~EnvironmentFactory() = default;
  virtual std::unique_ptr<Environment> open() = 0;
};

}  // namespace synthweaver
