#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "synthweaver/environment.hpp"
#include "synthweaver/site_graph.hpp"

namespace synthweaver {

// Mutable part of a simulated browsing session.
struct EnvSession {
  std::string current_page;
  std::map<std::string, std::string> state;
  std::vector<std::string> history_stack;  // back stack, current page last
  std::vector<std::string> forward_stack;
  bool scrolled = false;                   // below-fold content revealed
  bool terminal = false;
  int step_counter = 0;
};

// Deterministic site-graph environment. Identical graph plus identical action
// sequence always yields identical observations.
class SimulatedSite final : public Environment {
 public:
  explicit SimulatedSite(std::shared_ptr<const SiteGraph> graph);  // validates; throws InvalidGraph

  void reset() override;
  Observation observe() override;
  TransitionOutcome execute(const Action& action) override;
  bool terminal() const override { return session_.terminal; }

  const EnvSession& session() const { return session_; }
  const SiteGraph& graph() const { return *graph_; }

 private:
  const PageSpec& page() const;
  void navigate(const std::string& page_id);
  std::string substitute(const std::string& text) const;

  std::shared_ptr<const SiteGraph> graph_;
  EnvSession session_;
};

class SimulatedSiteFactory final : public EnvironmentFactory {
 public:
  explicit SimulatedSiteFactory(std::shared_ptr<const SiteGraph> graph) : graph_(std::move(graph)) {}
  std::unique_ptr<Environment> open() override { return std::make_unique<SimulatedSite>(graph_); }

 private:
  std::shared_ptr<const SiteGraph> graph_;
};

}  // namespace synthweaver
