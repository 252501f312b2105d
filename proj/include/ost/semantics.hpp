#ifndef OST_SEMANTICS_HPP
#define OST_SEMANTICS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ost/process.hpp"

namespace ost {

// One applicable rule instance. Participants are identified structurally and
// re-located by apply_redex.
struct Redex {
  std::string rule;     // Link, OrchComm, OrchDeleg, OrchSel, OrchSSel, ...
  std::string channel;  // restriction channel; empty for link and conditionals
  std::string label;    // chosen label, when the rule picks one
  ProcRef item_a;       // first participant (or the only one)
  ProcRef item_b;       // second participant, when the rule has two
  OrchRef link_orch;    // orchestrator installed by a link step

  std::string key() const;
};

struct StaleRedex : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceStep {
  std::string rule;
  std::string channel;
  std::string label;
  ProcRef before;
  ProcRef after;
};

enum class ErrorKind : uint8_t {
  OrchSynchError,
  VacuousOrchError,
  ComplianceDependentDeadlock,
  NotAnError,
};

const char* to_string(ErrorKind k);

struct ErrorClassification {
  ErrorKind kind;
  std::string channel;  // empty for NotAnError
};

struct Trace {
  std::vector<TraceStep> steps;
  ProcRef final_state;
  bool step_limit_hit = false;
  std::vector<ErrorClassification> final_errors;
  SemanticsMode mode = SemanticsMode::Plain;
  bool cleanup = true;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  // Chooses one redex, or nullptr to stop the run.
  virtual const Redex* pick(const std::vector<Redex>& redexes, size_t step) = 0;
};

class DeterministicScheduler : public Scheduler {
 public:
  const Redex* pick(const std::vector<Redex>& redexes, size_t step) override;
};

class SeededScheduler : public Scheduler {
 public:
  explicit SeededScheduler(uint64_t seed) : state_(seed) {}
  const Redex* pick(const std::vector<Redex>& redexes, size_t step) override;

 private:
  uint64_t state_;
};

// Replays a recorded list of rule names (optionally "Rule:label"); stops when
// the script is exhausted or no redex matches the next entry.
class ReplayScheduler : public Scheduler {
 public:
  explicit ReplayScheduler(std::vector<std::string> script) : script_(std::move(script)) {}
  const Redex* pick(const std::vector<Redex>& redexes, size_t step) override;

 private:
  std::vector<std::string> script_;
  size_t idx_ = 0;
};

// All rule instances applicable to a canonical state, in deterministic order.
std::vector<Redex> enumerate_redexes(const ProcRef& canonical, SemanticsMode mode, bool cleanup,
                                     const FunctionTable& env = FunctionTable::defaults());

// Applies one redex and recanonicalizes. Throws StaleRedex when the redex no
// longer matches the state.
ProcRef apply_redex(const ProcRef& canonical, const Redex& r,
                    const FunctionTable& env = FunctionTable::defaults());

Trace run(const ProcRef& p, SemanticsMode mode, bool cleanup, Scheduler& sched,
          size_t step_limit = 10000, const FunctionTable& env = FunctionTable::defaults());

// Error classes of a canonical state, relative to the active rule set.
std::vector<ErrorClassification> classify_errors(
    const ProcRef& canonical, bool cleanup, SemanticsMode mode = SemanticsMode::Plain,
    const FunctionTable& env = FunctionTable::defaults());

}  // namespace ost

#endif
