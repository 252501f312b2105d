#ifndef OST_COMPLIANCE_HPP
#define OST_COMPLIANCE_HPP

#include <optional>
#include <stdexcept>

#include "ost/syntax.hpp"

namespace ost {

// Synthesis outcome; empty means fail.
using SynthResult = std::optional<OrchRef>;

enum class SynthMode : uint8_t { Priority, AllSafe };

// Decides f : client -| server, the orchestrated-compliance relation.
// A label prefix doubles as a singleton external and a singleton internal
// choice, so both readings are admitted.
bool check_compliance(const OrchRef& f, const TypeRef& client, const TypeRef& server);

struct DepthExceeded : std::runtime_error {
  DepthExceeded() : std::runtime_error("compliance search depth limit exceeded") {}
};

// Independent decision of client -| server by exhaustive derivation search.
// Does not construct orchestrators and shares nothing with synth.
bool oracle_compliant(const TypeRef& client, const TypeRef& server, int depth_limit = 256);

// Deterministic synthesis; on speculative nodes picks the first (highest
// priority) arm whose continuations are compliant.
SynthResult synth(const TypeRef& client, const TypeRef& server);

// All-safe synthesis; on speculative nodes emits an internal choice over
// every safe arm.
SynthResult synth_ud(const TypeRef& client, const TypeRef& server);

// True iff f contains no internal-choice node.
bool is_deterministic(const OrchRef& f);

}  // namespace ost

#endif
