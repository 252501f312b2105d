#include "ost/suites.hpp"

#include <deque>
#include <set>
#include <stdexcept>

#include "ost/compliance.hpp"
#include "ost/congruence.hpp"
#include "ost/gen.hpp"
#include "ost/parser.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"
#include "ost/typecheck.hpp"

namespace ost {

std::vector<std::string> suite_names() {
  return {"synth", "subject-reduction", "error-freeness", "congruence", "roundtrip"};
}

namespace {

struct Failure {
  std::string what;
};

std::string describe_pair(const TypeRef& c, const TypeRef& s) {
  return "client: " + pretty(c) + "\nserver: " + pretty(s);
}

// --- synth suite -----------------------------------------------------------

void check_synth_case(const TypeRef& c, const TypeRef& s) {
  bool oc = oracle_compliant(c, s);
  SynthResult f1 = synth(c, s);
  SynthResult f2 = synth_ud(c, s);
  if (f1.has_value() != oc)
    throw Failure{"synth disagrees with the derivation oracle\n" + describe_pair(c, s)};
  if (f2.has_value() != oc)
    throw Failure{"synth_ud disagrees with the derivation oracle\n" + describe_pair(c, s)};
  if (f1) {
    if (!check_compliance(*f1, c, s))
      throw Failure{"synth result fails compliance: " + pretty(*f1) + "\n" + describe_pair(c, s)};
    if (!is_deterministic(*f1))
      throw Failure{"synth result not deterministic: " + pretty(*f1)};
  }
  if (f2 && !check_compliance(*f2, c, s))
    throw Failure{"synth_ud result fails compliance: " + pretty(*f2) + "\n" +
                  describe_pair(c, s)};
}

void synth_case(Rng& rng, int max_depth) {
  GenOptions opt;
  int kind = int(rng.below(3));
  if (kind == 0) {
    TypeRef c = gen_type(rng, max_depth, opt);
    TypeRef s = gen_type(rng, max_depth, opt);
    try {
      check_synth_case(c, s);
    } catch (const Failure&) {
      auto shrunk = shrink_type_pair({c, s}, [](const TypeRef& a, const TypeRef& b) {
        try {
          check_synth_case(a, b);
          return false;
        } catch (const Failure&) {
          return true;
        }
      });
      check_synth_case(shrunk.first, shrunk.second);  // rethrows with the small pair
    }
    return;
  }
  CompliantPair pair = gen_compliant_pair(rng, max_depth, opt);
  if (kind == 2 && rng.chance(60)) {
    // mutate: re-generate one side independently
    if (rng.chance(50))
      pair.client = gen_type(rng, max_depth, opt);
    else
      pair.server = gen_type(rng, max_depth, opt);
    check_synth_case(pair.client, pair.server);
    return;
  }
  // constructed pairs must satisfy the whole toolchain
  if (!check_compliance(pair.orch, pair.client, pair.server))
    throw Failure{"generated pair rejects its own orchestrator\n" +
                  describe_pair(pair.client, pair.server) + "\norch: " + pretty(pair.orch)};
  if (!oracle_compliant(pair.client, pair.server))
    throw Failure{"oracle rejects a generated compliant pair\n" +
                  describe_pair(pair.client, pair.server)};
  check_synth_case(pair.client, pair.server);
}

// --- state exploration -------------------------------------------------------

struct Explored {
  std::vector<ProcRef> states;
  bool truncated = false;
};

Explored explore(const ProcRef& p, SemanticsMode mode, bool cleanup, size_t max_steps,
                 size_t branch_cap, size_t state_cap) {
  Explored out;
  const FunctionTable env = FunctionTable::defaults();
  std::set<std::string> seen;
  std::deque<std::pair<ProcRef, size_t>> frontier;
  ProcRef start = canonicalize(p);
  frontier.emplace_back(start, 0);
  seen.insert(structural_key(start));
  out.states.push_back(start);
  while (!frontier.empty()) {
    auto [state, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= max_steps) continue;
    std::vector<Redex> redexes = enumerate_redexes(state, mode, cleanup, env);
    size_t taken = 0;
    for (const auto& r : redexes) {
      if (taken >= branch_cap) break;
      ++taken;
      ProcRef next = apply_redex(state, r, env);
      std::string key = structural_key(next);
      if (seen.insert(key).second) {
        out.states.push_back(next);
        frontier.emplace_back(next, depth + 1);
        if (out.states.size() >= state_cap) {
          out.truncated = true;
          return out;
        }
      }
    }
  }
  return out;
}

ProcRef gen_case_process(Rng& rng, int max_depth) {
  int sessions = 1 + int(rng.below(2));
  return gen_typed_process(rng, sessions, max_depth);
}

// True when some state reachable from p fails to re-typecheck to p's typing.
bool violates_subject_reduction(const ProcRef& p, std::string* why) {
  auto base = typecheck({}, p);
  if (!base.ok()) return false;  // only typed processes are in scope
  for (SemanticsMode mode :
       {SemanticsMode::Plain, SemanticsMode::PriorityType, SemanticsMode::PriorityProcess}) {
    for (bool cleanup : {false, true}) {
      Explored ex = explore(p, mode, cleanup, 200, 4, 600);
      for (const auto& state : ex.states) {
        auto r = typecheck({}, state, mode);
        if (!r.ok()) {
          if (why)
            *why = "reachable state fails to typecheck (" + std::string(to_string(mode)) +
                   (cleanup ? ", cleanup" : "") + "): " + r.error->to_string() +
                   "\nstate: " + pretty(state);
          return true;
        }
        if (!(*r.typing == *base.typing)) {
          if (why)
            *why = "typing not preserved: " + pretty(*r.typing) + "\nstate: " + pretty(state);
          return true;
        }
      }
    }
  }
  return false;
}

void subject_reduction_case(Rng& rng, int max_depth) {
  ProcRef p = gen_case_process(rng, max_depth);
  auto base = typecheck({}, p);
  if (!base.ok())
    throw Failure{"generated process does not typecheck: " + base.error->to_string() + "\n" +
                  pretty(p)};
  if (!base.typing->empty())
    throw Failure{"generated process has a nonempty typing: " + pretty(*base.typing) + "\n" +
                  pretty(p)};
  std::string why;
  if (violates_subject_reduction(p, &why)) {
    ProcRef small = shrink_process(
        p, [](const ProcRef& q) { return violates_subject_reduction(q, nullptr); });
    std::string small_why;
    violates_subject_reduction(small, &small_why);
    throw Failure{(small_why.empty() ? why : small_why) + "\nfrom: " + pretty(small)};
  }
}

bool violates_error_freeness(const ProcRef& p, std::string* why) {
  auto base = typecheck({}, p);
  if (!base.ok()) return false;
  const FunctionTable env = FunctionTable::defaults();
  for (SemanticsMode mode :
       {SemanticsMode::Plain, SemanticsMode::PriorityType, SemanticsMode::PriorityProcess}) {
    for (bool cleanup : {false, true}) {
      Explored ex = explore(p, mode, cleanup, 200, 4, 600);
      for (const auto& state : ex.states) {
        auto errs = classify_errors(state, cleanup, mode, env);
        for (const auto& e : errs) {
          if (e.kind == ErrorKind::OrchSynchError || e.kind == ErrorKind::VacuousOrchError) {
            if (why)
              *why = std::string("typed process reached an error state (") + to_string(e.kind) +
                     " on " + e.channel + ")\nstate: " + pretty(state);
            return true;
          }
          if (cleanup && e.kind == ErrorKind::ComplianceDependentDeadlock) {
            if (why)
              *why = "clean-up left a compliance-dependent deadlock on " + e.channel +
                     "\nstate: " + pretty(state);
            return true;
          }
        }
      }
    }
  }
  return false;
}

void error_freeness_case(Rng& rng, int max_depth) {
  ProcRef p = gen_case_process(rng, max_depth);
  auto base = typecheck({}, p);
  if (!base.ok())
    throw Failure{"generated process does not typecheck: " + base.error->to_string() + "\n" +
                  pretty(p)};
  std::string why;
  if (violates_error_freeness(p, &why)) {
    ProcRef small = shrink_process(
        p, [](const ProcRef& q) { return violates_error_freeness(q, nullptr); });
    std::string small_why;
    violates_error_freeness(small, &small_why);
    throw Failure{(small_why.empty() ? why : small_why) + "\nfrom: " + pretty(small)};
  }
}

// --- congruence suite --------------------------------------------------------

void congruence_case(Rng& rng, int max_depth) {
  ProcRef p = gen_case_process(rng, max_depth);
  // reach a runtime state
  SeededScheduler sched(rng.next());
  Trace tr = run(p, SemanticsMode::Plain, true, sched, 2 + rng.below(10));
  ProcRef state = tr.final_state;
  if (rng.chance(50)) {
    // an enclosing finished session turns sibling clusters into nested
    // restrictions, exercising the scope-commutation clause
    state = canonicalize(
        Proc::restrict("z", Proc::par(Proc::named_orch("z", Orch::idle()), state)));
  }

  ProcRef canon = canonicalize(state);
  if (!equal(canonicalize(canon), canon))
    throw Failure{"canonicalize not idempotent on\n" + pretty(state)};

  ProcRef q = state;
  int steps = 1 + int(rng.below(4));
  for (int i = 0; i < steps; ++i) {
    std::vector<ProcRef> rewrites = congruence_rewrites(q);
    if (rewrites.empty()) break;
    q = rewrites[rng.below(rewrites.size())];
  }
  if (!congruent(state, q))
    throw Failure{"rewritten state not congruent\noriginal: " + pretty(state) +
                  "\nrewritten: " + pretty(q)};
}

// --- roundtrip suite ---------------------------------------------------------

void roundtrip_case(Rng& rng, int max_depth) {
  GenOptions opt;
  opt.prioritized = rng.chance(30);
  TypeRef t = gen_type(rng, max_depth, opt);
  TypeRef t2 = parse_type(pretty(t));
  if (!equal(t, t2))
    throw Failure{"type round-trip failed: " + pretty(t) + " -> " + pretty(t2)};

  OrchRef f = gen_orch(rng, max_depth);
  OrchRef f2 = parse_orch(pretty(f));
  if (!equal(f, f2))
    throw Failure{"orchestrator round-trip failed: " + pretty(f) + " -> " + pretty(f2)};

  ProcRef p = gen_typed_process(rng, 1 + int(rng.below(2)), max_depth);
  ProcRef p2 = parse_process(pretty(p));
  if (!equal(p, p2))
    throw Failure{"process round-trip failed: " + pretty(p) + " -> " + pretty(p2)};
}

}  // namespace

SuiteReport run_suite(const std::string& name, int n, uint64_t seed, int max_depth) {
  SuiteReport rep;
  rep.suite = name;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    ++rep.cases;
    Rng case_rng(rng.next());
    try {
      if (name == "synth") synth_case(case_rng, max_depth);
      else if (name == "subject-reduction") subject_reduction_case(case_rng, max_depth);
      else if (name == "error-freeness") error_freeness_case(case_rng, max_depth);
      else if (name == "congruence") congruence_case(case_rng, max_depth);
      else if (name == "roundtrip") roundtrip_case(case_rng, max_depth);
      else throw std::invalid_argument("unknown suite '" + name + "'");
    } catch (const Failure& f) {
      ++rep.failures;
      if (rep.counterexample.empty())
        rep.counterexample = "case " + std::to_string(i) + ": " + f.what;
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      ++rep.failures;
      if (rep.counterexample.empty())
        rep.counterexample = "case " + std::to_string(i) + ": exception: " + e.what();
    }
  }
  return rep;
}

}  // namespace ost
