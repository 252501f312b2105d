#include "doctest.h"
#include "ost/compliance.hpp"
#include "ost/gen.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"
#include "ost/typecheck.hpp"

using namespace ost;

TEST_CASE("gen_type respects depth and reproducibility") {
  Rng a(123), b(123);
  for (int i = 0; i < 20; ++i) CHECK(equal(gen_type(a, 4), gen_type(b, 4)));

  Rng z(5);
  CHECK(gen_type(z, 0)->kind() == TypeKind::End);
}

TEST_CASE("generated compliant pairs self-check") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    CompliantPair p = gen_compliant_pair(rng, 4);
    CHECK(check_compliance(p.orch, p.client, p.server));
    CHECK(oracle_compliant(p.client, p.server));
  }
}

TEST_CASE("generated processes typecheck to the empty typing") {
  Rng rng(13);
  for (int i = 0; i < 80; ++i) {
    ProcRef p = gen_typed_process(rng, 1 + int(rng.below(2)), 3);
    auto r = typecheck({}, p);
    REQUIRE_MESSAGE(r.ok(), (r.error ? r.error->to_string() : std::string{}), "\n", pretty(p));
    CHECK(r.typing->empty());
  }
}

TEST_CASE("generated processes run to completion under clean-up") {
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    ProcRef p = gen_typed_process(rng, 1 + int(rng.below(2)), 3);
    SeededScheduler sched(rng.next());
    Trace tr = run(p, SemanticsMode::Plain, true, sched, 500);
    CHECK_FALSE(tr.step_limit_hit);
    for (const auto& e : tr.final_errors) {
      CHECK(e.kind != ErrorKind::OrchSynchError);
      CHECK(e.kind != ErrorKind::VacuousOrchError);
      CHECK(e.kind != ErrorKind::ComplianceDependentDeadlock);
    }
  }
}

namespace {

// Sabotaged synthesis: forgets the last arm of every external choice.
OrchRef drop_last_arm(const OrchRef& f) {
  switch (f->kind()) {
    case OrchKind::Idle:
      return f;
    case OrchKind::IOPrefix:
      return Orch::io_prefix(drop_last_arm(f->cont()));
    case OrchKind::LabelPrefix:
      return Orch::label_prefix(f->label(), drop_last_arm(f->cont()));
    case OrchKind::ExternalChoice: {
      std::vector<OrchArm> arms = f->arms();
      arms.pop_back();
      for (auto& a : arms) a.cont = drop_last_arm(a.cont);
      return Orch::external_choice(std::move(arms));
    }
    case OrchKind::InternalChoice: {
      std::vector<OrchArm> arms = f->arms();
      for (auto& a : arms) a.cont = drop_last_arm(a.cont);
      return Orch::internal_choice(std::move(arms));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("the synth checks catch a deliberately broken synthesizer") {
  // a synth that always fails breaks the oracle equivalence
  Rng rng(101);
  bool caught_fail = false;
  bool caught_mutant = false;
  for (int i = 0; i < 200 && !(caught_fail && caught_mutant); ++i) {
    CompliantPair p = gen_compliant_pair(rng, 4);
    if (oracle_compliant(p.client, p.server)) caught_fail = true;  // "fail" disagrees
    SynthResult f = synth(p.client, p.server);
    REQUIRE(f.has_value());
    OrchRef mutant = drop_last_arm(*f);
    if (!equal(mutant, *f) && !check_compliance(mutant, p.client, p.server))
      caught_mutant = true;  // compliance check flags the mutation
  }
  CHECK(caught_fail);
  CHECK(caught_mutant);
}

TEST_CASE("shrinking keeps the failing predicate and terminates") {
  // predicate: contains a speculative selection
  auto has_spec = [](const ProcRef& p) {
    std::function<bool(const ProcRef&)> walk = [&](const ProcRef& q) -> bool {
      switch (q->kind()) {
        case ProcKind::SpecSelectP:
          return true;
        case ProcKind::Par:
          return walk(q->left()) || walk(q->right());
        case ProcKind::If:
          return walk(q->then_branch()) || walk(q->else_branch());
        case ProcKind::Request:
        case ProcKind::Accept:
        case ProcKind::Restrict:
          return walk(q->body());
        case ProcKind::SendValue:
        case ProcKind::RecvValue:
        case ProcKind::Throw:
        case ProcKind::Catch:
        case ProcKind::SelectL:
          return walk(q->cont());
        case ProcKind::BranchL:
          for (const auto& a : q->arms())
            if (walk(a.proc)) return true;
          return false;
        default:
          return false;
      }
    };
    return walk(p);
  };

  Rng rng(19);
  int shrunk_cases = 0;
  for (int i = 0; i < 40 && shrunk_cases < 10; ++i) {
    ProcRef p = gen_typed_process(rng, 2, 4);
    if (!has_spec(p)) continue;
    ++shrunk_cases;
    ProcRef small = shrink_process(p, has_spec);
    CHECK(has_spec(small));
    ProcRef again = shrink_process(small, has_spec);
    CHECK(equal(small, again));  // greedy shrinking reaches a fixpoint
  }
  CHECK(shrunk_cases > 0);
}
