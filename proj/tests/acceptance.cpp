// Acceptance suite: reproduces the worked examples, error cases and
// metatheoretic properties end to end, one verdict line per criterion.

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "ost/compliance.hpp"
#include "ost/congruence.hpp"
#include "ost/gen.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"
#include "ost/suites.hpp"
#include "ost/typecheck.hpp"

using namespace ost;
using ost::testing::deadlock_module;
using ost::testing::movie_env;
using ost::testing::movie_module;

namespace {

int failures = 0;

void criterion(int n, const std::string& what, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = e.what();
  }
  std::printf("%s criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", n, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

bool check(bool cond, std::string& detail, const std::string& msg) {
  if (!cond && detail.empty()) detail = msg;
  return cond;
}

}  // namespace

int main() {
  const Module& movie = movie_module();
  const FunctionTable env = movie_env();

  criterion(1, "running-example compliance (g and h)", [&](std::string& d) {
    bool g_ok = check_compliance(movie.orch_binding("g"), movie.type_binding("ClntSess"),
                                 movie.type_binding("ProvSess"));
    bool h_ok = check_compliance(movie.orch_binding("h"), movie.type_binding("bankCustSess"),
                                 movie.type_binding("BankSess"));
    bool a = check(g_ok, d, "g : ClntSess -| ProvSess failed");
    bool b = check(h_ok, d, "h : bankCustSess -| BankSess failed");
    return a && b;
  });

  criterion(2, "priority synthesis yields the forced orchestrator", [&](std::string& d) {
    TypeRef prio_client = parse_type(
        "!String.+{buy: +{uhd: S, hd: S}, rent: spec<<ld: S, sd: S, hd: S, uhd: S>>}", &movie);
    SynthResult f = synth(prio_client, movie.type_binding("ProvSess"));
    if (!check(f.has_value(), d, "synth failed")) return false;
    OrchRef expected = parse_orch("*.((buy.(uhd.gp + hd.gp)) + rent.ld.gp)", &movie);
    bool a = check(equal_unordered(*f, expected), d, "got " + pretty(*f));
    bool b = check(is_deterministic(*f), d, "result not deterministic");
    return a && b;
  });

  criterion(3, "synth metatheory at scale 1000 (depth 5)", [&](std::string& d) {
    SuiteReport rep = run_suite("synth", 1000, 20240101, 5);
    return check(rep.failures == 0, d,
                 std::to_string(rep.failures) + " failures; first:\n" + rep.counterexample);
  });

  criterion(4, "the running system types to the empty typing", [&](std::string& d) {
    auto r = typecheck({}, movie.proc_binding("System"), SemanticsMode::Plain, env);
    if (!check(r.ok(), d, r.error ? r.error->to_string() : "no typing")) return false;
    return check(r.typing->empty(), d, "typing not empty: " + pretty(*r.typing));
  });

  criterion(5, "all four error terms are rejected and classified", [&](std::string& d) {
    OrchRef lm = Orch::external_choice({{"l", Orch::idle()}, {"m", Orch::idle()}});
    ProcRef e1 = Proc::restrict(
        "k", Proc::par(Proc::named_orch("k", Orch::io_prefix(Orch::idle())),
                       Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                  Expr::lit(Value::nat(1)), Proc::inact()),
                                 Proc::send_value(chan("k", Polarity::Minus),
                                                  Expr::lit(Value::nat(2)), Proc::inact()))));
    ProcRef e2 = Proc::restrict(
        "k",
        Proc::par(Proc::named_orch("k", lm),
                  Proc::par(Proc::select_l(chan("k", Polarity::Plus), "l", Proc::inact()),
                            Proc::branch_l(chan("k", Polarity::Plus), {{"l", Proc::inact()}}))));
    ProcRef e3 = Proc::restrict(
        "k",
        Proc::par(Proc::named_orch("k", lm),
                  Proc::par(Proc::send_value(chan("k", Polarity::Plus), Expr::lit(Value::nat(1)),
                                             Proc::inact()),
                            Proc::recv_value(chan("k", Polarity::Minus), "x", Proc::inact()))));
    ProcRef e4 = Proc::restrict(
        "k", Proc::par(Proc::named_orch("k", Orch::idle()),
                       Proc::par(Proc::send_value(chan("k", Polarity::Minus),
                                                  Expr::lit(Value::nat(1)), Proc::inact()),
                                 Proc::inact())));

    std::vector<std::pair<ProcRef, ErrorKind>> cases{
        {e1, ErrorKind::OrchSynchError},
        {e2, ErrorKind::OrchSynchError},
        {e3, ErrorKind::OrchSynchError},
        {e4, ErrorKind::VacuousOrchError},
    };
    std::set<std::string> diagnostics;
    for (size_t i = 0; i < cases.size(); ++i) {
      auto r = typecheck({}, cases[i].first);
      if (!check(!r.ok(), d, "error term " + std::to_string(i + 1) + " was accepted"))
        return false;
      diagnostics.insert(std::string(to_string(r.error->kind)) + ": " + r.error->detail);
      auto errs = classify_errors(canonicalize(cases[i].first), true);
      bool classified = false;
      for (const auto& e : errs)
        if (e.kind == cases[i].second) classified = true;
      if (!check(classified, d,
                 "error term " + std::to_string(i + 1) + " not classified as " +
                     to_string(cases[i].second)))
        return false;
    }
    return check(diagnostics.size() == 4, d, "diagnostics are not pairwise distinct");
  });

  criterion(6, "the worked reduction trace is reproduced", [&](std::string& d) {
    std::vector<std::string> script{"Link",    "OrchComm", "If",       "OrchSel", "OrchSSel",
                                    "OrchComm", "If",       "OrchSel",  "Link",    "OrchComm",
                                    "OrchDeleg", "OrchSSel", "OrchComm", "OrchComm"};
    ReplayScheduler sched(script);
    Trace tr = run(movie.proc_binding("System"), SemanticsMode::Plain, false, sched, 100, env);
    if (!check(tr.steps.size() == script.size(), d,
               "trace has " + std::to_string(tr.steps.size()) + " steps"))
      return false;
    for (size_t i = 0; i < script.size(); ++i)
      if (!check(tr.steps[i].rule == script[i], d,
                 "step " + std::to_string(i) + " is " + tr.steps[i].rule))
        return false;
    ExprRef pending = Expr::apply(
        "IDtrans",
        {Expr::lit(Value::sym("amount", {Value::str("zootropolis")}, GroundType("Amount"))),
         Expr::lit(Value::sym("cc", {Value::nat(1234)}, GroundType("CcNumber")))});
    ProcRef expected = Proc::restrict(
        "k",
        Proc::par(Proc::named_orch("k", Orch::idle()),
                  Proc::par(Proc::inact(),
                            Proc::par(Proc::inact(),
                                      Proc::restrict(
                                          "kp",
                                          Proc::par(Proc::named_orch("kp", Orch::idle()),
                                                    Proc::send_value(chan("kp", Polarity::Plus),
                                                                     pending, Proc::inact())))))));
    return check(congruent(tr.final_state, expected), d,
                 "final state differs: " + pretty(tr.final_state));
  });

  criterion(7, "deadlock without clean-up, completion with it", [&](std::string& d) {
    ProcRef sys = deadlock_module().proc_binding("System");
    DeterministicScheduler s1;
    Trace stuck = run(sys, SemanticsMode::Plain, false, s1, 100);
    bool dead = false;
    for (const auto& e : stuck.final_errors)
      if (e.kind == ErrorKind::ComplianceDependentDeadlock) dead = true;
    if (!check(dead, d, "no compliance-dependent deadlock without clean-up")) return false;

    DeterministicScheduler s2;
    Trace done = run(sys, SemanticsMode::Plain, true, s2, 100);
    ProcRef expected = Proc::restrict(
        "k", Proc::par(Proc::named_orch("k", Orch::idle()),
                       Proc::restrict("kp", Proc::par(Proc::named_orch("kp", Orch::idle()),
                                                      Proc::par(Proc::inact(), Proc::inact())))));
    bool clean = done.final_errors.size() == 1 &&
                 done.final_errors[0].kind == ErrorKind::NotAnError;
    bool a = check(clean, d, "clean-up run still classified as an error");
    bool b = check(congruent(done.final_state, expected), d,
                   "clean-up final state differs: " + pretty(done.final_state));
    return a && b;
  });

  criterion(8, "subject reduction fuzz at scale 500", [&](std::string& d) {
    SuiteReport rep = run_suite("subject-reduction", 500, 20240102, 3);
    return check(rep.failures == 0, d,
                 std::to_string(rep.failures) + " failures; first:\n" + rep.counterexample);
  });

  criterion(9, "error freeness fuzz at scale 500", [&](std::string& d) {
    SuiteReport rep = run_suite("error-freeness", 500, 20240103, 3);
    return check(rep.failures == 0, d,
                 std::to_string(rep.failures) + " failures; first:\n" + rep.counterexample);
  });

  criterion(10, "congruence and round-trip properties at scale 1000", [&](std::string& d) {
    SuiteReport cong = run_suite("congruence", 1000, 20240104, 3);
    SuiteReport rt = run_suite("roundtrip", 1000, 20240105, 4);
    bool a = check(cong.failures == 0, d,
                   "congruence: " + std::to_string(cong.failures) + " failures; first:\n" +
                       cong.counterexample);
    bool b = check(rt.failures == 0, d,
                   "roundtrip: " + std::to_string(rt.failures) + " failures; first:\n" +
                       rt.counterexample);
    return a && b;
  });

  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
