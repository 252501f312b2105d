#include "doctest.h"
#include "helpers.hpp"
#include "ost/gen.hpp"
#include "ost/pretty.hpp"

using namespace ost;
using ost::testing::movie_module;

TEST_CASE("type parsing basics") {
  CHECK(parse_type("end")->kind() == TypeKind::End);
  TypeRef t = parse_type("!Nat.?Bool.end");
  CHECK(t->kind() == TypeKind::OutValue);
  CHECK(t->cont()->kind() == TypeKind::InValue);

  TypeRef d = parse_type("?(!Nat.end+).end");
  CHECK(d->kind() == TypeKind::InSession);
  CHECK(d->carried_polarity() == Polarity::Plus);

  CHECK_THROWS_AS(parse_type("&{a: end, a: end}"), ParseError);
  CHECK_THROWS_AS(parse_type("?Mystery.end"), ParseError);
  CHECK_THROWS_AS(parse_type("&{}"), ParseError);
}

TEST_CASE("the client session type reads back from its let header") {
  const Module& m = movie_module();
  TypeRef client = parse_type("!String.+{buy: +{uhd: S, hd: S}, rent: spec{uhd: S, hd: S, sd: S, ld: S}}", &m);
  CHECK(equal(client, m.type_binding("ClntSess")));
}

TEST_CASE("orchestrator parsing basics") {
  CHECK(parse_orch("1")->kind() == OrchKind::Idle);
  CHECK(parse_orch("*")->kind() == OrchKind::IOPrefix);
  OrchRef f = parse_orch("a.1 + b.*");
  CHECK(f->kind() == OrchKind::ExternalChoice);
  OrchRef g = parse_orch("a (+) b");
  CHECK(g->kind() == OrchKind::InternalChoice);

  CHECK_THROWS_AS(parse_orch("a.1 + a.*"), ParseError);
  CHECK_THROWS_AS(parse_orch("a.1 + b.1 (+) c.1"), ParseError);
}

TEST_CASE("the worked orchestrator parses to the expected tree") {
  const Module& m = movie_module();
  OrchRef f = parse_orch("*.((buy.(uhd.gp + hd.gp)) + (rent.(sd.gp (+) ld.gp)))", &m);
  CHECK(equal(f, m.orch_binding("g")));
}

TEST_CASE("process parsing basics") {
  CHECK(parse_process("0")->kind() == ProcKind::Inact);
  ProcRef p = parse_process("k!<4>.0 | j?(x).0");
  CHECK(p->kind() == ProcKind::Par);

  ProcRef thr = parse_process("k+!<<j->>.0");
  CHECK(thr->kind() == ProcKind::Throw);
  CHECK(thr->channel().pol == Polarity::Plus);
  CHECK(thr->sent().pol == Polarity::Minus);

  ProcRef cat = parse_process("k?((j)).j!<1>.0");
  CHECK(cat->kind() == ProcKind::Catch);

  ProcRef rt = parse_process("(new k)(orch k{*.1} | k+?(x).0 | k-!<2>.0)");
  CHECK(rt->kind() == ProcKind::Restrict);

  CHECK_THROWS_AS(parse_process("k|>{a: 0, a: 0}"), ParseError);
  CHECK_THROWS_AS(parse_process("unknownname"), ParseError);
}

TEST_CASE("the movie module binds the expected processes") {
  const Module& m = movie_module();
  ProcRef sys = m.proc_binding("System");
  CHECK(sys->kind() == ProcKind::Par);
  CHECK(is_user_defined(sys));
  ProcRef client = m.proc_binding("Client");
  CHECK(client->kind() == ProcKind::Request);
  CHECK(equal(client->session_type(), m.type_binding("ClntSess")));
}

TEST_CASE("module bindings reject duplicates and unknown references") {
  CHECK_THROWS_AS(parse_module("let a = end\nlet a = end"), ParseError);
  CHECK_THROWS_AS(parse_module("let T = 1\nlet P = request x:(T)(k).0"), ParseError);
}

TEST_CASE("round trips on the worked definitions") {
  const Module& m = movie_module();
  for (const char* name : {"PAY", "S", "ClntSess", "ProvSess", "BankSess"}) {
    TypeRef t = m.type_binding(name);
    CHECK(equal(t, parse_type(pretty(t))));
  }
  for (const char* name : {"g", "gp", "h"}) {
    OrchRef f = m.orch_binding(name);
    CHECK(equal(f, parse_orch(pretty(f))));
  }
  for (const char* name : {"Client", "Provider", "Bank", "System"}) {
    ProcRef p = m.proc_binding(name);
    CHECK(equal(p, parse_process(pretty(p))));
  }
}

TEST_CASE("generated values round trip") {
  Rng rng(61);
  for (int i = 0; i < 150; ++i) {
    GenOptions opt;
    opt.prioritized = rng.chance(30);
    TypeRef t = gen_type(rng, 4, opt);
    CHECK(equal(t, parse_type(pretty(t))));
    OrchRef f = gen_orch(rng, 4);
    CHECK(equal(f, parse_orch(pretty(f))));
    ProcRef p = gen_typed_process(rng, 2, 3);
    CHECK(equal(p, parse_process(pretty(p))));
  }
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_type("&{a: end,\n   a: end}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.span.line >= 1);
    CHECK(!e.message.empty());
  }
}
