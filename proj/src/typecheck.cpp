#include "ost/typecheck.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

#include "ost/pretty.hpp"

namespace ost {

const char* to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::UnboundChannel: return "UnboundChannel";
    case TypeErrorKind::PolarityClash: return "PolarityClash";
    case TypeErrorKind::TypingOverlap: return "TypingOverlap";
    case TypeErrorKind::LabelMismatch: return "LabelMismatch";
    case TypeErrorKind::ComplianceFailure: return "ComplianceFailure";
    case TypeErrorKind::GroundTypeMismatch: return "GroundTypeMismatch";
    case TypeErrorKind::IncompleteTyping: return "IncompleteTyping";
    case TypeErrorKind::BranchTypingDisagreement: return "BranchTypingDisagreement";
    case TypeErrorKind::ArityOrShape: return "ArityOrShape";
  }
  return "?";
}

std::string TypeError::to_string() const {
  std::string s = ost::to_string(kind);
  if (!path.empty()) s += " at " + path;
  if (!detail.empty()) s += ": " + detail;
  return s;
}

std::variant<Typing, TypeError> typing_compose_t(const Typing& a, const Typing& b) {
  std::vector<PolName> clashes;
  auto r = typing_compose(a, b, &clashes);
  if (r) return *r;
  std::string who;
  for (const auto& k : clashes) who += (who.empty() ? "" : ", ") + ost::to_string(k);
  return TypeError{TypeErrorKind::TypingOverlap, "", "overlapping channel(s): " + who};
}

namespace {

// ---------------------------------------------------------------------------
// Inference types: session types with metavariables for delegated channels,
// ground positions and catch polarities.

struct ITy;
using ITyRef = std::shared_ptr<const ITy>;

enum class IK : uint8_t { End, InV, OutV, InS, OutS, Branch, Select, Spec, Var };

struct IGround {
  bool is_var = false;
  GroundType g{"Nat"};
  int id = 0;
};

struct IPolRep {
  bool is_var = false;
  Polarity p = Polarity::Plus;
  int id = 0;
};

struct IArm {
  std::string label;
  ITyRef t;
};

struct ITy {
  IK k = IK::End;
  IGround ground;
  ITyRef carried;
  IPolRep cpol;
  ITyRef cont;
  std::vector<IArm> arms;
  bool prio = false;
  int var = 0;
};

ITyRef mk(ITy t) { return std::make_shared<const ITy>(std::move(t)); }

ITyRef i_end() {
  static const ITyRef e = mk(ITy{});
  return e;
}

// Typed failure, thrown during the walk and caught at the boundary.
struct TErr {
  TypeError e;
};

[[noreturn]] void bail(TypeErrorKind k, const std::string& path, const std::string& detail) {
  throw TErr{TypeError{k, path, detail}};
}

// Binding store with an undo trail. Ground and polarity variables may be
// bound to another variable (a link) or to a concrete value.
struct Store {
  std::vector<ITyRef> svar;  // empty = unbound
  std::vector<std::optional<IGround>> gvar;
  std::vector<std::optional<IPolRep>> pvar;
  std::vector<std::pair<char, int>> trail;

  int fresh_svar() {
    svar.emplace_back();
    return int(svar.size()) - 1;
  }
  int fresh_gvar() {
    gvar.emplace_back();
    return int(gvar.size()) - 1;
  }
  int fresh_pvar() {
    pvar.emplace_back();
    return int(pvar.size()) - 1;
  }

  size_t mark() const { return trail.size(); }
  void rollback(size_t m) {
    while (trail.size() > m) {
      auto [k, i] = trail.back();
      trail.pop_back();
      if (k == 's') svar[i] = nullptr;
      else if (k == 'g') gvar[i].reset();
      else pvar[i].reset();
    }
  }

  void bind_svar(int i, const ITyRef& t) {
    svar[i] = t;
    trail.emplace_back('s', i);
  }
  void bind_gvar(int i, IGround g) {
    gvar[i] = g;
    trail.emplace_back('g', i);
  }
  void bind_pvar(int i, IPolRep p) {
    pvar[i] = p;
    trail.emplace_back('p', i);
  }

  ITyRef head(ITyRef t) const {
    while (t->k == IK::Var && svar[t->var]) t = svar[t->var];
    return t;
  }
  IGround gres(IGround g) const {
    while (g.is_var && gvar[g.id]) g = *gvar[g.id];
    return g;
  }
  IPolRep pres(IPolRep p) const {
    while (p.is_var && pvar[p.id]) p = *pvar[p.id];
    return p;
  }

  bool occurs(int var, ITyRef t) const {
    t = head(t);
    switch (t->k) {
      case IK::Var:
        return t->var == var;
      case IK::End:
        return false;
      case IK::InV:
      case IK::OutV:
        return occurs(var, t->cont);
      case IK::InS:
      case IK::OutS:
        return occurs(var, t->carried) || occurs(var, t->cont);
      default:
        for (const auto& a : t->arms)
          if (occurs(var, a.t)) return true;
        return false;
    }
  }
};

ITyRef i_var(Store& st) {
  ITy t;
  t.k = IK::Var;
  t.var = st.fresh_svar();
  return mk(t);
}

IGround g_var(Store& st) { return IGround{true, GroundType("Nat"), st.fresh_gvar()}; }

ITyRef from_type(const TypeRef& t) {
  ITy r;
  switch (t->kind()) {
    case TypeKind::End:
      return i_end();
    case TypeKind::InValue:
    case TypeKind::OutValue:
      r.k = t->kind() == TypeKind::InValue ? IK::InV : IK::OutV;
      r.ground = IGround{false, t->ground(), 0};
      r.cont = from_type(t->cont());
      return mk(std::move(r));
    case TypeKind::InSession:
    case TypeKind::OutSession:
      r.k = t->kind() == TypeKind::InSession ? IK::InS : IK::OutS;
      r.carried = from_type(t->carried());
      r.cpol = IPolRep{false, t->carried_polarity(), 0};
      r.cont = from_type(t->cont());
      return mk(std::move(r));
    case TypeKind::Branch:
    case TypeKind::Select:
    case TypeKind::SpecSelect:
      r.k = t->kind() == TypeKind::Branch ? IK::Branch
            : t->kind() == TypeKind::Select ? IK::Select
                                            : IK::Spec;
      r.prio = t->kind() == TypeKind::SpecSelect && t->prioritized();
      for (const auto& a : t->arms()) r.arms.push_back({a.label, from_type(a.type)});
      return mk(std::move(r));
  }
  return i_end();
}

std::optional<TypeRef> to_type(const Store& st, ITyRef t) {
  t = st.head(t);
  switch (t->k) {
    case IK::Var:
      return std::nullopt;
    case IK::End:
      return Type::end();
    case IK::InV:
    case IK::OutV: {
      IGround g = st.gres(t->ground);
      if (g.is_var) return std::nullopt;
      auto c = to_type(st, t->cont);
      if (!c) return std::nullopt;
      return t->k == IK::InV ? Type::in_value(g.g, *c) : Type::out_value(g.g, *c);
    }
    case IK::InS:
    case IK::OutS: {
      IPolRep p = st.pres(t->cpol);
      if (p.is_var) return std::nullopt;
      auto car = to_type(st, t->carried);
      auto c = to_type(st, t->cont);
      if (!car || !c) return std::nullopt;
      return t->k == IK::InS ? Type::in_session(*car, p.p, *c) : Type::out_session(*car, p.p, *c);
    }
    case IK::Branch:
    case IK::Select:
    case IK::Spec: {
      std::vector<TypeArm> arms;
      for (const auto& a : t->arms) {
        auto at = to_type(st, a.t);
        if (!at) return std::nullopt;
        arms.push_back({a.label, *at});
      }
      if (t->k == IK::Branch) return Type::branch(std::move(arms));
      if (t->k == IK::Select) return Type::select(std::move(arms));
      return Type::spec_select(std::move(arms), t->prio);
    }
  }
  return std::nullopt;
}

std::string ipretty(const Store& st, ITyRef t) {
  t = st.head(t);
  switch (t->k) {
    case IK::Var:
      return "?" + std::to_string(t->var);
    case IK::End:
      return "end";
    case IK::InV:
    case IK::OutV: {
      IGround g = st.gres(t->ground);
      std::string gn = g.is_var ? "?g" + std::to_string(g.id) : g.g.name();
      return std::string(t->k == IK::InV ? "?" : "!") + gn + "." + ipretty(st, t->cont);
    }
    case IK::InS:
    case IK::OutS: {
      IPolRep p = st.pres(t->cpol);
      std::string ps = p.is_var ? "?" : std::string(1, polarity_char(p.p));
      return std::string(t->k == IK::InS ? "?" : "!") + "(" + ipretty(st, t->carried) + ps +
             ")." + ipretty(st, t->cont);
    }
    case IK::Branch:
    case IK::Select:
    case IK::Spec: {
      std::string s = t->k == IK::Branch ? "&{" : t->k == IK::Select ? "+{" : "spec{";
      bool first = true;
      for (const auto& a : t->arms) {
        if (!first) s += ", ";
        first = false;
        s += a.label + ":" + ipretty(st, a.t);
      }
      return s + "}";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Unification / realization / merge

bool unify_ground(Store& st, const IGround& a0, const IGround& b0) {
  IGround a = st.gres(a0);
  IGround b = st.gres(b0);
  if (a.is_var && b.is_var) {
    if (a.id != b.id) st.bind_gvar(a.id, b);
    return true;
  }
  if (a.is_var) {
    st.bind_gvar(a.id, b);
    return true;
  }
  if (b.is_var) {
    st.bind_gvar(b.id, a);
    return true;
  }
  return a.g == b.g;
}

bool unify_pol(Store& st, const IPolRep& a0, const IPolRep& b0) {
  IPolRep a = st.pres(a0);
  IPolRep b = st.pres(b0);
  if (a.is_var && b.is_var) {
    if (a.id != b.id) st.bind_pvar(a.id, b);
    return true;
  }
  if (a.is_var) {
    st.bind_pvar(a.id, b);
    return true;
  }
  if (b.is_var) {
    st.bind_pvar(b.id, a);
    return true;
  }
  return a.p == b.p;
}

struct Checker;

// Widening-aware check that a usage type fits a claimed type: selects may
// widen, branches may narrow, everything else matches structurally.
bool realizes(Store& st, ITyRef usage, ITyRef claim, std::string* why,
              TypeErrorKind* kind = nullptr);

bool realize_arms_subset(Store& st, const std::vector<IArm>& small,
                         const std::vector<IArm>& big, bool small_is_usage, std::string* why,
                         TypeErrorKind* kind) {
  for (const auto& a : small) {
    const IArm* other = nullptr;
    for (const auto& b : big)
      if (b.label == a.label) {
        other = &b;
        break;
      }
    if (!other) {
      if (why) *why = "label '" + a.label + "' has no counterpart";
      if (kind) *kind = TypeErrorKind::LabelMismatch;
      return false;
    }
    bool ok = small_is_usage ? realizes(st, a.t, other->t, why, kind)
                             : realizes(st, other->t, a.t, why, kind);
    if (!ok) return false;
  }
  return true;
}

bool realizes(Store& st, ITyRef usage, ITyRef claim, std::string* why, TypeErrorKind* kind) {
  usage = st.head(usage);
  claim = st.head(claim);
  if (usage->k == IK::Var) {
    if (claim->k == IK::Var && claim->var == usage->var) return true;
    if (st.occurs(usage->var, claim)) {
      if (why) *why = "cyclic session type";
      return false;
    }
    st.bind_svar(usage->var, claim);
    return true;
  }
  if (claim->k == IK::Var) {
    if (st.occurs(claim->var, usage)) {
      if (why) *why = "cyclic session type";
      return false;
    }
    st.bind_svar(claim->var, usage);
    return true;
  }
  if (usage->k == IK::End && claim->k == IK::End) return true;
  if (usage->k != claim->k) {
    if (why) *why = ipretty(st, usage) + " vs " + ipretty(st, claim);
    return false;
  }
  switch (usage->k) {
    case IK::InV:
    case IK::OutV:
      if (!unify_ground(st, usage->ground, claim->ground)) {
        if (why) *why = "ground type mismatch";
        return false;
      }
      return realizes(st, usage->cont, claim->cont, why, kind);
    case IK::InS:
    case IK::OutS:
      if (!unify_pol(st, usage->cpol, claim->cpol)) {
        if (why) *why = "carried polarity mismatch";
        if (kind) *kind = TypeErrorKind::PolarityClash;
        return false;
      }
      return realizes(st, usage->carried, claim->carried, why, kind) &&
             realizes(st, usage->cont, claim->cont, why, kind);
    case IK::Branch:
      // usage (all process arms) may exceed the claim
      return realize_arms_subset(st, claim->arms, usage->arms, /*small_is_usage=*/false, why,
                                 kind);
    case IK::Select:
      // claim may carry phantom arms beyond the usage
      return realize_arms_subset(st, usage->arms, claim->arms, /*small_is_usage=*/true, why,
                                 kind);
    case IK::Spec: {
      if (usage->arms.size() != claim->arms.size()) {
        if (why) *why = "speculative arm lists differ";
        if (kind) *kind = TypeErrorKind::LabelMismatch;
        return false;
      }
      for (size_t i = 0; i < usage->arms.size(); ++i) {
        if (usage->arms[i].label != claim->arms[i].label) {
          if (why) *why = "speculative arm lists differ";
          if (kind) *kind = TypeErrorKind::LabelMismatch;
          return false;
        }
        if (!realizes(st, usage->arms[i].t, claim->arms[i].t, why, kind)) return false;
      }
      return true;
    }
    default:
      return false;
  }
}

// Least common weakening of two inferred types (conditionals, branch arms):
// selects unite, branches intersect, speculative lists must agree.
std::optional<ITyRef> merge_types(Store& st, ITyRef a, ITyRef b) {
  a = st.head(a);
  b = st.head(b);
  if (a->k == IK::Var) {
    if (b->k == IK::Var && b->var == a->var) return a;
    if (st.occurs(a->var, b)) return std::nullopt;
    st.bind_svar(a->var, b);
    return b;
  }
  if (b->k == IK::Var) {
    if (st.occurs(b->var, a)) return std::nullopt;
    st.bind_svar(b->var, a);
    return a;
  }
  if (a->k != b->k) return std::nullopt;
  switch (a->k) {
    case IK::End:
      return a;
    case IK::InV:
    case IK::OutV: {
      if (!unify_ground(st, a->ground, b->ground)) return std::nullopt;
      auto c = merge_types(st, a->cont, b->cont);
      if (!c) return std::nullopt;
      ITy r;
      r.k = a->k;
      r.ground = st.gres(a->ground);
      r.cont = *c;
      return mk(std::move(r));
    }
    case IK::InS:
    case IK::OutS: {
      if (!unify_pol(st, a->cpol, b->cpol)) return std::nullopt;
      auto car = merge_types(st, a->carried, b->carried);
      auto c = merge_types(st, a->cont, b->cont);
      if (!car || !c) return std::nullopt;
      ITy r;
      r.k = a->k;
      r.carried = *car;
      r.cpol = st.pres(a->cpol);
      r.cont = *c;
      return mk(std::move(r));
    }
    case IK::Branch: {
      std::vector<IArm> arms;
      for (const auto& x : a->arms) {
        for (const auto& y : b->arms) {
          if (x.label == y.label) {
            auto m = merge_types(st, x.t, y.t);
            if (!m) return std::nullopt;
            arms.push_back({x.label, *m});
            break;
          }
        }
      }
      if (arms.empty()) return std::nullopt;
      ITy r;
      r.k = IK::Branch;
      r.arms = std::move(arms);
      return mk(std::move(r));
    }
    case IK::Select: {
      std::vector<IArm> arms;
      for (const auto& x : a->arms) {
        const IArm* other = nullptr;
        for (const auto& y : b->arms)
          if (y.label == x.label) other = &y;
        if (other) {
          auto m = merge_types(st, x.t, other->t);
          if (!m) return std::nullopt;
          arms.push_back({x.label, *m});
        } else {
          arms.push_back(x);
        }
      }
      for (const auto& y : b->arms) {
        bool seen = false;
        for (const auto& x : a->arms)
          if (x.label == y.label) seen = true;
        if (!seen) arms.push_back(y);
      }
      ITy r;
      r.k = IK::Select;
      r.arms = std::move(arms);
      return mk(std::move(r));
    }
    case IK::Spec: {
      if (a->prio != b->prio || a->arms.size() != b->arms.size()) return std::nullopt;
      std::vector<IArm> arms;
      for (size_t i = 0; i < a->arms.size(); ++i) {
        if (a->arms[i].label != b->arms[i].label) return std::nullopt;
        auto m = merge_types(st, a->arms[i].t, b->arms[i].t);
        if (!m) return std::nullopt;
        arms.push_back({a->arms[i].label, *m});
      }
      ITy r;
      r.k = IK::Spec;
      r.prio = a->prio;
      r.arms = std::move(arms);
      return mk(std::move(r));
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Declarative compliance for CRes: like Definition 2.3 but admitting the
// phantom arms that the selection rule may add to a typing derivation.

enum class CRes : uint8_t { Ok, Fail, Stuck };

struct CResult {
  CRes r;
  std::string why;  // for Fail
  static CResult ok() { return {CRes::Ok, ""}; }
  static CResult fail(std::string w) { return {CRes::Fail, std::move(w)}; }
  static CResult stuck() { return {CRes::Stuck, ""}; }
};

CResult cres_check(Store& st, const OrchRef& f, ITyRef client, ITyRef server);

// Is there a client type the orchestrator can drive against this server?
CResult exists_client(Store& st, const OrchRef& f, ITyRef server) {
  server = st.head(server);
  if (f->kind() == OrchKind::Idle) return CResult::ok();
  if (server->k == IK::Var) return CResult::stuck();
  switch (f->kind()) {
    case OrchKind::IOPrefix:
      if (server->k == IK::InV || server->k == IK::OutV || server->k == IK::InS ||
          server->k == IK::OutS)
        return exists_client(st, f->cont(), server->cont);
      return CResult::fail("i/o prefix against " + ipretty(st, server));
    case OrchKind::LabelPrefix: {
      const std::string& l = f->label();
      if (server->k == IK::Branch || server->k == IK::Spec) {
        for (const auto& a : server->arms)
          if (a.label == l) return exists_client(st, f->cont(), a.t);
        return CResult::fail("label '" + l + "' not offered");
      }
      if (server->k == IK::Select) {
        if (server->arms.size() != 1 || server->arms[0].label != l)
          return CResult::fail("selection does not match label '" + l + "'");
        return exists_client(st, f->cont(), server->arms[0].t);
      }
      return CResult::fail("label prefix against " + ipretty(st, server));
    }
    case OrchKind::ExternalChoice: {
      if (server->k == IK::Branch) {
        for (const auto& oa : f->arms()) {
          const IArm* sa = nullptr;
          for (const auto& a : server->arms)
            if (a.label == oa.label) sa = &a;
          if (!sa) return CResult::fail("branch lacks label '" + oa.label + "'");
          CResult r = exists_client(st, oa.cont, sa->t);
          if (r.r != CRes::Ok) return r;
        }
        return CResult::ok();
      }
      if (server->k == IK::Select) {
        // server arms must all be covered by the choice
        for (const auto& a : server->arms) {
          const OrchArm* oa = nullptr;
          for (const auto& x : f->arms())
            if (x.label == a.label) oa = &x;
          if (!oa) return CResult::fail("choice lacks label '" + a.label + "'");
          CResult r = exists_client(st, oa->cont, a.t);
          if (r.r != CRes::Ok) return r;
        }
        return CResult::ok();
      }
      return CResult::fail("external choice against " + ipretty(st, server));
    }
    case OrchKind::InternalChoice: {
      if (server->k != IK::Branch && server->k != IK::Spec)
        return CResult::fail("internal choice against " + ipretty(st, server));
      for (const auto& oa : f->arms()) {
        const IArm* sa = nullptr;
        for (const auto& a : server->arms)
          if (a.label == oa.label) sa = &a;
        if (!sa) return CResult::fail("no arm '" + oa.label + "'");
        CResult r = exists_client(st, oa.cont, sa->t);
        if (r.r != CRes::Ok) return r;
      }
      return CResult::ok();
    }
    default:
      return CResult::fail("unreachable");
  }
}

// Is there a server type against which the orchestrator drives this client?
CResult exists_server(Store& st, const OrchRef& f, ITyRef client) {
  client = st.head(client);
  if (client->k == IK::Var) {
    if (f->kind() == OrchKind::Idle) {
      st.bind_svar(client->var, i_end());
      return CResult::ok();
    }
    return CResult::stuck();
  }
  switch (f->kind()) {
    case OrchKind::Idle:
      return client->k == IK::End
                 ? CResult::ok()
                 : CResult::fail("idle orchestrator against " + ipretty(st, client));
    case OrchKind::IOPrefix:
      if (client->k == IK::InV || client->k == IK::OutV || client->k == IK::InS ||
          client->k == IK::OutS)
        return exists_server(st, f->cont(), client->cont);
      return CResult::fail("i/o prefix against " + ipretty(st, client));
    case OrchKind::LabelPrefix: {
      const std::string& l = f->label();
      if (client->k == IK::Branch || client->k == IK::Spec) {
        for (const auto& a : client->arms)
          if (a.label == l) return exists_server(st, f->cont(), a.t);
        return CResult::fail("label '" + l + "' not offered");
      }
      if (client->k == IK::Select) {
        if (client->arms.size() != 1 || client->arms[0].label != l)
          return CResult::fail("selection does not match label '" + l + "'");
        return exists_server(st, f->cont(), client->arms[0].t);
      }
      return CResult::fail("label prefix against " + ipretty(st, client));
    }
    case OrchKind::ExternalChoice: {
      if (client->k == IK::Select) {
        for (const auto& a : client->arms) {
          const OrchArm* oa = nullptr;
          for (const auto& x : f->arms())
            if (x.label == a.label) oa = &x;
          if (!oa) return CResult::fail("choice lacks label '" + a.label + "'");
          CResult r = exists_server(st, oa->cont, a.t);
          if (r.r != CRes::Ok) return r;
        }
        return CResult::ok();
      }
      if (client->k == IK::Branch) {
        for (const auto& oa : f->arms()) {
          const IArm* ca = nullptr;
          for (const auto& a : client->arms)
            if (a.label == oa.label) ca = &a;
          if (!ca) return CResult::fail("branch lacks label '" + oa.label + "'");
          CResult r = exists_server(st, oa.cont, ca->t);
          if (r.r != CRes::Ok) return r;
        }
        return CResult::ok();
      }
      return CResult::fail("external choice against " + ipretty(st, client));
    }
    case OrchKind::InternalChoice: {
      if (client->k != IK::Branch && client->k != IK::Spec)
        return CResult::fail("internal choice against " + ipretty(st, client));
      for (const auto& oa : f->arms()) {
        const IArm* ca = nullptr;
        for (const auto& a : client->arms)
          if (a.label == oa.label) ca = &a;
        if (!ca) return CResult::fail("no arm '" + oa.label + "'");
        CResult r = exists_server(st, oa.cont, ca->t);
        if (r.r != CRes::Ok) return r;
      }
      return CResult::ok();
    }
  }
  return CResult::fail("unreachable");
}

// Forces an unknown side to the shape the i/o prefix dictates.
ITyRef forced_partner(Store& st, ITyRef known, bool known_is_server) {
  (void)known_is_server;
  ITy r;
  switch (known->k) {
    case IK::InV:
      r.k = IK::OutV;
      break;
    case IK::OutV:
      r.k = IK::InV;
      break;
    case IK::InS:
      r.k = IK::OutS;
      break;
    case IK::OutS:
      r.k = IK::InS;
      break;
    default:
      return nullptr;
  }
  r.ground = known->ground;
  r.carried = known->carried;
  r.cpol = known->cpol;
  r.cont = i_var(st);
  return mk(std::move(r));
}

CResult cres_external(Store& st, const std::vector<OrchArm>& arms, ITyRef client, ITyRef server);
CResult cres_internal(Store& st, const std::vector<OrchArm>& arms, ITyRef client, ITyRef server);

CResult cres_check(Store& st, const OrchRef& f, ITyRef client, ITyRef server) {
  client = st.head(client);
  server = st.head(server);
  switch (f->kind()) {
    case OrchKind::Idle: {
      if (client->k == IK::Var) {
        st.bind_svar(client->var, i_end());
        return CResult::ok();
      }
      return client->k == IK::End
                 ? CResult::ok()
                 : CResult::fail("idle orchestrator but client continues as " +
                                 ipretty(st, client));
    }
    case OrchKind::IOPrefix: {
      if (client->k == IK::Var && server->k == IK::Var) return CResult::stuck();
      if (client->k == IK::Var) {
        ITyRef forced = forced_partner(st, server, true);
        if (!forced)
          return CResult::fail("i/o prefix against " + ipretty(st, server));
        st.bind_svar(client->var, forced);
        client = forced;
      } else if (server->k == IK::Var) {
        ITyRef forced = forced_partner(st, client, false);
        if (!forced)
          return CResult::fail("i/o prefix against " + ipretty(st, client));
        st.bind_svar(server->var, forced);
        server = forced;
      }
      bool value = (client->k == IK::InV && server->k == IK::OutV) ||
                   (client->k == IK::OutV && server->k == IK::InV);
      bool sess = (client->k == IK::InS && server->k == IK::OutS) ||
                  (client->k == IK::OutS && server->k == IK::InS);
      if (!value && !sess)
        return CResult::fail("i/o heads do not match: " + ipretty(st, client) + " vs " +
                             ipretty(st, server));
      if (value) {
        if (!unify_ground(st, client->ground, server->ground))
          return CResult::fail("exchanged ground types differ");
      } else {
        if (!unify_pol(st, client->cpol, server->cpol))
          return CResult::fail("delegated polarities differ");
        // the receiving side's usage must fit the sending side's claim
        ITyRef usage = client->k == IK::InS ? client->carried : server->carried;
        ITyRef claim = client->k == IK::InS ? server->carried : client->carried;
        std::string why;
        if (!realizes(st, usage, claim, &why))
          return CResult::fail("delegated session types differ: " + why);
      }
      return cres_check(st, f->cont(), client->cont, server->cont);
    }
    case OrchKind::LabelPrefix: {
      std::vector<OrchArm> one{{f->label(), f->cont()}};
      size_t m = st.mark();
      CResult ext = cres_external(st, one, client, server);
      if (ext.r == CRes::Ok) return ext;
      st.rollback(m);
      CResult intl = cres_internal(st, one, client, server);
      if (intl.r == CRes::Ok) return intl;
      st.rollback(m);
      if (ext.r == CRes::Stuck || intl.r == CRes::Stuck) return CResult::stuck();
      return ext;
    }
    case OrchKind::ExternalChoice:
      return cres_external(st, f->arms(), client, server);
    case OrchKind::InternalChoice:
      return cres_internal(st, f->arms(), client, server);
  }
  return CResult::fail("unreachable");
}

CResult cres_external(Store& st, const std::vector<OrchArm>& arms, ITyRef client,
                      ITyRef server) {
  client = st.head(client);
  server = st.head(server);
  if (client->k == IK::Var || server->k == IK::Var) return CResult::stuck();
  const ITy* sel = nullptr;
  const ITy* br = nullptr;
  bool client_selects;
  if (client->k == IK::Select && server->k == IK::Branch) {
    sel = client.get();
    br = server.get();
    client_selects = true;
  } else if (client->k == IK::Branch && server->k == IK::Select) {
    sel = server.get();
    br = client.get();
    client_selects = false;
  } else {
    return CResult::fail("external choice against " + ipretty(st, client) + " / " +
                         ipretty(st, server));
  }
  // selection arms must be covered by the choice, the choice by the branch
  for (const auto& a : sel->arms) {
    bool in_orch = false;
    for (const auto& oa : arms)
      if (oa.label == a.label) in_orch = true;
    if (!in_orch) return CResult::fail("selected label '" + a.label + "' not orchestrated");
  }
  for (const auto& oa : arms) {
    const IArm* ba = nullptr;
    for (const auto& b : br->arms)
      if (b.label == oa.label) ba = &b;
    if (!ba) return CResult::fail("orchestrated label '" + oa.label + "' not offered");
    const IArm* sa = nullptr;
    for (const auto& s : sel->arms)
      if (s.label == oa.label) sa = &s;
    if (sa) {
      CResult r = client_selects ? cres_check(st, oa.cont, sa->t, ba->t)
                                 : cres_check(st, oa.cont, ba->t, sa->t);
      if (r.r != CRes::Ok) return r;
    } else {
      // phantom arm admitted by the selection rule
      CResult r = client_selects ? exists_client(st, oa.cont, ba->t)
                                 : exists_server(st, oa.cont, ba->t);
      if (r.r != CRes::Ok) return r;
    }
  }
  return CResult::ok();
}

CResult cres_internal(Store& st, const std::vector<OrchArm>& arms, ITyRef client,
                      ITyRef server) {
  client = st.head(client);
  server = st.head(server);
  if (client->k == IK::Var || server->k == IK::Var) return CResult::stuck();
  const ITy* spec = nullptr;
  const ITy* br = nullptr;
  bool client_speculates;
  if (client->k == IK::Spec && server->k == IK::Branch) {
    spec = client.get();
    br = server.get();
    client_speculates = true;
  } else if (client->k == IK::Branch && server->k == IK::Spec) {
    spec = server.get();
    br = client.get();
    client_speculates = false;
  } else {
    return CResult::fail("internal choice against " + ipretty(st, client) + " / " +
                         ipretty(st, server));
  }
  for (const auto& oa : arms) {
    const IArm* pa = nullptr;
    const IArm* ba = nullptr;
    for (const auto& a : spec->arms)
      if (a.label == oa.label) pa = &a;
    for (const auto& a : br->arms)
      if (a.label == oa.label) ba = &a;
    if (!pa || !ba)
      return CResult::fail("orchestrated label '" + oa.label + "' not shared");
    CResult r = client_speculates ? cres_check(st, oa.cont, pa->t, ba->t)
                                  : cres_check(st, oa.cont, ba->t, pa->t);
    if (r.r != CRes::Ok) return r;
  }
  return CResult::ok();
}

// ---------------------------------------------------------------------------
// The inference walk

struct IKey {
  std::string name;
  IPolRep pol;
};

struct IEntry {
  IKey key;
  ITyRef ty;
};

struct IDelta {
  std::vector<IEntry> entries;
};

struct Obligation {
  OrchRef orch;
  ITyRef client;
  ITyRef server;
  std::string path;
};

struct Checker {
  Store st;
  const FunctionTable* env;
  SemanticsMode mode;
  std::vector<Obligation> obligations;
  std::vector<std::string> path;

  // receive-ground probing (see infer_receive_ground)
  const Proc* probe_node = nullptr;
  std::optional<IGround> probe_result;

  std::string here() const {
    std::string s;
    for (const auto& seg : path) {
      if (!s.empty()) s += "/";
      s += seg;
    }
    return s.empty() ? "<root>" : s;
  }

  bool key_same(const IKey& a, const IKey& b) {
    if (a.name != b.name) return false;
    IPolRep pa = st.pres(a.pol);
    IPolRep pb = st.pres(b.pol);
    if (!pa.is_var && !pb.is_var) return pa.p == pb.p;
    if (pa.is_var && pb.is_var) return pa.id == pb.id;
    // a caught channel is a different binding than a same-named free one
    return false;
  }

  ITyRef* find(IDelta& d, const IKey& k) {
    for (auto& e : d.entries)
      if (key_same(e.key, k)) return &e.ty;
    return nullptr;
  }

  ITyRef take(IDelta& d, const IKey& k) {
    for (size_t i = 0; i < d.entries.size(); ++i) {
      if (key_same(d.entries[i].key, k)) {
        ITyRef t = d.entries[i].ty;
        d.entries.erase(d.entries.begin() + i);
        return t;
      }
    }
    return i_end();  // weakening: an absent channel is finished
  }

  void put(IDelta& d, const IKey& k, ITyRef t) {
    if (find(d, k)) bail(TypeErrorKind::TypingOverlap, here(), "channel " + k.name + " typed twice");
    d.entries.push_back({k, std::move(t)});
  }

  IDelta compose(IDelta a, IDelta& b) {
    for (auto& e : b.entries) {
      if (find(a, e.key)) {
        std::string p = st.pres(e.key.pol).is_var
                            ? e.key.name
                            : e.key.name + polarity_char(st.pres(e.key.pol).p);
        bail(TypeErrorKind::TypingOverlap, here(), "overlapping channel " + p);
      }
      a.entries.push_back(std::move(e));
    }
    return a;
  }

  IDelta merge_deltas(IDelta a, IDelta b, const char* what) {
    IDelta out;
    for (auto& ea : a.entries) {
      ITyRef* tb = find(b, ea.key);
      if (tb) {
        auto m = merge_types(st, ea.ty, *tb);
        if (!m)
          bail(TypeErrorKind::BranchTypingDisagreement, here(),
               std::string(what) + " disagree on " + ea.key.name + ": " +
                   ipretty(st, ea.ty) + " vs " + ipretty(st, *tb));
        out.entries.push_back({ea.key, *m});
      } else {
        auto m = merge_types(st, ea.ty, i_end());
        if (!m)
          bail(TypeErrorKind::BranchTypingDisagreement, here(),
               std::string(what) + " disagree on " + ea.key.name + ": " +
                   ipretty(st, ea.ty) + " vs end");
        out.entries.push_back({ea.key, *m});
      }
    }
    for (auto& eb : b.entries) {
      bool seen = false;
      for (auto& ea : a.entries)
        if (key_same(ea.key, eb.key)) seen = true;
      if (!seen) {
        auto m = merge_types(st, eb.ty, i_end());
        if (!m)
          bail(TypeErrorKind::BranchTypingDisagreement, here(),
               std::string(what) + " disagree on " + eb.key.name + ": " +
                   ipretty(st, eb.ty) + " vs end");
        out.entries.push_back({eb.key, *m});
      }
    }
    return out;
  }

  // --- expressions ---------------------------------------------------------

  using IGamma = std::map<std::string, IGround>;

  IGround type_expr(const IGamma& gamma, const ExprRef& e) {
    switch (e->kind()) {
      case ExprKind::Lit:
        return IGround{false, e->value().type(), 0};
      case ExprKind::Var: {
        auto it = gamma.find(e->name());
        if (it == gamma.end())
          bail(TypeErrorKind::ArityOrShape, here(), "unbound variable '" + e->name() + "'");
        return it->second;
      }
      case ExprKind::Apply: {
        const FnSig* sig = env->signature(e->name());
        if (!sig)
          bail(TypeErrorKind::ArityOrShape, here(), "undeclared function '" + e->name() + "'");
        if (sig->params.size() != e->args().size())
          bail(TypeErrorKind::ArityOrShape, here(),
               "function '" + e->name() + "' expects " + std::to_string(sig->params.size()) +
                   " arguments");
        for (size_t i = 0; i < e->args().size(); ++i) {
          IGround a = type_expr(gamma, e->args()[i]);
          if (!unify_ground(st, a, IGround{false, sig->params[i], 0}))
            bail(TypeErrorKind::GroundTypeMismatch, here(),
                 "argument " + std::to_string(i + 1) + " of '" + e->name() + "' is not " +
                     sig->params[i].name());
        }
        return IGround{false, sig->result, 0};
      }
    }
    bail(TypeErrorKind::ArityOrShape, here(), "malformed expression");
  }

  // --- channel keys ----------------------------------------------------------

  struct ChanEnv {
    std::map<std::string, IPolRep> bound;  // unpolarized name -> polarity
  };

  IKey key_of(const ChanEnv& cenv, const ChannelRef& c) {
    if (c.pol) return IKey{c.name, IPolRep{false, *c.pol, 0}};
    auto it = cenv.bound.find(c.name);
    if (it == cenv.bound.end())
      bail(TypeErrorKind::UnboundChannel, here(),
           "channel '" + c.name + "' used without polarity or binder");
    return IKey{c.name, it->second};
  }

  // --- processes -------------------------------------------------------------

  IDelta infer(const IGamma& gamma, const ChanEnv& cenv, const ProcRef& p) {
    switch (p->kind()) {
      case ProcKind::Inact:
        return {};
      case ProcKind::Par: {
        path.push_back("par.l");
        IDelta a = infer(gamma, cenv, p->left());
        path.back() = "par.r";
        IDelta b = infer(gamma, cenv, p->right());
        path.pop_back();
        return compose(std::move(a), b);
      }
      case ProcKind::Request:
      case ProcKind::Accept: {
        bool req = p->kind() == ProcKind::Request;
        path.push_back(req ? "request " + p->binder() : "accept " + p->binder());
        ChanEnv inner = cenv;
        Polarity pol = req ? Polarity::Minus : Polarity::Plus;
        inner.bound[p->binder()] = IPolRep{false, pol, 0};
        IDelta d = infer(gamma, inner, p->body());
        ITyRef got = take(d, IKey{p->binder(), IPolRep{false, pol, 0}});
        std::string why;
        TypeErrorKind kind = TypeErrorKind::GroundTypeMismatch;
        if (!realizes(st, got, from_type(p->session_type()), &why, &kind))
          bail(kind, here(), "body does not follow the declared session type: " + why);
        for (const auto& e : d.entries)
          if (e.key.name == p->binder())
            bail(TypeErrorKind::ArityOrShape, here(),
                 "bound channel '" + p->binder() + "' escapes its session");
        path.pop_back();
        return d;
      }
      case ProcKind::SendValue: {
        path.push_back("send " + p->channel().name);
        IKey k = key_of(cenv, p->channel());
        IGround g = type_expr(gamma, p->expr());
        IDelta d = infer(gamma, cenv, p->cont());
        ITyRef s = take(d, k);
        ITy t;
        t.k = IK::OutV;
        t.ground = g;
        t.cont = s;
        put(d, k, mk(std::move(t)));
        path.pop_back();
        return d;
      }
      case ProcKind::RecvValue: {
        path.push_back("recv " + p->channel().name);
        IKey k = key_of(cenv, p->channel());
        IGround g = g_var(st);
        if (probe_node == p.get()) probe_result = g;
        IGamma inner = gamma;
        inner.insert_or_assign(p->binder(), g);
        IDelta d = infer(inner, cenv, p->cont());
        ITyRef s = take(d, k);
        ITy t;
        t.k = IK::InV;
        t.ground = g;
        t.cont = s;
        put(d, k, mk(std::move(t)));
        path.pop_back();
        return d;
      }
      case ProcKind::Throw: {
        path.push_back("throw " + p->channel().name);
        IKey k = key_of(cenv, p->channel());
        IKey sent = key_of(cenv, p->sent());
        IDelta d = infer(gamma, cenv, p->cont());
        if (find(d, sent))
          bail(TypeErrorKind::TypingOverlap, here(),
               "thrown channel '" + sent.name + "' also used in the continuation");
        ITyRef s2 = take(d, k);
        ITyRef x = i_var(st);
        ITy t;
        t.k = IK::OutS;
        t.carried = x;
        t.cpol = sent.pol;
        t.cont = s2;
        put(d, k, mk(std::move(t)));
        put(d, sent, x);
        path.pop_back();
        return d;
      }
      case ProcKind::Catch: {
        path.push_back("catch " + p->channel().name);
        IKey k = key_of(cenv, p->channel());
        IPolRep q{true, Polarity::Plus, st.fresh_pvar()};
        ChanEnv inner = cenv;
        inner.bound[p->binder()] = q;
        IDelta d = infer(gamma, inner, p->cont());
        ITyRef s1 = take(d, IKey{p->binder(), q});
        ITyRef s2 = take(d, k);
        ITy t;
        t.k = IK::InS;
        t.carried = s1;
        t.cpol = q;
        t.cont = s2;
        put(d, k, mk(std::move(t)));
        path.pop_back();
        return d;
      }
      case ProcKind::SelectL: {
        path.push_back("select " + p->channel().name + "<|" + p->label());
        IKey k = key_of(cenv, p->channel());
        IDelta d = infer(gamma, cenv, p->cont());
        ITyRef s = take(d, k);
        ITy t;
        t.k = IK::Select;
        t.arms.push_back({p->label(), s});
        put(d, k, mk(std::move(t)));
        path.pop_back();
        return d;
      }
      case ProcKind::BranchL:
      case ProcKind::SpecSelectP: {
        bool branch = p->kind() == ProcKind::BranchL;
        path.push_back((branch ? "branch " : "specsel ") + p->channel().name);
        IKey k = key_of(cenv, p->channel());
        std::optional<IDelta> rest;
        std::vector<IArm> arms;
        for (const auto& a : p->arms()) {
          path.push_back("arm " + a.label);
          IDelta d = infer(gamma, cenv, a.proc);
          ITyRef s = take(d, k);
          arms.push_back({a.label, s});
          if (!rest)
            rest = std::move(d);
          else
            rest = merge_deltas(std::move(*rest), std::move(d), "branch arms");
          path.pop_back();
        }
        ITy t;
        t.k = branch ? IK::Branch : IK::Spec;
        t.prio = !branch && p->prioritized();
        t.arms = std::move(arms);
        put(*rest, k, mk(std::move(t)));
        path.pop_back();
        return std::move(*rest);
      }
      case ProcKind::If: {
        path.push_back("if");
        IGround c = type_expr(gamma, p->expr());
        if (!unify_ground(st, c, IGround{false, GroundType("Bool"), 0}))
          bail(TypeErrorKind::GroundTypeMismatch, here(), "condition is not Bool");
        path.back() = "if.then";
        IDelta a = infer(gamma, cenv, p->then_branch());
        path.back() = "if.else";
        IDelta b = infer(gamma, cenv, p->else_branch());
        path.pop_back();
        return merge_deltas(std::move(a), std::move(b), "conditional branches");
      }
      case ProcKind::NamedOrch:
        bail(TypeErrorKind::ArityOrShape, here(),
             "orchestrator for '" + p->binder() + "' outside its restriction");
      case ProcKind::Restrict: {
        path.push_back("new " + p->binder());
        const std::string& k = p->binder();
        OrchRef orch;
        std::vector<ProcRef> rest_items;
        for (const auto& item : flatten_par(p->body())) {
          if (item->kind() == ProcKind::NamedOrch && item->binder() == k) {
            if (orch)
              bail(TypeErrorKind::ArityOrShape, here(),
                   "duplicate orchestrator for '" + k + "'");
            orch = item->orch();
          } else {
            rest_items.push_back(item);
          }
        }
        ChanEnv inner = cenv;
        inner.bound.erase(k);
        IDelta d;
        for (const auto& item : rest_items) {
          IDelta di = infer(gamma, inner, item);
          d = compose(std::move(d), di);
        }
        IKey km{k, IPolRep{false, Polarity::Minus, 0}};
        IKey kp{k, IPolRep{false, Polarity::Plus, 0}};
        if (!orch) {
          // scope restriction without an orchestrator: nothing to discharge
          if (find(d, km) || find(d, kp))
            bail(TypeErrorKind::ArityOrShape, here(),
                 "restricted channel '" + k + "' used without an orchestrator");
          path.pop_back();
          return d;
        }
        ITyRef s1 = take(d, km);
        ITyRef s2 = take(d, kp);
        obligations.push_back({orch, s1, s2, here()});
        path.pop_back();
        return d;
      }
    }
    return {};
  }

  void solve_obligations() {
    bool progress = true;
    while (progress && !obligations.empty()) {
      progress = false;
      std::vector<Obligation> pending;
      for (auto& ob : obligations) {
        size_t before = st.trail.size();
        CResult r = cres_check(st, ob.orch, ob.client, ob.server);
        if (r.r == CRes::Ok) {
          progress = true;
        } else if (r.r == CRes::Fail) {
          bail(TypeErrorKind::ComplianceFailure, ob.path,
               "orchestrator " + pretty(ob.orch) + " does not mediate " +
                   ipretty(st, ob.client) + " -| " + ipretty(st, ob.server) +
                   (r.why.empty() ? "" : " (" + r.why + ")"));
        } else {
          if (st.trail.size() > before) progress = true;  // partial bindings
          pending.push_back(ob);
        }
      }
      obligations = std::move(pending);
    }
    if (!obligations.empty())
      bail(TypeErrorKind::IncompleteTyping, obligations.front().path,
           "delegated session type cannot be determined");
  }
};

}  // namespace

TypecheckResult typecheck(const Context& gamma, const ProcRef& p, SemanticsMode mode,
                          const FunctionTable& env) {
  Checker ck;
  ck.env = &env;
  ck.mode = mode;
  Checker::IGamma g;
  for (const auto& [x, t] : gamma) g.insert_or_assign(x, IGround{false, t, 0});
  try {
    IDelta d = ck.infer(g, Checker::ChanEnv{}, p);
    ck.solve_obligations();
    Typing out;
    for (const auto& e : d.entries) {
      IPolRep pol = ck.st.pres(e.key.pol);
      if (pol.is_var)
        bail(TypeErrorKind::IncompleteTyping, "<result>",
             "polarity of '" + e.key.name + "' cannot be determined");
      auto t = to_type(ck.st, e.ty);
      if (!t)
        bail(TypeErrorKind::IncompleteTyping, "<result>",
             "type of '" + e.key.name + polarity_char(pol.p) + "' cannot be determined");
      out.insert(PolName{e.key.name, pol.p}, *t);
    }
    return TypecheckResult{std::move(out), std::nullopt};
  } catch (const TErr& te) {
    return TypecheckResult{std::nullopt, te.e};
  }
}

std::optional<GroundType> infer_receive_ground(const ProcRef& root, const Proc* recv_node,
                                               const FunctionTable& env) {
  Checker ck;
  ck.env = &env;
  ck.mode = SemanticsMode::Plain;
  ck.probe_node = recv_node;
  try {
    IDelta d = ck.infer({}, Checker::ChanEnv{}, root);
    ck.solve_obligations();
    (void)d;
  } catch (const TErr&) {
    return std::nullopt;
  }
  if (!ck.probe_result) return std::nullopt;
  IGround g = ck.st.gres(*ck.probe_result);
  if (g.is_var) return std::nullopt;
  return g.g;
}

}  // namespace ost
