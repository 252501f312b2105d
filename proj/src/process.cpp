#include "ost/process.hpp"

#include <atomic>

namespace ost {

ChannelRef chan(std::string name) { return ChannelRef{std::move(name), std::nullopt}; }
ChannelRef chan(std::string name, Polarity p) { return ChannelRef{std::move(name), p}; }

namespace {

void check_proc_arms(const std::vector<ProcArm>& arms, const char* what) {
  if (arms.empty()) throw ConstructionError(std::string(what) + ": arm list must be nonempty");
  std::set<std::string> seen;
  for (const auto& a : arms) {
    if (a.label.empty()) throw ConstructionError(std::string(what) + ": empty label");
    if (!a.proc) throw ConstructionError(std::string(what) + ": null arm");
    if (!seen.insert(a.label).second)
      throw ConstructionError(std::string(what) + ": duplicate label '" + a.label + "'");
  }
}

void check_name(const std::string& s, const char* what) {
  if (s.empty()) throw ConstructionError(std::string(what) + ": empty name");
}

std::string fresh_name(const std::string& base) {
  static std::atomic<uint64_t> counter{0};
  return base + "'" + std::to_string(counter.fetch_add(1));
}

}  // namespace

ProcRef Proc::inact() {
  static const ProcRef z = ProcRef(new Proc(ProcKind::Inact));
  return z;
}

ProcRef Proc::par(ProcRef l, ProcRef r) {
  if (!l || !r) throw ConstructionError("parallel: null component");
  auto p = new Proc(ProcKind::Par);
  p->left_ = std::move(l);
  p->right_ = std::move(r);
  return ProcRef(p);
}

ProcRef Proc::request(std::string port, TypeRef ty, std::string chan, ProcRef body) {
  check_name(chan, "request");
  if (!ty || !body) throw ConstructionError("request: null component");
  auto p = new Proc(ProcKind::Request);
  p->port_ = std::move(port);
  p->type_ = std::move(ty);
  p->binder_ = std::move(chan);
  p->cont_ = std::move(body);
  return ProcRef(p);
}

ProcRef Proc::accept(std::string port, TypeRef ty, std::string chan, ProcRef body) {
  check_name(chan, "accept");
  if (!ty || !body) throw ConstructionError("accept: null component");
  auto p = new Proc(ProcKind::Accept);
  p->port_ = std::move(port);
  p->type_ = std::move(ty);
  p->binder_ = std::move(chan);
  p->cont_ = std::move(body);
  return ProcRef(p);
}

ProcRef Proc::send_value(ChannelRef c, ExprRef e, ProcRef cont) {
  check_name(c.name, "send");
  if (!e || !cont) throw ConstructionError("send: null component");
  auto p = new Proc(ProcKind::SendValue);
  p->chan_ = std::move(c);
  p->expr_ = std::move(e);
  p->cont_ = std::move(cont);
  return ProcRef(p);
}

ProcRef Proc::recv_value(ChannelRef c, std::string var, ProcRef cont) {
  check_name(c.name, "receive");
  check_name(var, "receive variable");
  if (!cont) throw ConstructionError("receive: null continuation");
  auto p = new Proc(ProcKind::RecvValue);
  p->chan_ = std::move(c);
  p->binder_ = std::move(var);
  p->cont_ = std::move(cont);
  return ProcRef(p);
}

ProcRef Proc::throw_chan(ChannelRef c, ChannelRef sent, ProcRef cont) {
  check_name(c.name, "throw");
  check_name(sent.name, "throw payload");
  if (!cont) throw ConstructionError("throw: null continuation");
  auto p = new Proc(ProcKind::Throw);
  p->chan_ = std::move(c);
  p->sent_ = std::move(sent);
  p->cont_ = std::move(cont);
  return ProcRef(p);
}

ProcRef Proc::catch_chan(ChannelRef c, std::string bound, ProcRef cont) {
  check_name(c.name, "catch");
  check_name(bound, "catch binder");
  if (!cont) throw ConstructionError("catch: null continuation");
  auto p = new Proc(ProcKind::Catch);
  p->chan_ = std::move(c);
  p->binder_ = std::move(bound);
  p->cont_ = std::move(cont);
  return ProcRef(p);
}

ProcRef Proc::select_l(ChannelRef c, std::string label, ProcRef cont) {
  check_name(c.name, "select");
  check_name(label, "select label");
  if (!cont) throw ConstructionError("select: null continuation");
  auto p = new Proc(ProcKind::SelectL);
  p->chan_ = std::move(c);
  p->label_ = std::move(label);
  p->cont_ = std::move(cont);
  return ProcRef(p);
}

ProcRef Proc::branch_l(ChannelRef c, std::vector<ProcArm> arms) {
  check_name(c.name, "branch");
  check_proc_arms(arms, "branch");
  auto p = new Proc(ProcKind::BranchL);
  p->chan_ = std::move(c);
  p->arms_ = std::move(arms);
  return ProcRef(p);
}

ProcRef Proc::spec_select(ChannelRef c, std::vector<ProcArm> arms, bool prioritized) {
  check_name(c.name, "speculative select");
  check_proc_arms(arms, "speculative select");
  auto p = new Proc(ProcKind::SpecSelectP);
  p->chan_ = std::move(c);
  p->arms_ = std::move(arms);
  p->prioritized_ = prioritized;
  return ProcRef(p);
}

ProcRef Proc::if_then_else(ExprRef cond, ProcRef t, ProcRef e) {
  if (!cond || !t || !e) throw ConstructionError("conditional: null component");
  auto p = new Proc(ProcKind::If);
  p->expr_ = std::move(cond);
  p->left_ = std::move(t);
  p->right_ = std::move(e);
  return ProcRef(p);
}

ProcRef Proc::named_orch(std::string chan, OrchRef f) {
  check_name(chan, "orchestrator");
  if (!f) throw ConstructionError("orchestrator: null body");
  auto p = new Proc(ProcKind::NamedOrch);
  p->binder_ = std::move(chan);
  p->orch_ = std::move(f);
  return ProcRef(p);
}

ProcRef Proc::restrict(std::string chan, ProcRef body) {
  check_name(chan, "restriction");
  if (!body) throw ConstructionError("restriction: null body");
  auto p = new Proc(ProcKind::Restrict);
  p->binder_ = std::move(chan);
  p->cont_ = std::move(body);
  return ProcRef(p);
}

const ProcArm* Proc::find_arm(const std::string& label) const {
  for (const auto& a : arms_)
    if (a.label == label) return &a;
  return nullptr;
}

bool equal(const ProcRef& a, const ProcRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case ProcKind::Inact:
      return true;
    case ProcKind::Par:
      return equal(a->left(), b->left()) && equal(a->right(), b->right());
    case ProcKind::Request:
    case ProcKind::Accept:
      return a->port() == b->port() && equal(a->session_type(), b->session_type()) &&
             a->binder() == b->binder() && equal(a->body(), b->body());
    case ProcKind::SendValue:
      return a->channel() == b->channel() && equal(a->expr(), b->expr()) &&
             equal(a->cont(), b->cont());
    case ProcKind::RecvValue:
      return a->channel() == b->channel() && a->binder() == b->binder() &&
             equal(a->cont(), b->cont());
    case ProcKind::Throw:
      return a->channel() == b->channel() && a->sent() == b->sent() &&
             equal(a->cont(), b->cont());
    case ProcKind::Catch:
      return a->channel() == b->channel() && a->binder() == b->binder() &&
             equal(a->cont(), b->cont());
    case ProcKind::SelectL:
      return a->channel() == b->channel() && a->label() == b->label() &&
             equal(a->cont(), b->cont());
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      if (!(a->channel() == b->channel())) return false;
      if (a->kind() == ProcKind::SpecSelectP && a->prioritized() != b->prioritized())
        return false;
      if (a->arms().size() != b->arms().size()) return false;
      for (size_t i = 0; i < a->arms().size(); ++i)
        if (a->arms()[i].label != b->arms()[i].label ||
            !equal(a->arms()[i].proc, b->arms()[i].proc))
          return false;
      return true;
    }
    case ProcKind::If:
      return equal(a->expr(), b->expr()) && equal(a->then_branch(), b->then_branch()) &&
             equal(a->else_branch(), b->else_branch());
    case ProcKind::NamedOrch:
      return a->binder() == b->binder() && equal(a->orch(), b->orch());
    case ProcKind::Restrict:
      return a->binder() == b->binder() && equal(a->body(), b->body());
  }
  return false;
}

namespace {

void collect_free(const ProcRef& p, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (p->kind()) {
    case ProcKind::Inact:
      return;
    case ProcKind::Par:
      collect_free(p->left(), bound, out);
      collect_free(p->right(), bound, out);
      return;
    case ProcKind::Request:
    case ProcKind::Accept: {
      bool inserted = bound.insert(p->binder()).second;
      collect_free(p->body(), bound, out);
      if (inserted) bound.erase(p->binder());
      return;
    }
    case ProcKind::SendValue:
    case ProcKind::RecvValue:
    case ProcKind::SelectL:
      if (!bound.count(p->channel().name)) out.insert(p->channel().name);
      collect_free(p->cont(), bound, out);
      return;
    case ProcKind::Throw:
      if (!bound.count(p->channel().name)) out.insert(p->channel().name);
      if (!bound.count(p->sent().name)) out.insert(p->sent().name);
      collect_free(p->cont(), bound, out);
      return;
    case ProcKind::Catch: {
      if (!bound.count(p->channel().name)) out.insert(p->channel().name);
      bool inserted = bound.insert(p->binder()).second;
      collect_free(p->cont(), bound, out);
      if (inserted) bound.erase(p->binder());
      return;
    }
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP:
      if (!bound.count(p->channel().name)) out.insert(p->channel().name);
      for (const auto& a : p->arms()) collect_free(a.proc, bound, out);
      return;
    case ProcKind::If:
      collect_free(p->then_branch(), bound, out);
      collect_free(p->else_branch(), bound, out);
      return;
    case ProcKind::NamedOrch:
      if (!bound.count(p->binder())) out.insert(p->binder());
      return;
    case ProcKind::Restrict: {
      bool inserted = bound.insert(p->binder()).second;
      collect_free(p->body(), bound, out);
      if (inserted) bound.erase(p->binder());
      return;
    }
  }
}

}  // namespace

std::set<std::string> free_channels(const ProcRef& p) {
  std::set<std::string> bound, out;
  collect_free(p, bound, out);
  return out;
}

namespace {

ProcRef rename_walk(const ProcRef& p, std::map<std::string, std::string> map);

ProcRef subst_chan_walk(const ProcRef& p, const std::string& from, const ChannelRef& to) {
  auto hit = [&](const ChannelRef& c) -> ChannelRef {
    if (!c.pol.has_value() && c.name == from) return to;
    return c;
  };
  // Renames a binder out of the way when it would capture the replacement.
  auto under_binder = [&](const std::string& binder, const ProcRef& body,
                          auto rebuild) -> ProcRef {
    if (binder == from) return rebuild(binder, body);  // shadowed
    if (binder == to.name) {
      std::string nb = fresh_name(binder);
      ProcRef renamed = rename_walk(body, {{binder, nb}});
      return rebuild(nb, subst_chan_walk(renamed, from, to));
    }
    return rebuild(binder, subst_chan_walk(body, from, to));
  };
  switch (p->kind()) {
    case ProcKind::Inact:
      return p;
    case ProcKind::Par:
      return Proc::par(subst_chan_walk(p->left(), from, to),
                       subst_chan_walk(p->right(), from, to));
    case ProcKind::Request:
      return under_binder(p->binder(), p->body(), [&](const std::string& b, const ProcRef& body) {
        return Proc::request(p->port(), p->session_type(), b, body);
      });
    case ProcKind::Accept:
      return under_binder(p->binder(), p->body(), [&](const std::string& b, const ProcRef& body) {
        return Proc::accept(p->port(), p->session_type(), b, body);
      });
    case ProcKind::SendValue:
      return Proc::send_value(hit(p->channel()), p->expr(), subst_chan_walk(p->cont(), from, to));
    case ProcKind::RecvValue:
      return Proc::recv_value(hit(p->channel()), p->binder(),
                              subst_chan_walk(p->cont(), from, to));
    case ProcKind::Throw:
      return Proc::throw_chan(hit(p->channel()), hit(p->sent()),
                              subst_chan_walk(p->cont(), from, to));
    case ProcKind::Catch: {
      ChannelRef c = hit(p->channel());
      return under_binder(p->binder(), p->cont(), [&](const std::string& b, const ProcRef& body) {
        return Proc::catch_chan(c, b, body);
      });
    }
    case ProcKind::SelectL:
      return Proc::select_l(hit(p->channel()), p->label(), subst_chan_walk(p->cont(), from, to));
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      std::vector<ProcArm> arms;
      arms.reserve(p->arms().size());
      for (const auto& a : p->arms()) arms.push_back({a.label, subst_chan_walk(a.proc, from, to)});
      if (p->kind() == ProcKind::BranchL) return Proc::branch_l(hit(p->channel()), std::move(arms));
      return Proc::spec_select(hit(p->channel()), std::move(arms), p->prioritized());
    }
    case ProcKind::If:
      return Proc::if_then_else(p->expr(), subst_chan_walk(p->then_branch(), from, to),
                                subst_chan_walk(p->else_branch(), from, to));
    case ProcKind::NamedOrch:
      // A bare name position takes the replacement's name.
      return p->binder() == from ? Proc::named_orch(to.name, p->orch()) : p;
    case ProcKind::Restrict:
      return under_binder(p->binder(), p->body(), [&](const std::string& b, const ProcRef& body) {
        return Proc::restrict(b, body);
      });
  }
  return p;
}

ProcRef rename_walk(const ProcRef& p, std::map<std::string, std::string> map) {
  if (map.empty()) return p;
  auto hit = [&](const ChannelRef& c) -> ChannelRef {
    auto it = map.find(c.name);
    if (it == map.end()) return c;
    return ChannelRef{it->second, c.pol};
  };
  auto hit_name = [&](const std::string& n) -> std::string {
    auto it = map.find(n);
    return it == map.end() ? n : it->second;
  };
  auto under_binder = [&](const std::string& binder, const ProcRef& body,
                          auto rebuild) -> ProcRef {
    auto inner = map;
    inner.erase(binder);  // shadowed key stops
    bool capture = false;
    for (const auto& [k, v] : inner)
      if (v == binder) capture = true;
    if (capture) {
      std::string nb = fresh_name(binder);
      ProcRef renamed = rename_walk(body, {{binder, nb}});
      return rebuild(nb, rename_walk(renamed, inner));
    }
    return rebuild(binder, rename_walk(body, inner));
  };
  switch (p->kind()) {
    case ProcKind::Inact:
      return p;
    case ProcKind::Par:
      return Proc::par(rename_walk(p->left(), map), rename_walk(p->right(), map));
    case ProcKind::Request:
      return under_binder(p->binder(), p->body(), [&](const std::string& b, const ProcRef& body) {
        return Proc::request(p->port(), p->session_type(), b, body);
      });
    case ProcKind::Accept:
      return under_binder(p->binder(), p->body(), [&](const std::string& b, const ProcRef& body) {
        return Proc::accept(p->port(), p->session_type(), b, body);
      });
    case ProcKind::SendValue:
      return Proc::send_value(hit(p->channel()), p->expr(), rename_walk(p->cont(), map));
    case ProcKind::RecvValue:
      return Proc::recv_value(hit(p->channel()), p->binder(), rename_walk(p->cont(), map));
    case ProcKind::Throw:
      return Proc::throw_chan(hit(p->channel()), hit(p->sent()), rename_walk(p->cont(), map));
    case ProcKind::Catch: {
      ChannelRef c = hit(p->channel());
      return under_binder(p->binder(), p->cont(), [&](const std::string& b, const ProcRef& body) {
        return Proc::catch_chan(c, b, body);
      });
    }
    case ProcKind::SelectL:
      return Proc::select_l(hit(p->channel()), p->label(), rename_walk(p->cont(), map));
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      std::vector<ProcArm> arms;
      arms.reserve(p->arms().size());
      for (const auto& a : p->arms()) arms.push_back({a.label, rename_walk(a.proc, map)});
      if (p->kind() == ProcKind::BranchL) return Proc::branch_l(hit(p->channel()), std::move(arms));
      return Proc::spec_select(hit(p->channel()), std::move(arms), p->prioritized());
    }
    case ProcKind::If:
      return Proc::if_then_else(p->expr(), rename_walk(p->then_branch(), map),
                                rename_walk(p->else_branch(), map));
    case ProcKind::NamedOrch:
      return Proc::named_orch(hit_name(p->binder()), p->orch());
    case ProcKind::Restrict:
      return under_binder(p->binder(), p->body(), [&](const std::string& b, const ProcRef& body) {
        return Proc::restrict(b, body);
      });
  }
  return p;
}

}  // namespace

ProcRef subst_channel(const ProcRef& p, const std::string& from, const ChannelRef& to) {
  return subst_chan_walk(p, from, to);
}

ProcRef rename_free_channels(const ProcRef& p, const std::map<std::string, std::string>& map) {
  return rename_walk(p, map);
}

ProcRef subst_value(const ProcRef& p, const std::string& var, const Value& v) {
  switch (p->kind()) {
    case ProcKind::Inact:
      return p;
    case ProcKind::Par:
      return Proc::par(subst_value(p->left(), var, v), subst_value(p->right(), var, v));
    case ProcKind::Request:
      return Proc::request(p->port(), p->session_type(), p->binder(),
                           subst_value(p->body(), var, v));
    case ProcKind::Accept:
      return Proc::accept(p->port(), p->session_type(), p->binder(),
                          subst_value(p->body(), var, v));
    case ProcKind::SendValue:
      return Proc::send_value(p->channel(), subst_expr(p->expr(), var, v),
                              subst_value(p->cont(), var, v));
    case ProcKind::RecvValue:
      if (p->binder() == var) return p;  // rebound
      return Proc::recv_value(p->channel(), p->binder(), subst_value(p->cont(), var, v));
    case ProcKind::Throw:
      return Proc::throw_chan(p->channel(), p->sent(), subst_value(p->cont(), var, v));
    case ProcKind::Catch:
      return Proc::catch_chan(p->channel(), p->binder(), subst_value(p->cont(), var, v));
    case ProcKind::SelectL:
      return Proc::select_l(p->channel(), p->label(), subst_value(p->cont(), var, v));
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      std::vector<ProcArm> arms;
      arms.reserve(p->arms().size());
      for (const auto& a : p->arms()) arms.push_back({a.label, subst_value(a.proc, var, v)});
      if (p->kind() == ProcKind::BranchL) return Proc::branch_l(p->channel(), std::move(arms));
      return Proc::spec_select(p->channel(), std::move(arms), p->prioritized());
    }
    case ProcKind::If:
      return Proc::if_then_else(subst_expr(p->expr(), var, v),
                                subst_value(p->then_branch(), var, v),
                                subst_value(p->else_branch(), var, v));
    case ProcKind::NamedOrch:
      return p;
    case ProcKind::Restrict:
      return Proc::restrict(p->binder(), subst_value(p->body(), var, v));
  }
  return p;
}

bool is_user_defined(const ProcRef& p) {
  switch (p->kind()) {
    case ProcKind::Inact:
      return true;
    case ProcKind::Par:
      return is_user_defined(p->left()) && is_user_defined(p->right());
    case ProcKind::Request:
    case ProcKind::Accept:
      return is_user_defined(p->body());
    case ProcKind::SendValue:
    case ProcKind::RecvValue:
    case ProcKind::SelectL:
      return !p->channel().pol.has_value() && is_user_defined(p->cont());
    case ProcKind::Throw:
      return !p->channel().pol.has_value() && !p->sent().pol.has_value() &&
             is_user_defined(p->cont());
    case ProcKind::Catch:
      return !p->channel().pol.has_value() && is_user_defined(p->cont());
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      if (p->channel().pol.has_value()) return false;
      for (const auto& a : p->arms())
        if (!is_user_defined(a.proc)) return false;
      return true;
    }
    case ProcKind::If:
      return is_user_defined(p->then_branch()) && is_user_defined(p->else_branch());
    case ProcKind::NamedOrch:
    case ProcKind::Restrict:
      return false;
  }
  return false;
}

std::vector<ProcRef> flatten_par(const ProcRef& p) {
  std::vector<ProcRef> out;
  std::vector<ProcRef> stack{p};
  while (!stack.empty()) {
    ProcRef cur = stack.back();
    stack.pop_back();
    if (cur->kind() == ProcKind::Par) {
      stack.push_back(cur->right());
      stack.push_back(cur->left());
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

ProcRef rebuild_par(const std::vector<ProcRef>& items) {
  if (items.empty()) return Proc::inact();
  ProcRef acc = items[0];
  for (size_t i = 1; i < items.size(); ++i) acc = Proc::par(acc, items[i]);
  return acc;
}

}  // namespace ost
