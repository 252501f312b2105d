#include "ost/compliance.hpp"

#include <algorithm>
#include <set>

namespace ost {

namespace {

bool is_io(TypeKind k) {
  return k == TypeKind::InValue || k == TypeKind::OutValue || k == TypeKind::InSession ||
         k == TypeKind::OutSession;
}

// Value/session i/o prefixes match when directions are opposite and the
// exchanged sort agrees: equal ground type, or equal carried type and equal
// polarity for delegation.
bool io_heads_match(const TypeRef& client, const TypeRef& server) {
  TypeKind c = client->kind();
  TypeKind s = server->kind();
  if (c == TypeKind::InValue && s == TypeKind::OutValue)
    return client->ground() == server->ground();
  if (c == TypeKind::OutValue && s == TypeKind::InValue)
    return client->ground() == server->ground();
  if (c == TypeKind::InSession && s == TypeKind::OutSession)
    return client->carried_polarity() == server->carried_polarity() &&
           equal(client->carried(), server->carried());
  if (c == TypeKind::OutSession && s == TypeKind::InSession)
    return client->carried_polarity() == server->carried_polarity() &&
           equal(client->carried(), server->carried());
  return false;
}

std::set<std::string> label_set(const std::vector<TypeArm>& arms) {
  std::set<std::string> s;
  for (const auto& a : arms) s.insert(a.label);
  return s;
}

bool check(const OrchRef& f, const TypeRef& client, const TypeRef& server);

// External choice over select-vs-branch (either orientation). The choice's
// arm set must equal the selection's and be covered by the branch.
bool check_external(const std::vector<OrchArm>& arms, const TypeRef& client,
                    const TypeRef& server) {
  const TypeRef* sel = nullptr;
  const TypeRef* br = nullptr;
  bool client_selects;
  if (client->kind() == TypeKind::Select && server->kind() == TypeKind::Branch) {
    sel = &client;
    br = &server;
    client_selects = true;
  } else if (client->kind() == TypeKind::Branch && server->kind() == TypeKind::Select) {
    sel = &server;
    br = &client;
    client_selects = false;
  } else {
    return false;
  }
  const auto& sel_arms = (*sel)->arms();
  if (arms.size() != sel_arms.size()) return false;
  std::set<std::string> orch_labels;
  for (const auto& a : arms) orch_labels.insert(a.label);
  if (orch_labels != label_set(sel_arms)) return false;
  for (const auto& a : arms) {
    const TypeArm* sa = (*sel)->find_arm(a.label);
    const TypeArm* ba = (*br)->find_arm(a.label);
    if (!ba) return false;  // branch must offer every selected label
    const TypeRef& c = client_selects ? sa->type : ba->type;
    const TypeRef& s = client_selects ? ba->type : sa->type;
    if (!check(a.cont, c, s)) return false;
  }
  return true;
}

// Internal choice over speculative-vs-branch (either orientation). The
// chosen arm set must be a nonempty subset of the shared labels.
bool check_internal(const std::vector<OrchArm>& arms, const TypeRef& client,
                    const TypeRef& server) {
  const TypeRef* spec = nullptr;
  const TypeRef* br = nullptr;
  bool client_speculates;
  if (client->kind() == TypeKind::SpecSelect && server->kind() == TypeKind::Branch) {
    spec = &client;
    br = &server;
    client_speculates = true;
  } else if (client->kind() == TypeKind::Branch && server->kind() == TypeKind::SpecSelect) {
    spec = &server;
    br = &client;
    client_speculates = false;
  } else {
    return false;
  }
  if (arms.empty()) return false;
  for (const auto& a : arms) {
    const TypeArm* pa = (*spec)->find_arm(a.label);
    const TypeArm* ba = (*br)->find_arm(a.label);
    if (!pa || !ba) return false;  // H subset of I and J
    const TypeRef& c = client_speculates ? pa->type : ba->type;
    const TypeRef& s = client_speculates ? ba->type : pa->type;
    if (!check(a.cont, c, s)) return false;
  }
  return true;
}

bool check(const OrchRef& f, const TypeRef& client, const TypeRef& server) {
  switch (f->kind()) {
    case OrchKind::Idle:
      return client->kind() == TypeKind::End;
    case OrchKind::IOPrefix:
      return io_heads_match(client, server) && check(f->cont(), client->cont(), server->cont());
    case OrchKind::LabelPrefix: {
      std::vector<OrchArm> one{{f->label(), f->cont()}};
      return check_external(one, client, server) || check_internal(one, client, server);
    }
    case OrchKind::ExternalChoice:
      return check_external(f->arms(), client, server);
    case OrchKind::InternalChoice:
      return check_internal(f->arms(), client, server);
  }
  return false;
}

}  // namespace

bool check_compliance(const OrchRef& f, const TypeRef& client, const TypeRef& server) {
  return check(f, client, server);
}

namespace {

bool oracle(const TypeRef& client, const TypeRef& server, int depth) {
  if (depth < 0) throw DepthExceeded();
  if (client->kind() == TypeKind::End) return true;
  if (is_io(client->kind()))
    return io_heads_match(client, server) && oracle(client->cont(), server->cont(), depth - 1);
  // select-vs-branch: every selectable arm must succeed
  const TypeRef* sel = nullptr;
  const TypeRef* br = nullptr;
  bool client_selects = false;
  if (client->kind() == TypeKind::Select && server->kind() == TypeKind::Branch) {
    sel = &client;
    br = &server;
    client_selects = true;
  } else if (client->kind() == TypeKind::Branch && server->kind() == TypeKind::Select) {
    sel = &server;
    br = &client;
  }
  if (sel) {
    for (const auto& a : (*sel)->arms()) {
      const TypeArm* ba = (*br)->find_arm(a.label);
      if (!ba) return false;
      const TypeRef& c = client_selects ? a.type : ba->type;
      const TypeRef& s = client_selects ? ba->type : a.type;
      if (!oracle(c, s, depth - 1)) return false;
    }
    return true;
  }
  // speculative-vs-branch: some shared arm must succeed
  const TypeRef* spec = nullptr;
  bool client_speculates = false;
  if (client->kind() == TypeKind::SpecSelect && server->kind() == TypeKind::Branch) {
    spec = &client;
    br = &server;
    client_speculates = true;
  } else if (client->kind() == TypeKind::Branch && server->kind() == TypeKind::SpecSelect) {
    spec = &server;
    br = &client;
  }
  if (spec) {
    for (const auto& a : (*spec)->arms()) {
      const TypeArm* ba = (*br)->find_arm(a.label);
      if (!ba) continue;
      const TypeRef& c = client_speculates ? a.type : ba->type;
      const TypeRef& s = client_speculates ? ba->type : a.type;
      if (oracle(c, s, depth - 1)) return true;
    }
    return false;
  }
  return false;
}

}  // namespace

bool oracle_compliant(const TypeRef& client, const TypeRef& server, int depth_limit) {
  return oracle(client, server, depth_limit);
}

namespace {

using Synthesizer = SynthResult (*)(const TypeRef&, const TypeRef&);

// Shared synthesis skeleton; `rec` is the algorithm used on continuations
// and `all_safe` selects the speculative-node strategy.
SynthResult synth_impl(const TypeRef& client, const TypeRef& server, Synthesizer rec,
                       bool all_safe) {
  if (client->kind() == TypeKind::End) return Orch::idle();

  if (is_io(client->kind())) {
    if (!io_heads_match(client, server)) return std::nullopt;
    SynthResult f = rec(client->cont(), server->cont());
    if (!f) return std::nullopt;
    return Orch::io_prefix(*f);
  }

  // speculative-vs-branch, scanned in the speculative list's declaration
  // (priority) order
  {
    const TypeRef* spec = nullptr;
    const TypeRef* br = nullptr;
    bool client_speculates = false;
    if (client->kind() == TypeKind::SpecSelect && server->kind() == TypeKind::Branch) {
      spec = &client;
      br = &server;
      client_speculates = true;
    } else if (client->kind() == TypeKind::Branch && server->kind() == TypeKind::SpecSelect) {
      spec = &server;
      br = &client;
    }
    if (spec) {
      std::vector<OrchArm> safe;
      for (const auto& a : (*spec)->arms()) {
        const TypeArm* ba = (*br)->find_arm(a.label);
        if (!ba) continue;
        const TypeRef& c = client_speculates ? a.type : ba->type;
        const TypeRef& s = client_speculates ? ba->type : a.type;
        SynthResult f = rec(c, s);
        if (f) {
          safe.push_back({a.label, *f});
          if (!all_safe) break;  // Synth-fst: first safe option wins
        }
      }
      if (safe.empty()) return std::nullopt;
      if (!all_safe) return Orch::label_prefix(safe[0].label, safe[0].cont);
      return Orch::internal_choice(std::move(safe));
    }
  }

  // select-vs-branch: all selected arms must synthesize
  {
    const TypeRef* sel = nullptr;
    const TypeRef* br = nullptr;
    bool client_selects = false;
    if (client->kind() == TypeKind::Select && server->kind() == TypeKind::Branch) {
      sel = &client;
      br = &server;
      client_selects = true;
    } else if (client->kind() == TypeKind::Branch && server->kind() == TypeKind::Select) {
      sel = &server;
      br = &client;
    }
    if (sel) {
      std::vector<OrchArm> arms;
      for (const auto& a : (*sel)->arms()) {
        const TypeArm* ba = (*br)->find_arm(a.label);
        if (!ba) return std::nullopt;
        const TypeRef& c = client_selects ? a.type : ba->type;
        const TypeRef& s = client_selects ? ba->type : a.type;
        SynthResult f = rec(c, s);
        if (!f) return std::nullopt;
        arms.push_back({a.label, *f});
      }
      return Orch::external_choice(std::move(arms));
    }
  }

  return std::nullopt;
}

}  // namespace

SynthResult synth(const TypeRef& client, const TypeRef& server) {
  return synth_impl(client, server, &synth, /*all_safe=*/false);
}

SynthResult synth_ud(const TypeRef& client, const TypeRef& server) {
  return synth_impl(client, server, &synth_ud, /*all_safe=*/true);
}

bool is_deterministic(const OrchRef& f) {
  switch (f->kind()) {
    case OrchKind::Idle:
      return true;
    case OrchKind::IOPrefix:
    case OrchKind::LabelPrefix:
      return is_deterministic(f->cont());
    case OrchKind::ExternalChoice: {
      for (const auto& a : f->arms())
        if (!is_deterministic(a.cont)) return false;
      return true;
    }
    case OrchKind::InternalChoice:
      return false;
  }
  return false;
}

}  // namespace ost
