#ifndef OST_PROCESS_HPP
#define OST_PROCESS_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ost/syntax.hpp"
#include "ost/value.hpp"

namespace ost {

// A channel occurrence. User-defined processes leave pol empty; run-time
// redexes carry a polarity.
struct ChannelRef {
  std::string name;
  std::optional<Polarity> pol;

  friend bool operator==(const ChannelRef& a, const ChannelRef& b) {
    return a.name == b.name && a.pol == b.pol;
  }
};

ChannelRef chan(std::string name);
ChannelRef chan(std::string name, Polarity p);

class Proc;
using ProcRef = std::shared_ptr<const Proc>;

struct ProcArm {
  std::string label;
  ProcRef proc;
};

enum class ProcKind : uint8_t {
  Inact,
  Par,
  Request,
  Accept,
  SendValue,
  RecvValue,
  Throw,
  Catch,
  SelectL,
  BranchL,
  SpecSelectP,
  If,
  NamedOrch,
  Restrict,
};

class Proc {
public:
  ProcKind kind() const { return kind_; }

  const ProcRef& left() const { return left_; }    // Par
  const ProcRef& right() const { return right_; }  // Par
  const std::string& port() const { return port_; }
  const TypeRef& session_type() const { return type_; }
  const std::string& binder() const { return binder_; }  // Request/Accept/Catch/Restrict bound name, RecvValue var
  const ChannelRef& channel() const { return chan_; }
  const ChannelRef& sent() const { return sent_; }  // Throw payload
  const ExprRef& expr() const { return expr_; }
  const ProcRef& cont() const { return cont_; }
  const std::string& label() const { return label_; }
  const std::vector<ProcArm>& arms() const { return arms_; }
  bool prioritized() const { return prioritized_; }
  const ProcRef& then_branch() const { return left_; }
  const ProcRef& else_branch() const { return right_; }
  const OrchRef& orch() const { return orch_; }
  const ProcRef& body() const { return cont_; }  // Request/Accept/Restrict

  static ProcRef inact();
  static ProcRef par(ProcRef l, ProcRef r);
  static ProcRef request(std::string port, TypeRef ty, std::string chan, ProcRef body);
  static ProcRef accept(std::string port, TypeRef ty, std::string chan, ProcRef body);
  static ProcRef send_value(ChannelRef c, ExprRef e, ProcRef cont);
  static ProcRef recv_value(ChannelRef c, std::string var, ProcRef cont);
  static ProcRef throw_chan(ChannelRef c, ChannelRef sent, ProcRef cont);
  static ProcRef catch_chan(ChannelRef c, std::string bound, ProcRef cont);
  static ProcRef select_l(ChannelRef c, std::string label, ProcRef cont);
  static ProcRef branch_l(ChannelRef c, std::vector<ProcArm> arms);
  static ProcRef spec_select(ChannelRef c, std::vector<ProcArm> arms, bool prioritized);
  static ProcRef if_then_else(ExprRef cond, ProcRef t, ProcRef e);
  static ProcRef named_orch(std::string chan, OrchRef f);
  static ProcRef restrict(std::string chan, ProcRef body);

  const ProcArm* find_arm(const std::string& label) const;

private:
  explicit Proc(ProcKind k) : kind_(k) {}

  ProcKind kind_;
  ProcRef left_, right_;
  std::string port_;
  TypeRef type_;
  std::string binder_;
  ChannelRef chan_;
  ChannelRef sent_;
  ExprRef expr_;
  ProcRef cont_;
  std::string label_;
  std::vector<ProcArm> arms_;
  bool prioritized_ = false;
  OrchRef orch_;
};

bool equal(const ProcRef& a, const ProcRef& b);

// Channel names occurring free, at any polarity.
std::set<std::string> free_channels(const ProcRef& p);

// Capture-avoiding substitution of a (possibly polarized) channel for every
// free unpolarized occurrence of `from`.
ProcRef subst_channel(const ProcRef& p, const std::string& from, const ChannelRef& to);

// Capture-avoiding substitution of a value for a free expression variable.
ProcRef subst_value(const ProcRef& p, const std::string& var, const Value& v);

// True iff p contains no named orchestrator, no restriction and no polarized
// channel occurrence.
bool is_user_defined(const ProcRef& p);

// Flattens a parallel composition into its component list.
std::vector<ProcRef> flatten_par(const ProcRef& p);
// Rebuilds a parallel composition (left-associated); empty list is inaction.
ProcRef rebuild_par(const std::vector<ProcRef>& items);

// Renames every occurrence (free, any polarity, including binders' uses) of
// channels per `map`, stopping at shadowing binders. Used by alpha machinery.
ProcRef rename_free_channels(const ProcRef& p, const std::map<std::string, std::string>& map);

}  // namespace ost

#endif
