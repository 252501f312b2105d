#include "ost/pretty.hpp"

#include <sstream>

namespace ost {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string chan_str(const ChannelRef& c) {
  std::string s = c.name;
  if (c.pol) s += polarity_char(*c.pol);
  return s;
}

void print_type(std::ostream& os, const TypeRef& t) {
  switch (t->kind()) {
    case TypeKind::End:
      os << "end";
      return;
    case TypeKind::InValue:
    case TypeKind::OutValue:
      os << (t->kind() == TypeKind::InValue ? '?' : '!') << t->ground().name() << '.';
      print_type(os, t->cont());
      return;
    case TypeKind::InSession:
    case TypeKind::OutSession:
      os << (t->kind() == TypeKind::InSession ? '?' : '!') << '(';
      print_type(os, t->carried());
      os << polarity_char(t->carried_polarity()) << ").";
      print_type(os, t->cont());
      return;
    case TypeKind::Branch:
    case TypeKind::Select:
    case TypeKind::SpecSelect: {
      const char* open = "{";
      const char* close = "}";
      if (t->kind() == TypeKind::Branch) {
        os << '&';
      } else if (t->kind() == TypeKind::Select) {
        os << '+';
      } else {
        os << "spec";
        if (t->prioritized()) {
          open = "<<";
          close = ">>";
        }
      }
      os << open;
      bool first = true;
      for (const auto& a : t->arms()) {
        if (!first) os << ", ";
        first = false;
        os << a.label << ':';
        print_type(os, a.type);
      }
      os << close;
      return;
    }
  }
}

void print_orch(std::ostream& os, const OrchRef& f, bool paren_choice);

void print_orch_cont(std::ostream& os, const OrchRef& cont) {
  if (cont->kind() == OrchKind::Idle) return;  // trailing idle elided
  os << '.';
  print_orch(os, cont, /*paren_choice=*/true);
}

void print_orch(std::ostream& os, const OrchRef& f, bool paren_choice) {
  switch (f->kind()) {
    case OrchKind::Idle:
      os << '1';
      return;
    case OrchKind::IOPrefix:
      os << '*';
      print_orch_cont(os, f->cont());
      return;
    case OrchKind::LabelPrefix:
      os << f->label();
      print_orch_cont(os, f->cont());
      return;
    case OrchKind::ExternalChoice:
    case OrchKind::InternalChoice: {
      const char* sep = f->kind() == OrchKind::ExternalChoice ? " + " : " (+) ";
      if (paren_choice) os << '(';
      bool first = true;
      for (const auto& a : f->arms()) {
        if (!first) os << sep;
        first = false;
        os << a.label;
        print_orch_cont(os, a.cont);
      }
      if (paren_choice) os << ')';
      return;
    }
  }
}

void print_expr(std::ostream& os, const ExprRef& e);

void print_value(std::ostream& os, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Nat:
      os << v.nat_value();
      return;
    case ValueKind::Bool:
      os << (v.bool_value() ? "true" : "false");
      return;
    case ValueKind::Str:
      os << quote(v.str_value());
      return;
    case ValueKind::Sym: {
      os << v.sym_tag() << '(';
      bool first = true;
      for (const auto& a : v.sym_args()) {
        if (!first) os << ", ";
        first = false;
        print_value(os, a);
      }
      os << ')';
      return;
    }
  }
}

void print_expr(std::ostream& os, const ExprRef& e) {
  switch (e->kind()) {
    case ExprKind::Lit:
      print_value(os, e->value());
      return;
    case ExprKind::Var:
      os << e->name();
      return;
    case ExprKind::Apply: {
      os << e->name() << '(';
      bool first = true;
      for (const auto& a : e->args()) {
        if (!first) os << ", ";
        first = false;
        print_expr(os, a);
      }
      os << ')';
      return;
    }
  }
}

void print_proc(std::ostream& os, const ProcRef& p);

// Continuations after a prefix parse as a single component; parallels are
// parenthesized.
void print_cont(std::ostream& os, const ProcRef& p) {
  if (p->kind() == ProcKind::Par) {
    os << '(';
    print_proc(os, p);
    os << ')';
  } else {
    print_proc(os, p);
  }
}

void print_proc(std::ostream& os, const ProcRef& p) {
  switch (p->kind()) {
    case ProcKind::Inact:
      os << '0';
      return;
    case ProcKind::Par:
      print_proc(os, p->left());
      os << " | ";
      if (p->right()->kind() == ProcKind::Par) {
        os << '(';
        print_proc(os, p->right());
        os << ')';
      } else {
        print_proc(os, p->right());
      }
      return;
    case ProcKind::Request:
    case ProcKind::Accept:
      os << (p->kind() == ProcKind::Request ? "request " : "accept ");
      os << (p->port().empty() ? "_" : p->port()) << ":(";
      print_type(os, p->session_type());
      os << ")(" << p->binder() << ").";
      print_cont(os, p->body());
      return;
    case ProcKind::SendValue:
      os << chan_str(p->channel()) << "!<";
      print_expr(os, p->expr());
      os << ">.";
      print_cont(os, p->cont());
      return;
    case ProcKind::RecvValue:
      os << chan_str(p->channel()) << "?(" << p->binder() << ").";
      print_cont(os, p->cont());
      return;
    case ProcKind::Throw:
      os << chan_str(p->channel()) << "!<<" << chan_str(p->sent()) << ">>.";
      print_cont(os, p->cont());
      return;
    case ProcKind::Catch:
      os << chan_str(p->channel()) << "?((" << p->binder() << ")).";
      print_cont(os, p->cont());
      return;
    case ProcKind::SelectL:
      os << chan_str(p->channel()) << "<|" << p->label() << '.';
      print_cont(os, p->cont());
      return;
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      os << chan_str(p->channel());
      const char* open = "{";
      const char* close = "}";
      if (p->kind() == ProcKind::BranchL) {
        os << "|>";
      } else {
        os << " spec";
        if (p->prioritized()) {
          open = "<<";
          close = ">>";
        }
      }
      os << open;
      bool first = true;
      for (const auto& a : p->arms()) {
        if (!first) os << ", ";
        first = false;
        os << a.label << ':';
        print_proc(os, a.proc);
      }
      os << close;
      return;
    }
    case ProcKind::If:
      os << "if ";
      print_expr(os, p->expr());
      os << " then (";
      print_proc(os, p->then_branch());
      os << ") else (";
      print_proc(os, p->else_branch());
      os << ')';
      return;
    case ProcKind::NamedOrch:
      os << "orch " << p->binder() << '{';
      print_orch(os, p->orch(), /*paren_choice=*/false);
      os << '}';
      return;
    case ProcKind::Restrict:
      os << "(new " << p->binder() << ")(";
      print_proc(os, p->body());
      os << ')';
      return;
  }
}

}  // namespace

std::string pretty(const TypeRef& t) {
  std::ostringstream os;
  print_type(os, t);
  return os.str();
}

std::string pretty(const OrchRef& f) {
  std::ostringstream os;
  print_orch(os, f, /*paren_choice=*/false);
  return os.str();
}

std::string pretty(const ProcRef& p) {
  std::ostringstream os;
  print_proc(os, p);
  return os.str();
}

std::string pretty(const ExprRef& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string pretty(const Value& v) {
  std::ostringstream os;
  print_value(os, v);
  return os.str();
}

std::string pretty(const Typing& d) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [k, t] : d.entries()) {
    if (!first) os << ", ";
    first = false;
    os << to_string(k) << ": ";
    print_type(os, t);
  }
  os << '}';
  return os.str();
}

uint64_t state_hash(const ProcRef& canonical) {
  const std::string s = pretty(canonical);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ost
