#include "ost/parser.hpp"

#include <cctype>

namespace ost {

std::string to_string(const SourceSpan& s) {
  return s.file + ":" + std::to_string(s.line) + ":" + std::to_string(s.col);
}

const TypeRef* Module::find_type(const std::string& name) const {
  auto it = types.find(name);
  return it == types.end() ? nullptr : &it->second;
}
const OrchRef* Module::find_orch(const std::string& name) const {
  auto it = orchs.find(name);
  return it == orchs.end() ? nullptr : &it->second;
}
const ProcRef* Module::find_proc(const std::string& name) const {
  auto it = procs.find(name);
  return it == procs.end() ? nullptr : &it->second;
}

namespace {

std::runtime_error missing(const std::string& sort, const std::string& name) {
  return std::runtime_error("no " + sort + " binding" + (name.empty() ? "" : " '" + name + "'"));
}

}  // namespace

TypeRef Module::type_binding(const std::string& name) const {
  if (!name.empty()) {
    const TypeRef* t = find_type(name);
    if (!t) throw missing("type", name);
    return *t;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (it->second == 't') return types.at(it->first);
  throw missing("type", name);
}

OrchRef Module::orch_binding(const std::string& name) const {
  if (!name.empty()) {
    const OrchRef* f = find_orch(name);
    if (!f) throw missing("orchestrator", name);
    return *f;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (it->second == 'o') return orchs.at(it->first);
  throw missing("orchestrator", name);
}

ProcRef Module::proc_binding(const std::string& name) const {
  if (!name.empty()) {
    const ProcRef* p = find_proc(name);
    if (!p) throw missing("process", name);
    return *p;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (it->second == 'p') return procs.at(it->first);
  throw missing("process", name);
}

namespace {

enum class Tok : uint8_t {
  Ident, Nat, Str,
  LParen, RParen, LBrace, RBrace,
  LAngle2, RAngle2,   // << >>
  LAngle, RAngle,     // < >
  SelArrow, BrArrow,  // <| |>
  OPlus,              // (+)
  Bar, Plus, Minus, Star, Dot, Comma, Colon, Eq, Bang, Query, Amp,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  uint64_t nat = 0;
  int line = 1, col = 1;
  size_t begin = 0, end = 0;  // byte offsets, for adjacency checks
};

struct Lexer {
  const std::string& src;
  std::string file;
  std::vector<Token> toks;

  Lexer(const std::string& s, std::string f) : src(s), file(std::move(f)) { lex(); }

  [[noreturn]] void fail(int line, int col, const std::string& msg) {
    SourceSpan sp{file, line, col, line, col};
    throw ParseError(sp, msg);
  }

  void lex() {
    size_t i = 0;
    int line = 1, col = 1;
    auto push = [&](Tok k, size_t b, size_t e, std::string text, uint64_t n = 0) {
      Token t;
      t.kind = k;
      t.text = std::move(text);
      t.nat = n;
      t.line = line;
      t.col = col - int(e - b);
      t.begin = b;
      t.end = e;
      toks.push_back(std::move(t));
    };
    while (i < src.size()) {
      char c = src[i];
      if (c == '\n') {
        ++i;
        ++line;
        col = 1;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        ++col;
        continue;
      }
      if (c == '#') {
        while (i < src.size() && src[i] != '\n') ++i;
        continue;
      }
      size_t b = i;
      if (std::isdigit(static_cast<unsigned char>(c))) {
        uint64_t n = 0;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
          n = n * 10 + (src[i] - '0');
          ++i;
          ++col;
        }
        push(Tok::Nat, b, i, src.substr(b, i - b), n);
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
          ++i;
          ++col;
        }
        push(Tok::Ident, b, i, src.substr(b, i - b));
        continue;
      }
      if (c == '"') {
        ++i;
        ++col;
        std::string s;
        while (i < src.size() && src[i] != '"') {
          if (src[i] == '\\' && i + 1 < src.size()) {
            char n = src[i + 1];
            s += (n == 'n') ? '\n' : (n == 't') ? '\t' : n;
            i += 2;
            col += 2;
          } else {
            if (src[i] == '\n') fail(line, col, "unterminated string");
            s += src[i];
            ++i;
            ++col;
          }
        }
        if (i >= src.size()) fail(line, col, "unterminated string");
        ++i;
        ++col;
        push(Tok::Str, b, i, std::move(s));
        continue;
      }
      auto two = [&](char a, char d) { return c == a && i + 1 < src.size() && src[i + 1] == d; };
      if (c == '(' && i + 2 < src.size() && src[i + 1] == '+' && src[i + 2] == ')') {
        i += 3;
        col += 3;
        push(Tok::OPlus, b, i, "(+)");
        continue;
      }
      if (two('<', '<')) { i += 2; col += 2; push(Tok::LAngle2, b, i, "<<"); continue; }
      if (two('>', '>')) { i += 2; col += 2; push(Tok::RAngle2, b, i, ">>"); continue; }
      if (two('<', '|')) { i += 2; col += 2; push(Tok::SelArrow, b, i, "<|"); continue; }
      if (two('|', '>')) { i += 2; col += 2; push(Tok::BrArrow, b, i, "|>"); continue; }
      Tok k;
      switch (c) {
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case '{': k = Tok::LBrace; break;
        case '}': k = Tok::RBrace; break;
        case '<': k = Tok::LAngle; break;
        case '>': k = Tok::RAngle; break;
        case '|': k = Tok::Bar; break;
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '.': k = Tok::Dot; break;
        case ',': k = Tok::Comma; break;
        case ':': k = Tok::Colon; break;
        case '=': k = Tok::Eq; break;
        case '!': k = Tok::Bang; break;
        case '?': k = Tok::Query; break;
        case '&': k = Tok::Amp; break;
        default:
          fail(line, col, std::string("unexpected character '") + c + "'");
      }
      ++i;
      ++col;
      push(k, b, i, std::string(1, c));
    }
    Token eof;
    eof.kind = Tok::End;
    eof.line = line;
    eof.col = col;
    eof.begin = eof.end = src.size();
    toks.push_back(eof);
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  std::string file;
  const GroundRegistry* registry;
  Module* env;  // bindings visible so far

  Parser(const std::string& text, std::string f, const GroundRegistry& reg, Module* e)
      : file(std::move(f)), registry(&reg), env(e) {
    Lexer lx(text, file);
    toks = std::move(lx.toks);
  }

  const Token& peek(size_t k = 0) const {
    size_t i = pos + k;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& cur() const { return peek(0); }
  Token next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_kw(const char* kw) const { return cur().kind == Tok::Ident && cur().text == kw; }

  SourceSpan span_here() const {
    const Token& t = cur();
    return SourceSpan{file, t.line, t.col, t.line, t.col + int(t.end - t.begin)};
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(span_here(), msg); }

  Token expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what + ", found '" + cur().text + "'");
    return next();
  }

  std::string expect_ident(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what + ", found '" + cur().text + "'");
    return next().text;
  }

  bool adjacent_next() const {
    // true when the next token starts exactly where the current one ends
    return peek(1).begin == cur().end;
  }

  // ---- types -------------------------------------------------------------

  bool is_keyword(const std::string& s) const {
    static const std::set<std::string> kws{"let",  "request", "accept", "if",   "then",
                                           "else", "true",    "false",  "spec", "orch",
                                           "new",  "end"};
    return kws.count(s) > 0;
  }

  std::vector<TypeArm> type_arms(Tok closer, const char* closer_name) {
    std::vector<TypeArm> arms;
    while (true) {
      std::string l = expect_ident("label");
      expect(Tok::Colon, "':'");
      arms.push_back({l, parse_type_full()});
      if (at(Tok::Comma)) {
        next();
        continue;
      }
      break;
    }
    expect(closer, closer_name);
    return arms;
  }

  TypeRef parse_type_full() {
    SourceSpan sp = span_here();
    try {
      return parse_type_inner();
    } catch (const ConstructionError& e) {
      throw ParseError(sp, e.what());
    }
  }

  TypeRef parse_type_inner() {
    if (at_kw("end")) {
      next();
      return Type::end();
    }
    if (at(Tok::Query) || at(Tok::Bang)) {
      bool input = at(Tok::Query);
      next();
      if (at(Tok::LParen)) {
        next();
        TypeRef carried = parse_type_full();
        Polarity p;
        if (at(Tok::Plus)) p = Polarity::Plus;
        else if (at(Tok::Minus)) p = Polarity::Minus;
        else fail("expected polarity '+' or '-' after carried session type");
        next();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        TypeRef cont = parse_type_full();
        return input ? Type::in_session(carried, p, cont) : Type::out_session(carried, p, cont);
      }
      std::string g = expect_ident("ground type");
      if (!registry->contains(g)) fail("unknown ground type '" + g + "'");
      expect(Tok::Dot, "'.'");
      TypeRef cont = parse_type_full();
      return input ? Type::in_value(GroundType(g), cont) : Type::out_value(GroundType(g), cont);
    }
    if (at(Tok::Amp)) {
      next();
      expect(Tok::LBrace, "'{'");
      return Type::branch(type_arms(Tok::RBrace, "'}'"));
    }
    if (at(Tok::Plus)) {
      next();
      expect(Tok::LBrace, "'{'");
      return Type::select(type_arms(Tok::RBrace, "'}'"));
    }
    if (at_kw("spec")) {
      next();
      if (at(Tok::LBrace)) {
        next();
        return Type::spec_select(type_arms(Tok::RBrace, "'}'"), false);
      }
      expect(Tok::LAngle2, "'{' or '<<'");
      return Type::spec_select(type_arms(Tok::RAngle2, "'>>'"), true);
    }
    if (at(Tok::LParen)) {
      next();
      TypeRef t = parse_type_full();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      if (env) {
        if (const TypeRef* t = env->find_type(cur().text)) {
          next();
          return *t;
        }
      }
      fail("unknown type name '" + cur().text + "'");
    }
    fail("expected a session type");
  }

  // ---- orchestrators -----------------------------------------------------

  OrchRef parse_orch_full() {
    SourceSpan sp = span_here();
    try {
      return parse_orch_choice();
    } catch (const ConstructionError& e) {
      throw ParseError(sp, e.what());
    }
  }

  OrchRef parse_orch_choice() {
    OrchRef first = parse_orch_term();
    if (!at(Tok::Plus) && !at(Tok::OPlus)) return first;
    bool external = at(Tok::Plus);
    std::vector<OrchArm> arms{to_arm(first)};
    while (at(external ? Tok::Plus : Tok::OPlus)) {
      next();
      arms.push_back(to_arm(parse_orch_term()));
    }
    if (at(Tok::Plus) || at(Tok::OPlus)) fail("cannot mix '+' and '(+)' without parentheses");
    return external ? Orch::external_choice(std::move(arms))
                    : Orch::internal_choice(std::move(arms));
  }

  OrchArm to_arm(const OrchRef& f) {
    if (f->kind() != OrchKind::LabelPrefix)
      fail("choice arms must be label-prefixed");
    return OrchArm{f->label(), f->cont()};
  }

  OrchRef parse_orch_term() {
    if (at(Tok::Nat) && cur().nat == 1) {
      next();
      return Orch::idle();
    }
    if (at(Tok::Star)) {
      next();
      if (at(Tok::Dot)) {
        next();
        return Orch::io_prefix(parse_orch_term());
      }
      return Orch::io_prefix(Orch::idle());
    }
    if (at(Tok::LParen)) {
      next();
      OrchRef f = parse_orch_choice();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      std::string name = next().text;
      if (at(Tok::Dot)) {
        next();
        return Orch::label_prefix(name, parse_orch_term());
      }
      if (env) {
        if (const OrchRef* f = env->find_orch(name)) return *f;
        // a bound type/process name is not a label
        if (env->find_type(name) || env->find_proc(name))
          fail("'" + name + "' is not an orchestrator");
      }
      return Orch::label_prefix(name, Orch::idle());
    }
    fail("expected an orchestrator");
  }

  // ---- expressions ---------------------------------------------------------

  ExprRef parse_expr_full() {
    if (at(Tok::Nat)) return Expr::lit(Value::nat(next().nat));
    if (at(Tok::Str)) return Expr::lit(Value::str(next().text));
    if (at_kw("true")) {
      next();
      return Expr::lit(Value::boolean(true));
    }
    if (at_kw("false")) {
      next();
      return Expr::lit(Value::boolean(false));
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      std::string name = next().text;
      if (at(Tok::LParen)) {
        next();
        std::vector<ExprRef> args;
        if (!at(Tok::RParen)) {
          args.push_back(parse_expr_full());
          while (at(Tok::Comma)) {
            next();
            args.push_back(parse_expr_full());
          }
        }
        expect(Tok::RParen, "')'");
        return Expr::apply(name, std::move(args));
      }
      return Expr::var(name);
    }
    fail("expected an expression");
  }

  // ---- processes -----------------------------------------------------------

  ProcRef parse_process_full() {
    ProcRef p = parse_component();
    while (at(Tok::Bar)) {
      next();
      p = Proc::par(p, parse_component());
    }
    return p;
  }

  std::vector<ProcArm> proc_arms(Tok closer, const char* closer_name) {
    std::vector<ProcArm> arms;
    while (true) {
      std::string l = expect_ident("label");
      expect(Tok::Colon, "':'");
      arms.push_back({l, parse_process_full()});
      if (at(Tok::Comma)) {
        next();
        continue;
      }
      break;
    }
    expect(closer, closer_name);
    return arms;
  }

  bool starts_channel_op(size_t after) const {
    switch (peek(after).kind) {
      case Tok::Bang:
      case Tok::Query:
      case Tok::SelArrow:
      case Tok::BrArrow:
        return true;
      case Tok::Ident:
        return peek(after).text == "spec";
      default:
        return false;
    }
  }

  ProcRef parse_component() {
    SourceSpan sp = span_here();
    try {
      return parse_component_inner();
    } catch (const ConstructionError& e) {
      throw ParseError(sp, e.what());
    }
  }

  ProcRef parse_component_inner() {
    if (at(Tok::Nat) && cur().nat == 0) {
      next();
      return Proc::inact();
    }
    if (at_kw("request") || at_kw("accept")) {
      bool req = cur().text == "request";
      next();
      std::string port = expect_ident("port name");
      expect(Tok::Colon, "':'");
      expect(Tok::LParen, "'('");
      TypeRef ty = parse_type_full();
      expect(Tok::RParen, "')'");
      expect(Tok::LParen, "'('");
      std::string ch = expect_ident("channel name");
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      ProcRef body = parse_component();
      return req ? Proc::request(port, ty, ch, body) : Proc::accept(port, ty, ch, body);
    }
    if (at_kw("if")) {
      next();
      ExprRef cond = parse_expr_full();
      if (!at_kw("then")) fail("expected 'then'");
      next();
      ProcRef t = parse_component();
      if (!at_kw("else")) fail("expected 'else'");
      next();
      ProcRef e = parse_component();
      return Proc::if_then_else(cond, t, e);
    }
    if (at_kw("orch")) {
      next();
      std::string ch = expect_ident("channel name");
      expect(Tok::LBrace, "'{'");
      OrchRef f = parse_orch_full();
      expect(Tok::RBrace, "'}'");
      return Proc::named_orch(ch, f);
    }
    if (at(Tok::LParen)) {
      if (peek(1).kind == Tok::Ident && peek(1).text == "new") {
        next();
        next();
        std::string ch = expect_ident("channel name");
        expect(Tok::RParen, "')'");
        expect(Tok::LParen, "'('");
        ProcRef body = parse_process_full();
        expect(Tok::RParen, "')'");
        return Proc::restrict(ch, body);
      }
      next();
      ProcRef p = parse_process_full();
      expect(Tok::RParen, "')'");
      return p;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      // channel operation or process-name reference
      bool polarized = (peek(1).kind == Tok::Plus || peek(1).kind == Tok::Minus) &&
                       adjacent_next() && starts_channel_op(2);
      if (polarized || starts_channel_op(1)) {
        std::string name = next().text;
        ChannelRef c = polarized
                           ? chan(name, next().kind == Tok::Plus ? Polarity::Plus : Polarity::Minus)
                           : chan(name);
        return parse_channel_op(c);
      }
      std::string name = cur().text;
      if (env) {
        if (const ProcRef* p = env->find_proc(name)) {
          next();
          return *p;
        }
      }
      fail("unknown process name '" + name + "'");
    }
    fail("expected a process");
  }

  ChannelRef parse_chanref() {
    std::string name = expect_ident("channel name");
    if ((at(Tok::Plus) || at(Tok::Minus)) && toks[pos - 1].end == cur().begin) {
      Polarity p = at(Tok::Plus) ? Polarity::Plus : Polarity::Minus;
      next();
      return chan(name, p);
    }
    return chan(name);
  }

  ProcRef parse_channel_op(const ChannelRef& c) {
    if (at(Tok::Bang)) {
      next();
      if (at(Tok::LAngle2)) {
        next();
        ChannelRef sent = parse_chanref();
        expect(Tok::RAngle2, "'>>'");
        expect(Tok::Dot, "'.'");
        return Proc::throw_chan(c, sent, parse_component());
      }
      expect(Tok::LAngle, "'<'");
      ExprRef e = parse_expr_full();
      expect(Tok::RAngle, "'>'");
      expect(Tok::Dot, "'.'");
      return Proc::send_value(c, e, parse_component());
    }
    if (at(Tok::Query)) {
      next();
      expect(Tok::LParen, "'('");
      if (at(Tok::LParen)) {
        next();
        std::string bound = expect_ident("channel name");
        expect(Tok::RParen, "')'");
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        return Proc::catch_chan(c, bound, parse_component());
      }
      std::string var = expect_ident("variable name");
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      return Proc::recv_value(c, var, parse_component());
    }
    if (at(Tok::SelArrow)) {
      next();
      std::string l = expect_ident("label");
      expect(Tok::Dot, "'.'");
      return Proc::select_l(c, l, parse_component());
    }
    if (at(Tok::BrArrow)) {
      next();
      expect(Tok::LBrace, "'{'");
      return Proc::branch_l(c, proc_arms(Tok::RBrace, "'}'"));
    }
    if (at_kw("spec")) {
      next();
      if (at(Tok::LBrace)) {
        next();
        return Proc::spec_select(c, proc_arms(Tok::RBrace, "'}'"), false);
      }
      expect(Tok::LAngle2, "'{' or '<<'");
      return Proc::spec_select(c, proc_arms(Tok::RAngle2, "'>>'"), true);
    }
    fail("expected a channel operation");
  }

  // ---- module --------------------------------------------------------------

  void parse_bindings(Module& m) {
    while (!at(Tok::End)) {
      if (!at_kw("let")) fail("expected 'let'");
      next();
      std::string name = expect_ident("binding name");
      if (is_keyword(name)) fail("'" + name + "' is reserved");
      if (m.types.count(name) || m.orchs.count(name) || m.procs.count(name))
        fail("duplicate binding '" + name + "'");
      expect(Tok::Eq, "'='");

      size_t save = pos;
      auto binding_ends = [&] { return at(Tok::End) || at_kw("let"); };

      try {
        TypeRef t = parse_type_full();
        if (binding_ends()) {
          m.types[name] = t;
          m.order.emplace_back(name, 't');
          continue;
        }
      } catch (const ParseError&) {
      }
      pos = save;
      try {
        OrchRef f = parse_orch_full();
        if (binding_ends()) {
          m.orchs[name] = f;
          m.order.emplace_back(name, 'o');
          continue;
        }
      } catch (const ParseError&) {
      }
      pos = save;
      ProcRef p = parse_process_full();
      if (!binding_ends()) fail("unexpected input after binding '" + name + "'");
      m.procs[name] = p;
      m.order.emplace_back(name, 'p');
    }
  }
};

}  // namespace

Module parse_module(const std::string& text, const std::string& filename,
                    const GroundRegistry& registry) {
  Module m;
  Parser p(text, filename, registry, &m);
  p.parse_bindings(m);
  return m;
}

TypeRef parse_type(const std::string& text, const Module* env, const std::string& filename,
                   const GroundRegistry& registry) {
  Module scratch;
  if (env) scratch = *env;
  Parser p(text, filename, registry, &scratch);
  TypeRef t = p.parse_type_full();
  p.expect(Tok::End, "end of input");
  return t;
}

OrchRef parse_orch(const std::string& text, const Module* env, const std::string& filename) {
  Module scratch;
  if (env) scratch = *env;
  Parser p(text, filename, GroundRegistry::builtin(), &scratch);
  OrchRef f = p.parse_orch_full();
  p.expect(Tok::End, "end of input");
  return f;
}

ProcRef parse_process(const std::string& text, const Module* env, const std::string& filename,
                      const GroundRegistry& registry) {
  Module scratch;
  if (env) scratch = *env;
  Parser p(text, filename, registry, &scratch);
  ProcRef r = p.parse_process_full();
  p.expect(Tok::End, "end of input");
  return r;
}

ExprRef parse_expr(const std::string& text, const std::string& filename) {
  Module scratch;
  Parser p(text, filename, GroundRegistry::builtin(), &scratch);
  ExprRef e = p.parse_expr_full();
  p.expect(Tok::End, "end of input");
  return e;
}

}  // namespace ost
