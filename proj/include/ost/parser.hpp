#ifndef OST_PARSER_HPP
#define OST_PARSER_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ost/process.hpp"

namespace ost {

struct SourceSpan {
  std::string file;
  int line = 1;
  int col = 1;
  int end_line = 1;
  int end_col = 1;
};

std::string to_string(const SourceSpan& s);

struct ParseError : std::runtime_error {
  ParseError(SourceSpan sp, const std::string& msg)
      : std::runtime_error(to_string(sp) + ": " + msg), span(std::move(sp)), message(msg) {}
  SourceSpan span;
  std::string message;
};

// A parsed .ost file: an ordered sequence of let-bindings. A binding may
// reference only earlier bindings.
struct Module {
  std::map<std::string, TypeRef> types;
  std::map<std::string, OrchRef> orchs;
  std::map<std::string, ProcRef> procs;
  std::vector<std::pair<std::string, char>> order;  // (name, 't'|'o'|'p')

  const TypeRef* find_type(const std::string& name) const;
  const OrchRef* find_orch(const std::string& name) const;
  const ProcRef* find_proc(const std::string& name) const;

  // Last binding of the given sort, or the named one.
  TypeRef type_binding(const std::string& name_or_empty) const;
  OrchRef orch_binding(const std::string& name_or_empty) const;
  ProcRef proc_binding(const std::string& name_or_empty) const;
};

Module parse_module(const std::string& text, const std::string& filename = "<input>",
                    const GroundRegistry& registry = GroundRegistry::builtin());

// Standalone entry points; `env` supplies named abbreviations.
TypeRef parse_type(const std::string& text, const Module* env = nullptr,
                   const std::string& filename = "<input>",
                   const GroundRegistry& registry = GroundRegistry::builtin());
OrchRef parse_orch(const std::string& text, const Module* env = nullptr,
                   const std::string& filename = "<input>");
ProcRef parse_process(const std::string& text, const Module* env = nullptr,
                      const std::string& filename = "<input>",
                      const GroundRegistry& registry = GroundRegistry::builtin());
ExprRef parse_expr(const std::string& text, const std::string& filename = "<input>");

}  // namespace ost

#endif
