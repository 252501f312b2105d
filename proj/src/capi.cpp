#include "ost.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ost/compliance.hpp"
#include "ost/congruence.hpp"
#include "ost/parser.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"
#include "ost/suites.hpp"
#include "ost/typecheck.hpp"

using nlohmann::json;

struct ost_module {
  ost::Module m;
};
struct ost_type {
  ost::TypeRef t;
};
struct ost_orch {
  ost::OrchRef f;
};
struct ost_process {
  ost::ProcRef p;
};
struct ost_env {
  ost::FunctionTable t;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
ost_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ost::ParseError& e) {
    set_error(e.what());
    return OST_ERR_PARSE;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return OST_ERR_USAGE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return OST_ERR_RUNTIME;
  }
}

ost::Value json_to_value(const json& j) {
  if (j.is_boolean()) return ost::Value::boolean(j.get<bool>());
  if (j.is_number_unsigned() || j.is_number_integer())
    return ost::Value::nat(j.get<uint64_t>());
  if (j.is_string()) return ost::Value::str(j.get<std::string>());
  throw std::invalid_argument("environment rule values must be numbers, booleans or strings");
}

}  // namespace

extern "C" {

const char* ost_version(void) { return "0.1.0"; }

const char* ost_last_error(void) { return g_last_error.c_str(); }

void ost_string_free(char* s) { std::free(s); }

ost_status ost_module_parse(const char* text, const char* filename, ost_module** out) {
  if (!text || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    auto m = new ost_module{ost::parse_module(text, filename ? filename : "<input>")};
    *out = m;
    return OST_OK;
  });
}

ost_status ost_module_load(const char* path, ost_module** out) {
  if (!path || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  std::ifstream in(path);
  if (!in) {
    set_error(std::string("cannot open '") + path + "'");
    return OST_ERR_USAGE;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ost_module_parse(buf.str().c_str(), path, out);
}

void ost_module_free(ost_module* m) { delete m; }

ost_status ost_module_type(const ost_module* m, const char* name, ost_type** out) {
  if (!m || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    *out = new ost_type{m->m.type_binding(name ? name : "")};
    return OST_OK;
  });
}

ost_status ost_module_orch(const ost_module* m, const char* name, ost_orch** out) {
  if (!m || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    *out = new ost_orch{m->m.orch_binding(name ? name : "")};
    return OST_OK;
  });
}

ost_status ost_module_process(const ost_module* m, const char* name, ost_process** out) {
  if (!m || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    *out = new ost_process{m->m.proc_binding(name ? name : "")};
    return OST_OK;
  });
}

void ost_type_free(ost_type* t) { delete t; }
void ost_orch_free(ost_orch* f) { delete f; }
void ost_process_free(ost_process* p) { delete p; }

char* ost_type_pretty(const ost_type* t) { return dup_string(ost::pretty(t->t)); }
char* ost_orch_pretty(const ost_orch* f) { return dup_string(ost::pretty(f->f)); }
char* ost_process_pretty(const ost_process* p) { return dup_string(ost::pretty(p->p)); }

ost_status ost_check_compliance(const ost_orch* f, const ost_type* client,
                                const ost_type* server, int* result) {
  if (!f || !client || !server || !result) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    *result = ost::check_compliance(f->f, client->t, server->t) ? 1 : 0;
    return OST_OK;
  });
}

ost_status ost_oracle_compliant(const ost_type* client, const ost_type* server, int* result) {
  if (!client || !server || !result) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    *result = ost::oracle_compliant(client->t, server->t) ? 1 : 0;
    return OST_OK;
  });
}

ost_status ost_synth(const ost_type* client, const ost_type* server, ost_synth_mode mode,
                     ost_orch** out) {
  if (!client || !server || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    ost::SynthResult r = mode == OST_SYNTH_PRIORITY ? ost::synth(client->t, server->t)
                                                    : ost::synth_ud(client->t, server->t);
    *out = r ? new ost_orch{*r} : nullptr;
    return OST_OK;
  });
}

ost_status ost_orch_deterministic(const ost_orch* f, int* result) {
  if (!f || !result) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  *result = ost::is_deterministic(f->f) ? 1 : 0;
  return OST_OK;
}

ost_status ost_env_default(ost_env** out) {
  if (!out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  *out = new ost_env{ost::FunctionTable::defaults()};
  return OST_OK;
}

ost_status ost_env_load(const char* path, ost_env** out) {
  if (!path || !out) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  std::ifstream in(path);
  if (!in) {
    set_error(std::string("cannot open '") + path + "'");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    json doc = json::parse(in);
    ost::FunctionTable table = ost::FunctionTable::defaults();
    if (doc.contains("functions")) {
      for (auto& [name, spec] : doc["functions"].items()) {
        ost::FnSig sig{{}, ost::GroundType(spec.at("result").get<std::string>())};
        for (const auto& p : spec.at("params"))
          sig.params.push_back(ost::GroundType(p.get<std::string>()));
        table.declare(name, sig);
        if (spec.contains("rules")) {
          for (const auto& rule : spec["rules"]) {
            std::vector<ost::Value> args;
            for (const auto& a : rule.at("args")) args.push_back(json_to_value(a));
            table.add_rule(name, std::move(args), json_to_value(rule.at("value")));
          }
        }
      }
    }
    *out = new ost_env{std::move(table)};
    return OST_OK;
  });
}

void ost_env_free(ost_env* e) { delete e; }

ost_status ost_typecheck(const ost_process* p, ost_mode mode, const ost_env* env,
                         char** report_json, int* ok) {
  if (!p || !report_json || !ok) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    ost::FunctionTable table = env ? env->t : ost::FunctionTable::defaults();
    auto r = ost::typecheck({}, p->p, static_cast<ost::SemanticsMode>(mode), table);
    json doc;
    doc["ok"] = r.ok();
    if (r.ok()) {
      doc["typing"] = ost::pretty(*r.typing);
    } else {
      doc["error"] = {{"kind", ost::to_string(r.error->kind)},
                      {"path", r.error->path},
                      {"detail", r.error->detail}};
    }
    *ok = r.ok() ? 1 : 0;
    *report_json = dup_string(doc.dump(2));
    return OST_OK;
  });
}

ost_status ost_run(const ost_process* p, const ost_run_opts* opts, const ost_env* env,
                   char** trace_json, int* exit_class) {
  if (!p || !opts || !trace_json || !exit_class) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    ost::FunctionTable table = env ? env->t : ost::FunctionTable::defaults();
    auto mode = static_cast<ost::SemanticsMode>(opts->mode);
    size_t limit = opts->step_limit ? opts->step_limit : 10000;

    std::unique_ptr<ost::Scheduler> sched;
    if (opts->replay && *opts->replay) {
      std::vector<std::string> script;
      std::string entry;
      std::istringstream ss(opts->replay);
      while (std::getline(ss, entry, ','))
        if (!entry.empty()) script.push_back(entry);
      sched = std::make_unique<ost::ReplayScheduler>(std::move(script));
    } else if (opts->has_seed) {
      sched = std::make_unique<ost::SeededScheduler>(opts->seed);
    } else {
      sched = std::make_unique<ost::DeterministicScheduler>();
    }

    ost::Trace tr = ost::run(p->p, mode, opts->cleanup != 0, *sched, limit, table);

    json doc;
    doc["version"] = 1;
    doc["mode"] = ost::to_string(mode);
    doc["cleanup"] = opts->cleanup != 0;
    doc["seed"] = opts->has_seed ? json(opts->seed) : json(nullptr);
    doc["steps"] = json::array();
    int i = 0;
    for (const auto& s : tr.steps) {
      doc["steps"].push_back({{"step", i++},
                              {"rule", s.rule},
                              {"channel", s.channel},
                              {"label", s.label},
                              {"state", ost::pretty(s.after)}});
    }
    json errs = json::array();
    bool is_error = false;
    for (const auto& e : tr.final_errors) {
      if (e.kind != ost::ErrorKind::NotAnError) {
        is_error = true;
        errs.push_back({{"kind", ost::to_string(e.kind)}, {"channel", e.channel}});
      }
    }
    doc["final"] = {{"state", ost::pretty(tr.final_state)}, {"errors", errs}};
    *trace_json = dup_string(doc.dump(2));
    *exit_class = tr.step_limit_hit ? 4 : (is_error ? 3 : 0);
    return OST_OK;
  });
}

ost_status ost_fuzz(const char* suite, int n, uint64_t seed, int max_depth, char** report_json,
                    int* failures) {
  if (!suite || !report_json || !failures) {
    set_error("null argument");
    return OST_ERR_USAGE;
  }
  return guarded([&] {
    ost::SuiteReport rep = ost::run_suite(suite, n, seed, max_depth);
    json doc;
    doc["suite"] = rep.suite;
    doc["cases"] = rep.cases;
    doc["failures"] = rep.failures;
    doc["counterexample"] = rep.counterexample;
    *report_json = dup_string(doc.dump(2));
    *failures = rep.failures;
    return OST_OK;
  });
}

}  // extern "C"
