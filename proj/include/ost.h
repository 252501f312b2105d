/* ost: orchestrated session types toolkit - C API
 *
 * Opaque handles over the core library: parse .ost modules, decide
 * orchestrated compliance, synthesize orchestrators, typecheck processes,
 * execute them under the orchestrated reduction semantics, and run the
 * property suites. All functions return OST_OK on success; on failure
 * ost_last_error() carries a message for the calling thread.
 */
#ifndef OST_H
#define OST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  OST_OK = 0,
  OST_ERR_PARSE = 1,
  OST_ERR_TYPE = 2,
  OST_ERR_USAGE = 3,
  OST_ERR_RUNTIME = 4,
} ost_status;

typedef enum {
  OST_MODE_PLAIN = 0,
  OST_MODE_PRIORITY_TYPE = 1,
  OST_MODE_PRIORITY_PROCESS = 2,
} ost_mode;

typedef enum {
  OST_SYNTH_PRIORITY = 0,
  OST_SYNTH_ALL_SAFE = 1,
} ost_synth_mode;

typedef struct ost_module ost_module;
typedef struct ost_type ost_type;
typedef struct ost_orch ost_orch;
typedef struct ost_process ost_process;
typedef struct ost_env ost_env;

const char* ost_version(void);
const char* ost_last_error(void);
void ost_string_free(char* s);

/* ----- modules: .ost files of let-bindings ----- */
ost_status ost_module_parse(const char* text, const char* filename, ost_module** out);
ost_status ost_module_load(const char* path, ost_module** out);
void ost_module_free(ost_module* m);

/* name NULL or empty selects the last binding of that sort */
ost_status ost_module_type(const ost_module* m, const char* name, ost_type** out);
ost_status ost_module_orch(const ost_module* m, const char* name, ost_orch** out);
ost_status ost_module_process(const ost_module* m, const char* name, ost_process** out);

void ost_type_free(ost_type* t);
void ost_orch_free(ost_orch* f);
void ost_process_free(ost_process* p);

char* ost_type_pretty(const ost_type* t);
char* ost_orch_pretty(const ost_orch* f);
char* ost_process_pretty(const ost_process* p);

/* ----- compliance and synthesis ----- */
ost_status ost_check_compliance(const ost_orch* f, const ost_type* client,
                                const ost_type* server, int* result);
ost_status ost_oracle_compliant(const ost_type* client, const ost_type* server, int* result);
/* *out is NULL when no orchestrator exists */
ost_status ost_synth(const ost_type* client, const ost_type* server, ost_synth_mode mode,
                     ost_orch** out);
ost_status ost_orch_deterministic(const ost_orch* f, int* result);

/* ----- expression environments -----
 * JSON: {"functions": {name: {"params": ["String", ...], "result": "Bool",
 *                             "rules": [{"args": [...], "value": ...}]}}}
 * extending the built-in table. Rule arguments and values are JSON numbers,
 * booleans or strings. */
ost_status ost_env_default(ost_env** out);
ost_status ost_env_load(const char* path, ost_env** out);
void ost_env_free(ost_env* e);

/* ----- typechecking -----
 * report JSON: {"ok": bool, "typing": "{...}"} or
 *              {"ok": false, "error": {"kind", "path", "detail"}} */
ost_status ost_typecheck(const ost_process* p, ost_mode mode, const ost_env* env_or_null,
                         char** report_json, int* ok);

/* ----- execution ----- */
typedef struct {
  ost_mode mode;
  int cleanup;        /* 0/1 */
  int has_seed;       /* picks redexes pseudo-randomly when set */
  uint64_t seed;
  size_t step_limit;  /* 0 means the default (10000) */
  const char* replay; /* comma-separated rule names ("OrchSSel:sd" fixes a label) */
} ost_run_opts;

/* trace JSON: {version, mode, cleanup, seed, steps:[{step,rule,channel,label,state}],
 *              final:{state, errors:[...]}}
 * exit_class: 0 final state not an error, 3 an error class holds, 4 step limit */
ost_status ost_run(const ost_process* p, const ost_run_opts* opts, const ost_env* env_or_null,
                   char** trace_json, int* exit_class);

/* ----- property suites -----
 * suite: synth | subject-reduction | error-freeness | congruence | roundtrip */
ost_status ost_fuzz(const char* suite, int n, uint64_t seed, int max_depth, char** report_json,
                    int* failures);

#ifdef __cplusplus
}
#endif

#endif
