#ifndef MDLAB_H
#define MDLAB_H

/* C interface to the decompilation lab. Strings returned through `char**`
   out-parameters are owned by the caller and released with mdlab_free. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MDLAB_API __declspec(dllexport)
#else
#define MDLAB_API __attribute__((visibility("default")))
#endif

typedef enum mdlab_status {
    MDLAB_OK = 0,
    MDLAB_E_ARG = 1,      /* null or malformed argument */
    MDLAB_E_IO = 2,       /* file could not be read or written */
    MDLAB_E_PARSE = 3,    /* source did not parse */
    MDLAB_E_COMPILE = 4,  /* source did not compile */
    MDLAB_E_CONTRACT = 5, /* precondition violated */
    MDLAB_E_TOOL = 6,     /* internal tool fault */
    MDLAB_E_FAILED = 7    /* the operation ran and reported a negative outcome */
} mdlab_status;

typedef struct mdlab_ctx mdlab_ctx;

MDLAB_API const char* mdlab_version(void);
MDLAB_API const char* mdlab_status_name(mdlab_status s);

/* `config_path` may be null for defaults. */
MDLAB_API mdlab_status mdlab_ctx_new(const char* config_path, mdlab_ctx** out);
MDLAB_API void mdlab_ctx_free(mdlab_ctx* ctx);
/* Applies one `key = value` configuration line. */
MDLAB_API mdlab_status mdlab_ctx_set(mdlab_ctx* ctx, const char* key, const char* value);
MDLAB_API void mdlab_ctx_set_jobs(mdlab_ctx* ctx, int jobs);
/* Message for the last failing call on this context; never null. */
MDLAB_API const char* mdlab_ctx_last_error(const mdlab_ctx* ctx);

MDLAB_API void mdlab_free(char* s);

/* Writes a generated corpus (sources, tests, manifest.json) into `dir`. */
MDLAB_API mdlab_status mdlab_gen_corpus(mdlab_ctx* ctx, const char* dir, uint64_t seed, int size);
/* Lint report as newline-separated problems; empty string when clean. */
MDLAB_API mdlab_status mdlab_lint(mdlab_ctx* ctx, const char* corpus_dir, char** problems);

/* `.mj` source text to `.mjc` text. `classpath_dir` (nullable) is a corpus
   directory whose classes are visible during compilation. */
MDLAB_API mdlab_status mdlab_compile(mdlab_ctx* ctx, const char* source, const char* variant,
                                     const char* classpath_dir, char** mjc);
/* Compiles every class of a corpus and writes `<class>.mjc` files to `out_dir`. */
MDLAB_API mdlab_status mdlab_compile_corpus(mdlab_ctx* ctx, const char* corpus_dir, const char* variant,
                                            const char* out_dir);
/* `.mjc` text to source text. MDLAB_E_FAILED with the reason as last error
   when the backend produced nothing. */
MDLAB_API mdlab_status mdlab_decompile(mdlab_ctx* ctx, const char* mjc, const char* decompiler, char** source);

/* One assessment record as JSON. `tests` is `.tj` text (nullable). */
MDLAB_API mdlab_status mdlab_assess(mdlab_ctx* ctx, const char* source, const char* variant, const char* decompiler,
                                    const char* tests, const char* classpath_dir, char** record_json);

/* Meta-decompiles `.mjc` text with the context's order. On success `source`
   receives the merged class; `result_json` always receives the result. */
MDLAB_API mdlab_status mdlab_meta(mdlab_ctx* ctx, const char* mjc, const char* variant, const char* classpath_dir,
                                  char** source, char** result_json);

/* Edit script between two sources as JSON. */
MDLAB_API mdlab_status mdlab_diff(mdlab_ctx* ctx, const char* original, const char* decompiled, char** script_json);

/* Runs every (class, compiler, decompiler) triple of the corpus. Writes
   records.jsonl, meta.jsonl and report.json to `out_dir`; `work_dir`
   (nullable) receives per-triple scratch files. */
MDLAB_API mdlab_status mdlab_run(mdlab_ctx* ctx, const char* corpus_dir, const char* out_dir, const char* work_dir,
                                 char** report_json);

/* Canonical report from record and meta JSON-lines files (meta nullable). */
MDLAB_API mdlab_status mdlab_report(mdlab_ctx* ctx, const char* records_path, const char* meta_path,
                                    char** report_json, char** csv);

#ifdef __cplusplus
}
#endif

#endif
