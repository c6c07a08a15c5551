#ifndef REMASK_H
#define REMASK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(REMASK_BUILDING_LIBRARY)
#    define REMASK_API __declspec(dllexport)
#  else
#    define REMASK_API __declspec(dllimport)
#  endif
#else
#  define REMASK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum remask_status {
    REMASK_OK = 0,
    REMASK_ERR_INVALID_ARGUMENT,
    REMASK_ERR_CONTRACT_VIOLATION,
    REMASK_ERR_EVIDENCE_ZERO,
    REMASK_ERR_SPEC_VALIDATION,
    REMASK_ERR_SIZE_LIMIT,
    REMASK_ERR_NONTERMINATION,
    REMASK_ERR_DEGENERATE_WEIGHT,
    REMASK_ERR_PARSE,
    REMASK_ERR_IO,
    REMASK_ERR_INTERNAL,
} remask_status;

typedef struct remask_model         remask_model;
typedef struct remask_decode_config remask_decode_config;
typedef struct remask_trajectory    remask_trajectory;

// Static description of a status code.
REMASK_API const char * remask_status_string(remask_status status);

// Message of the last failed call on this thread; "" if none.
REMASK_API const char * remask_last_error(void);

// Strings returned through char ** out-parameters are owned by the caller.
REMASK_API void remask_string_free(char * s);

REMASK_API const char * remask_version(void);

//
// models
//

REMASK_API remask_status remask_model_from_tabular_json(const char * json, remask_model ** out);
REMASK_API remask_status remask_model_from_anchor_fork_json(const char * json, remask_model ** out);
REMASK_API void          remask_model_free(remask_model * model);
REMASK_API size_t        remask_model_length(const remask_model * model);
REMASK_API int           remask_model_vocab_size(const remask_model * model);

//
// decode configs
//

REMASK_API remask_status remask_decode_config_from_json(const char * json, remask_decode_config ** out);
REMASK_API remask_status remask_decode_config_to_json(const remask_decode_config * cfg, char ** out_json);
REMASK_API void          remask_decode_config_free(remask_decode_config * cfg);

//
// decoding
//

// Decodes with the stream derived from (master_seed, trial).
REMASK_API remask_status remask_decode(const remask_model * model, const remask_decode_config * cfg,
                                       uint64_t master_seed, uint64_t trial, remask_trajectory ** out);
REMASK_API void    remask_trajectory_free(remask_trajectory * traj);
REMASK_API size_t  remask_trajectory_length(const remask_trajectory * traj);
REMASK_API size_t  remask_trajectory_steps(const remask_trajectory * traj);
REMASK_API int64_t remask_trajectory_nfe(const remask_trajectory * traj);
// Copies min(cap, length) final tokens; returns the sequence length.
REMASK_API size_t  remask_trajectory_tokens(const remask_trajectory * traj, int32_t * out, size_t cap);
// Step index at which each position was unmasked.
REMASK_API size_t  remask_trajectory_unmask_steps(const remask_trajectory * traj, int32_t * out, size_t cap);
REMASK_API remask_status remask_trajectory_to_jsonl(const remask_trajectory * traj, char ** out);

// Exact final-sequence distribution as a JSON array of {"tokens", "p"}.
REMASK_API remask_status remask_enumerate(const remask_model * model, const remask_decode_config * cfg,
                                          char ** out_json);

//
// metrics
//

REMASK_API remask_status remask_pass_at_k(int64_t n, int64_t c, int64_t k, double * out);

//
// experiment runners
//
// overrides_json is NULL or an object with any of out_dir, master_seed,
// workers, format, trials, records. *ok is 1 when every conclusive check
// (verify) or step (others) succeeded. files_json, when non-NULL, receives
// a JSON array of written paths.

REMASK_API remask_status remask_run_verify(const char * config_path, const char * overrides_json, int * ok,
                                           char ** files_json);
REMASK_API remask_status remask_run_sweep(const char * config_path, const char * overrides_json, int * ok,
                                          char ** files_json);
REMASK_API remask_status remask_run_enumerate(const char * config_path, const char * overrides_json, int * ok,
                                              char ** files_json);
// config_path may be NULL when the overrides name the records file.
REMASK_API remask_status remask_run_passk(const char * config_path, const char * overrides_json, int * ok,
                                          char ** files_json);

#ifdef __cplusplus
}
#endif

#endif // REMASK_H
