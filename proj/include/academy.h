#ifndef ACADEMY_H
#define ACADEMY_H

/* C interface to the agent academy runtime. Every function returns an
 * aa_status; on failure aa_last_error() describes the error for the calling
 * thread. Strings returned through char** are owned by the caller and freed
 * with aa_string_free. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define AA_API __declspec(dllexport)
#else
#define AA_API __attribute__((visibility("default")))
#endif

typedef enum aa_status {
  AA_OK = 0,
  AA_E_EMPTY_INPUT,
  AA_E_UNBALANCED_PARENS,
  AA_E_UNTERMINATED_STRING,
  AA_E_TRAILING_GARBAGE,
  AA_E_UNKNOWN_FRAME,
  AA_E_MALFORMED_FRAME,
  AA_E_NOT_A_DEFRULE,
  AA_E_MISSING_ARROW,
  AA_E_EMPTY_CONDITIONS,
  AA_E_EMPTY_ACTIONS,
  AA_E_DUPLICATE_CONDITION_ATTRIBUTE,
  AA_E_MALFORMED_RULE,
  AA_E_DUPLICATE_RULE_NAME,
  AA_E_UNKNOWN_VARIABLE,
  AA_E_EMPTY_DATASET,
  AA_E_UNKNOWN_ATTRIBUTE,
  AA_E_MISSING_ATTRIBUTE,
  AA_E_INVALID_ALARM_TYPE,
  AA_E_INVALID_DATASET,
  AA_E_STORAGE_FAILURE,
  AA_E_UNKNOWN_EVENT,
  AA_E_DUPLICATE_FEEDBACK,
  AA_E_CORRUPT_LOG,
  AA_E_DUPLICATE_NAME,
  AA_E_UNKNOWN_BEHAVIOR,
  AA_E_UNKNOWN_RECEIVER,
  AA_E_UNKNOWN_AGENT,
  AA_E_DUPLICATE_ONTOLOGY,
  AA_E_UNKNOWN_ONTOLOGY,
  AA_E_NO_MAP_REGISTERED,
  AA_E_UNMAPPED_TERM,
  AA_E_INVALID_ONTOLOGY,
  AA_E_CONFIG_ERROR,
  AA_E_TRANSCRIPT_MISMATCH,
  AA_E_INVALID_ARGUMENT = 100,
  AA_E_IO = 101,
  AA_E_INTERNAL = 102
} aa_status;

typedef struct aa_config aa_config;
typedef struct aa_result aa_result;
typedef struct aa_repository aa_repository;
typedef struct aa_rulebase aa_rulebase;

AA_API const char* aa_status_name(aa_status status);
/* Message of the last failed call on this thread; "" after success. */
AA_API const char* aa_last_error(void);
AA_API void aa_string_free(char* text);

/* Scenario configuration. */
AA_API aa_status aa_config_load(const char* path, aa_config** out);
AA_API aa_status aa_config_parse(const char* text, aa_config** out);
AA_API aa_status aa_config_default(aa_config** out);
AA_API aa_status aa_config_set_seed(aa_config* config, uint64_t seed);
AA_API aa_status aa_config_set_ticks(aa_config* config, int64_t ticks);
AA_API void aa_config_free(aa_config* config);

/* Runs the closed loop. transcript_path may be NULL. */
AA_API aa_status aa_simulation_run(const aa_config* config, const char* transcript_path, aa_result** out);
/* Borrowed; valid until aa_result_free. */
AA_API const char* aa_result_report(const aa_result* result);
AA_API uint64_t aa_result_observations(const aa_result* result);
AA_API void aa_result_free(aa_result* result);

/* Recomputes a transcript file; AA_E_TRANSCRIPT_MISMATCH names the first
 * differing line. */
AA_API aa_status aa_replay_transcript(const char* path);

/* Agent Use Repository logs. */
AA_API aa_status aa_repository_open(const char* path, aa_repository** out);
AA_API aa_status aa_repository_summary(const aa_repository* repository, char** out);
/* Induces the tree for one location; writes the indented tree and the
 * defrule rules, one per line. */
AA_API aa_status aa_repository_mine(const aa_repository* repository, const char* location, char** tree_text,
                                    char** rules_text);
AA_API void aa_repository_close(aa_repository* repository);

/* Parses one SL expression and prints it canonically. */
AA_API aa_status aa_sl_canonicalize(const char* text, char** out);

/* Production rules. */
AA_API aa_status aa_rulebase_create(aa_rulebase** out);
AA_API aa_status aa_rulebase_add(aa_rulebase* rulebase, const char* defrule);
AA_API uint64_t aa_rulebase_size(const aa_rulebase* rulebase);
/* facts: ((attr value) ...). Writes the store as ((key value) ...). */
AA_API aa_status aa_rulebase_run(const aa_rulebase* rulebase, const char* facts, char** store);
AA_API void aa_rulebase_free(aa_rulebase* rulebase);

#ifdef __cplusplus
}
#endif

#endif
