/* revmark C API.
 *
 * Every function returns an rm_status. On failure a message for the calling
 * thread is available from rm_last_error() until the next call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with rm_string_free(). Handles are released with their *_free
 * function; passing NULL to a *_free function is a no-op.
 */
#ifndef REVMARK_H
#define REVMARK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define RM_API __declspec(dllexport)
#else
#define RM_API __attribute__((visibility("default")))
#endif

typedef enum rm_status {
  RM_OK = 0,
  RM_INVALID_ARGUMENT = 1,
  RM_IO_ERROR = 2,
  RM_PARSE_ERROR = 3,
  RM_EMPTY_SURNAME_LIST = 10,
  RM_DUPLICATE_SURNAME = 11,
  RM_NOT_ENOUGH_KEYWORDS = 12,
  RM_EMPTY_SET = 13,
  RM_SCHEME_MISMATCH = 14,
  RM_DUPLICATE_CANDIDATE = 15,
  RM_DUPLICATE_KEY = 20,
  RM_UNKNOWN_SET = 21,
  RM_NOT_FOUND = 22,
  RM_CHAIN_BROKEN = 23,
  RM_PAGE_OUT_OF_RANGE = 30,
  RM_MALFORMED_PDF = 31,
  RM_FONT_RESOURCE_MISSING = 32,
  RM_INCOMPLETE_REMAP = 33,
  RM_LENGTH_MISMATCH = 34,
  RM_UNENCODABLE_PAYLOAD = 35,
  RM_DISPLAY_MISMATCH = 36,
  RM_DUPLICATE_REVIEW_ID = 40,
  RM_INFEASIBLE = 41,
  RM_INSTANCE_TOO_LARGE = 42,
  RM_MISSING_ASSIGNMENT = 43,
  RM_INFEASIBLE_PROFILE = 50,
  RM_INVALID_COUNTS = 51,
  RM_AUTH_MISSING = 60,
  RM_PROVIDER_ERROR = 61,
  RM_CASSETTE_MISS = 62,
  RM_INTERNAL = 99
} rm_status;

typedef enum rm_scheme { RM_RANDOM_START = 0, RM_TECHNICAL_TERM = 1, RM_RANDOM_CITATION = 2 } rm_scheme;
typedef enum rm_solver { RM_GREEDY = 0, RM_EXACT = 1 } rm_solver;

typedef struct rm_set rm_set;
typedef struct rm_registry rm_registry;
typedef struct rm_corpus rm_corpus;

RM_API const char* rm_version(void);
RM_API const char* rm_last_error(void);
RM_API const char* rm_status_name(rm_status status);
RM_API void rm_string_free(char* s);

/* Watermark sets. */
RM_API rm_status rm_set_build_random_start(rm_set** out);
RM_API rm_status rm_set_build_citation(const char* surnames_path, int year_lo, int year_hi, rm_set** out);
RM_API rm_status rm_set_build_technical_term(const char* keywords_path, size_t n, rm_set** out);
RM_API rm_status rm_set_load(const char* path, rm_set** out);
RM_API rm_status rm_set_save(const rm_set* set, const char* path);
RM_API void rm_set_free(rm_set* set);
RM_API size_t rm_set_size(const rm_set* set);
RM_API rm_scheme rm_set_scheme(const rm_set* set);
/* Borrowed pointers, valid while the set lives. */
RM_API const char* rm_set_id(const rm_set* set);
RM_API rm_status rm_set_candidate(const rm_set* set, size_t index, const char** out);
/* Lookup compares normalized text, so case and spacing do not matter. */
RM_API rm_status rm_set_index_of(const rm_set* set, const char* surface, size_t* index);
RM_API rm_status rm_injection_prompt(const rm_set* set, size_t index, char** out);

/* Assignment registry. A missing file opens as an empty registry. */
RM_API rm_status rm_registry_open(const char* path, rm_registry** out);
RM_API rm_status rm_registry_save(const rm_registry* reg, const char* path);
RM_API void rm_registry_free(rm_registry* reg);
RM_API size_t rm_registry_assignment_count(const rm_registry* reg);
/* Samples a watermark for (paper_id, review_slot) with a seed derived from
 * seed and the key, registers the set if needed and records the assignment.
 * review_slot, created_at and method may be NULL. */
RM_API rm_status rm_registry_assign(rm_registry* reg, const rm_set* set, const char* paper_id,
                                    const char* review_slot, uint64_t seed, const char* created_at,
                                    const char* method, int supersede, size_t* index);
/* JSON object of the resolved assignment. */
RM_API rm_status rm_registry_lookup(const rm_registry* reg, const char* paper_id, const char* review_slot,
                                    char** json);
RM_API rm_status rm_registry_verify(const rm_registry* reg, int* chain_ok);
/* Tab-separated table; set may be NULL (surfaces are then omitted). */
RM_API rm_status rm_registry_table(const rm_registry* reg, const rm_set* set, char** text);

/* Review corpora (JSON lines with review_id, text, paper_id, review_slot). */
RM_API rm_status rm_corpus_load(const char* path, rm_corpus** out);
RM_API void rm_corpus_free(rm_corpus* corpus);
RM_API size_t rm_corpus_size(const rm_corpus* corpus);

/* Detection. */
typedef struct rm_detect_config {
  double alpha;
  size_t tau;
  int64_t rho;   /* < 0: |R| */
  int64_t omega; /* < 0: |W| */
  rm_solver solver;
  uint64_t seed;
} rm_detect_config;

RM_API void rm_detect_config_init(rm_detect_config* cfg);
RM_API size_t rm_fpr_threshold(double alpha, size_t set_size);

/* JSON array of {review_id, candidates[]} at the set's scan scope. */
RM_API rm_status rm_scan(const rm_set* set, const rm_corpus* corpus, char** json);
RM_API rm_status rm_detect_single(const rm_set* set, const char* review_text, size_t w_star, size_t tau,
                                  int* flagged, int* present, size_t* candidate_count);
/* Multi-review test. Assignments come from the registry by paper_id and
 * review_slot. The JSON report carries flags, discards and both baselines. */
RM_API rm_status rm_detect_batch(const rm_set* set, const rm_corpus* corpus, const rm_registry* reg,
                                 const rm_detect_config* cfg, char** json);

/* PDF injection. spec_path is a key=value injection spec. The JSON report
 * holds the verification result of the written file. */
RM_API rm_status rm_inject_file(const char* in_pdf, const char* spec_path, const char* out_pdf, char** json);
RM_API rm_status rm_verify_file(const char* pdf, const char* spec_path, char** json);
/* JSON object {"pages": [...], "displayed": [...]}. */
RM_API rm_status rm_extract_text(const char* pdf, char** json);

/* Simulation and metrics. */
/* Fields left at their rm_sim_overrides_init values keep the config file's
 * setting. */
typedef struct rm_sim_overrides {
  int has_seed;
  uint64_t seed;
  double alpha; /* < 0: keep */
  int64_t tau;  /* < 0: keep */
  int64_t rho;
  int64_t omega;
  int64_t trials;
  int solver; /* < 0: keep, else rm_solver */
} rm_sim_overrides;

RM_API void rm_sim_overrides_init(rm_sim_overrides* o);
RM_API rm_status rm_simulate(const char* config_path, const rm_set* set, const rm_sim_overrides* overrides,
                             char** json);
RM_API rm_status rm_bootstrap_ci(size_t successes, size_t n, size_t replicates, double level, uint64_t seed,
                                 double* low, double* high);
/* CSV with header item,watermarked,total. */
RM_API rm_status rm_hpsr_osr_file(const char* csv_path, size_t replicates, uint64_t seed, char** json);

/* LLM acquisition. cassette may be NULL for live calls; record != 0 appends
 * live responses to the cassette. */
RM_API rm_status rm_acquire_generate(const char* provider_conf, const char* paper_path, size_t n_samples,
                                     const char* cassette, int record, char** json);
RM_API rm_status rm_acquire_paraphrase(const char* provider_conf, const char* cases_path, const char* cassette,
                                       int record, char** json);
/* Cases: JSON lines {id, paper, instruction}. */
RM_API rm_status rm_acquire_probe(const char* provider_conf, const char* cases_path, const char* cassette,
                                  int record, char** json);

#ifdef __cplusplus
}
#endif

#endif
