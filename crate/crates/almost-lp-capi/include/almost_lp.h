/* C interface for the almost-L_p laboratory.
 *
 * Conventions:
 *   - Handles are opaque; release them with the matching *_free function.
 *   - Fallible calls return an int32_t status code (ALP_OK on success);
 *     on failure alp_last_error_message() describes the problem. The
 *     message pointer stays valid until the next failing call on the
 *     same thread.
 *   - Strings returned through char ** out-params are NUL-terminated
 *     UTF-8 and must be released with alp_string_free().
 *   - Infinite extended-real results are reported as INFINITY.
 *
 * This header is maintained by hand and cross-checked against the
 * exported symbol list by the library's test suite.
 */

#ifndef ALMOST_LP_H
#define ALMOST_LP_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
#define ALP_OK 0
#define ALP_ERR_VIOLATION 1   /* a property or tolerance guarantee failed */
#define ALP_ERR_PARSE 2       /* malformed input or parameter out of domain */
#define ALP_ERR_UNSUPPORTED 3 /* input outside the closed-form families */
#define ALP_ERR_MISSING 4     /* a required ingredient is absent */
#define ALP_ERR_NULL 5        /* null pointer where a value is required */
#define ALP_ERR_UTF8 6        /* char* argument not valid UTF-8 */
#define ALP_ERR_INTERNAL 7    /* internal panic caught at the boundary */

/* Verdicts written by alp_member. */
#define ALP_MEMBER 1
#define ALP_NON_MEMBER 0
#define ALP_MEMBER_INCONCLUSIVE (-1)

/* Opaque handles. */
typedef struct AlpSpace AlpSpace;
typedef struct AlpFunction AlpFunction;

/* Diagnostics. */
const char *alp_last_error_message(void);
const char *alp_version(void);
void alp_string_free(char *s);

/* Measure spaces: finite weighted cells plus an optional closed-form
 * atomic tail, described by JSON. */
int32_t alp_space_from_json(const char *json, AlpSpace **out);
void alp_space_free(AlpSpace *space);
int32_t alp_space_total_measure(const AlpSpace *space, double *out);

/* Measurable functions: cell values plus optional tail segments, JSON. */
int32_t alp_function_from_json(const char *json, AlpFunction **out);
void alp_function_free(AlpFunction *f);

/* Functionals. */
int32_t alp_alpha_norm(const AlpSpace *space, const AlpFunction *f, double p,
                       double tol, double *out);
int32_t alp_lp_norm(const AlpSpace *space, const AlpFunction *f, double p,
                    double tol, double *out);
int32_t alp_frechet_mu(const AlpSpace *space, const AlpFunction *f, double tol,
                       double *out);

/* Membership: writes ALP_MEMBER / ALP_NON_MEMBER / ALP_MEMBER_INCONCLUSIVE. */
int32_t alp_member(const AlpSpace *space, const AlpFunction *f, double p,
                   double tol, int32_t *out_verdict);
int32_t alp_member_report_json(const AlpSpace *space, const AlpFunction *f,
                               double p, double tol, char **out_json);

/* Convergence-mode classification of a sequence described by JSON
 * ({"family": "...", ...}); writes a JSON report array. */
int32_t alp_classify_json(const char *sequence_json, double p, double tol,
                          char **out_json);

/* Vitali legs-vs-conclusion report; variant is "classic", "alpha", or
 * "lambda". */
int32_t alp_vitali_json(const char *variant, const char *sequence_json,
                        double p, double tol, char **out_json);

/* Counterexample gallery. params_json may be NULL (defaults) or a JSON
 * object overriding any of p, eps, r, d, n, seed, trials. A report whose
 * checks fail yields ALP_ERR_VIOLATION with the JSON still written. */
int32_t alp_gallery_list_json(char **out_json);
int32_t alp_gallery_run_json(const char *name, const char *params_json,
                             char **out_json);

#ifdef __cplusplus
}
#endif

#endif /* ALMOST_LP_H */
