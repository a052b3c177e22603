#ifndef GEOMQ_H
#define GEOMQ_H

/* Geometric quantum potential toolkit: C interface.
 *
 * All functions return a geomq_status; outputs are written through pointers.
 * On failure, geomq_last_error() returns a thread-local message describing
 * the most recent failing call on the calling thread. Strings returned
 * through char** are owned by the library; release them with
 * geomq_string_free.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum geomq_status {
    GEOMQ_OK = 0,
    GEOMQ_INVALID_ARGUMENT = 1,
    GEOMQ_UNKNOWN_CHART = 2,
    GEOMQ_DEGENERATE_CHART = 3,
    GEOMQ_NON_SYMMETRIC_FORM = 4,
    GEOMQ_OFFSET_DEGENERATE = 5,
    GEOMQ_POLE_PROXIMITY = 6,
    GEOMQ_STEP_FAILURE = 7,
    GEOMQ_GRID_TOO_COARSE = 8,
    GEOMQ_FRAME_DISCONTINUITY = 9,
    GEOMQ_CONFIG_ERROR = 10,
    GEOMQ_IO_ERROR = 11,
    GEOMQ_ALLOC_ERROR = 12,
    GEOMQ_INTERNAL_ERROR = 13
} geomq_status;

const char* geomq_version(void);
const char* geomq_status_name(geomq_status status);
const char* geomq_last_error(void);

/* Parametric chart handle. spec is "name:key=value,...", e.g. "sphere:R=1,n=4". */
typedef struct geomq_chart geomq_chart;

geomq_status geomq_chart_create(const char* spec, geomq_chart** chart_out);
void geomq_chart_free(geomq_chart* chart);

/* surface dimension m / ambient dimension n; -1 on null handle */
int geomq_chart_dim(const geomq_chart* chart);
int geomq_chart_ambient(const geomq_chart* chart);

/* embedded point: u has m entries, x_out receives n entries */
geomq_status geomq_chart_point(const geomq_chart* chart, const double* u, double* x_out);

/* principal curvatures (codim-1 charts): k_out receives m entries, descending */
geomq_status geomq_principal_curvatures(const geomq_chart* chart, const double* u, double* k_out);

/* geometric quantum potential at u via the curvature trace form */
geomq_status geomq_quantum_potential(const geomq_chart* chart, const double* u, double* vq_out);

/* Batch runner: config_json selects command, chart, grids, seeds (see the
 * CLI documentation for the schema). output_out receives the rendered
 * report in the configured format; pass_out (optional) receives 1 when all
 * checks passed. When the config names an output file, the report is also
 * written there atomically. */
geomq_status geomq_run(const char* config_json, char** output_out, int* pass_out);

void geomq_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GEOMQ_H */
