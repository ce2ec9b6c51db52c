#ifndef CPK_CPK_H
#define CPK_CPK_H

#include <stddef.h>

#if defined(_WIN32)
#define CPK_API __declspec(dllexport)
#else
#define CPK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpk_status {
    CPK_OK = 0,
    CPK_ERR_USAGE = 2,
    CPK_ERR_VALIDATION = 3,
    CPK_ERR_COMPUTATION = 4,
    CPK_ERR_INTERNAL = 5
} cpk_status;

typedef struct cpk_config cpk_config;
typedef struct cpk_sim cpk_sim;

/* Message of the last failing call on this thread; never NULL. */
CPK_API const char* cpk_last_error(void);
CPK_API const char* cpk_version(void);

/* Strings returned through char** are owned by the caller. */
CPK_API void cpk_string_free(char* s);

CPK_API cpk_status cpk_config_default(cpk_config** out);
CPK_API cpk_status cpk_config_load(const char* path, cpk_config** out);
CPK_API cpk_status cpk_config_parse(const char* json_text, cpk_config** out);
CPK_API void cpk_config_free(cpk_config* cfg);
/* key is dotted ("drive.rabi_mhz"); value is JSON text ("14", "true", "\"log\""). */
CPK_API cpk_status cpk_config_set(cpk_config* cfg, const char* key, const char* json_value);
CPK_API cpk_status cpk_config_to_json(const cpk_config* cfg, char** out);
/* 16 hex digits plus terminator; buf must hold at least 17 bytes. */
CPK_API cpk_status cpk_config_hash(const cpk_config* cfg, char* buf, size_t len);

/* Closed-form extraction bounds and derived cavity quantities as JSON. */
CPK_API cpk_status cpk_bounds(const cpk_config* cfg, char** json_out);
/* T2 sweep; grid is "log" or "linear". Non-positive numbers and a NULL grid take
   the analysis block of cfg. x column in ppm. */
CPK_API cpk_status cpk_sweep_t2(const cpk_config* cfg, double min_ppm, double max_ppm, int points,
                                const char* grid, char** csv_out);
CPK_API cpk_status cpk_schemes(const cpk_config* cfg, char** csv_out);
CPK_API cpk_status cpk_future(const cpk_config* cfg, char** csv_out);

/* Master-equation run with the drive block of cfg. Bichromatic when drive.rabi2_mhz > 0. */
CPK_API cpk_status cpk_simulate(const cpk_config* cfg, cpk_sim** out);
CPK_API cpk_status cpk_sim_summary(const cpk_sim* sim, char** json_out);
CPK_API cpk_status cpk_sim_wavepacket_csv(const cpk_sim* sim, double bin_us, char** csv_out);
CPK_API double cpk_sim_p_s(const cpk_sim* sim);
CPK_API void cpk_sim_free(cpk_sim* sim);

/* Reads a 36-row counts CSV; bootstrap_m <= 0 uses the config value. */
CPK_API cpk_status cpk_tomo(const cpk_config* cfg, const char* counts_path, int bootstrap_m, char** json_out);
/* attempts <= 0 takes the count from the file. */
CPK_API cpk_status cpk_train(const cpk_config* cfg, const char* tags_path, long long attempts, char** json_out);
/* bin_us <= 0 uses the config value. summary_out (optional) receives P_tot and P_S as JSON. */
CPK_API cpk_status cpk_wavepacket(const cpk_config* cfg, const char* tags_path, long long attempts, double bin_us,
                                  char** csv_out, char** summary_out);

CPK_API cpk_status cpk_utc_timestamp(char* buf, size_t len);
CPK_API cpk_status cpk_manifest(const cpk_config* cfg, const char* command, const char* const* outputs,
                                size_t n_outputs, const char* started_utc, const char* finished_utc,
                                char** json_out);

#ifdef __cplusplus
}
#endif

#endif
