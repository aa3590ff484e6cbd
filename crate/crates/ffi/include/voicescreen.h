#ifndef VOICESCREEN_H
#define VOICESCREEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum VsStatus {
  VsOk = 0,
  VsNullArgument = 1,
  VsInvalidArgument = 2,
  VsDataError = 3,
  VsNumericalError = 4,
  VsUtf8Error = 5,
  VsIoError = 6,
  VsPanic = 7,
} VsStatus;

/**
 * Opaque recording handle.
 */
typedef struct VsRecording VsRecording;

/**
 * Synthesis parameters mirrored for C callers.
 */
typedef struct VsSynthParams {
  /**
   * Mean fundamental frequency in Hz (70-400).
   */
  double f0;
  /**
   * Duration in seconds.
   */
  double duration_s;
  /**
   * Output sample rate in Hz (use 8000).
   */
  unsigned int sample_rate;
  /**
   * Per-cycle period perturbation in percent.
   */
  double jitter_pct;
  /**
   * Per-cycle amplitude perturbation in percent.
   */
  double shimmer_pct;
  /**
   * Target harmonics-to-noise ratio in dB.
   */
  double hnr_db;
  /**
   * Linear F0 drift in Hz/s.
   */
  double f0_drift;
  /**
   * Random seed; equal seeds give identical waveforms.
   */
  uint64_t seed;
} VsSynthParams;

/**
 * Message of the most recent error on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *vs_last_error_message(void);

/**
 * Number of features in the extraction vector (307).
 */
uintptr_t vs_feature_count(void);

/**
 * Canonical name of feature `index`, or NULL when out of range. The
 * returned pointer is static.
 */
const char *vs_feature_name(uintptr_t index);

/**
 * Load a mono 16-bit PCM WAV file into a new recording handle.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum VsStatus vs_recording_load_wav(const char *path, struct VsRecording **out);

/**
 * Create a recording handle from raw samples (amplitude in [-1, 1]).
 *
 * # Safety
 * `samples` must point to `len` doubles; `out` must be a valid pointer.
 */
enum VsStatus vs_recording_from_samples(const double *samples,
                                        uintptr_t len,
                                        unsigned int sample_rate,
                                        struct VsRecording **out);

/**
 * Synthesize a phonation into a new recording handle.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum VsStatus vs_synthesize(const struct VsSynthParams *params, struct VsRecording **out);

/**
 * Duration of a recording in seconds; 0 for NULL.
 *
 * # Safety
 * `rec` must be a handle from this library or NULL.
 */
double vs_recording_duration(const struct VsRecording *rec);

/**
 * Sample rate of a recording in Hz; 0 for NULL.
 *
 * # Safety
 * `rec` must be a handle from this library or NULL.
 */
unsigned int vs_recording_sample_rate(const struct VsRecording *rec);

/**
 * Extract the 307 dysphonia measures of a recording.
 *
 * `sex`: 0 unknown, 1 female, 2 male. `age`: years, or <= 0 for unknown.
 * `values_out` must hold `vs_feature_count()` doubles. `flags_out` may be
 * NULL; when given it must hold `vs_feature_count()` bytes and receives 1
 * where a value failed to compute (the value is NaN there).
 *
 * # Safety
 * Pointers must satisfy the length contracts above.
 */
enum VsStatus vs_extract_features(const struct VsRecording *rec,
                                  int sex,
                                  int age,
                                  double *values_out,
                                  uint8_t *flags_out);

/**
 * Free a recording handle. NULL is a no-op.
 *
 * # Safety
 * `rec` must be a handle from this library, freed at most once.
 */
void vs_recording_free(struct VsRecording *rec);

#endif  /* VOICESCREEN_H */
