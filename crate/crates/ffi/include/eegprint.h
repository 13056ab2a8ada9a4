#ifndef EEGPRINT_H
#define EEGPRINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EegBand {
  EEG_BAND_HIGH_BETA = 0,
  EEG_BAND_GAMMA = 1,
} EegBand;

typedef enum EegCondition {
  EEG_CONDITION_EYES_OPEN = 0,
  EEG_CONDITION_EYES_CLOSED = 1,
} EegCondition;

typedef enum EegMethod {
  EEG_METHOD_PLI = 0,
  EEG_METHOD_PLV = 1,
} EegMethod;

typedef enum EegStatus {
  EEG_STATUS_OK = 0,
  EEG_STATUS_NULL_POINTER = 1,
  EEG_STATUS_INVALID_ARGUMENT = 2,
  EEG_STATUS_PARSE_ERROR = 3,
  EEG_STATUS_IO_ERROR = 4,
  EEG_STATUS_SIGNAL_ERROR = 5,
  EEG_STATUS_COMPUTE_ERROR = 6,
  EEG_STATUS_PANIC = 7,
} EegStatus;

// Opaque epoch x feature table.
typedef struct EegFeatures EegFeatures;

// Opaque phase-series handle.
typedef struct EegPhaseSeries EegPhaseSeries;

// Opaque recording handle.
typedef struct EegRecording EegRecording;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *eeg_last_error(void);

// Library version as a static NUL-terminated string.
const char *eeg_version(void);

// Parses an in-memory EDF image; annotation channels are dropped.
//
// # Safety
// `bytes` must point to `len` readable bytes, `subject_id` to a
// NUL-terminated string and `out` to writable storage for one pointer.
enum EegStatus eeg_recording_from_bytes(const uint8_t *bytes,
                                        size_t len,
                                        const char *subject_id,
                                        int32_t condition_id,
                                        struct EegRecording **out);

// Reads and parses an EDF file.
//
// # Safety
// `path` and `subject_id` must be NUL-terminated strings; `out` must be
// writable storage for one pointer.
enum EegStatus eeg_recording_load(const char *path,
                                  const char *subject_id,
                                  int32_t condition_id,
                                  struct EegRecording **out);

// # Safety
// `rec` must be null or a live handle.
size_t eeg_recording_n_channels(const struct EegRecording *rec);

// # Safety
// `rec` must be null or a live handle.
size_t eeg_recording_n_samples(const struct EegRecording *rec);

// # Safety
// `rec` must be null or a live handle.
double eeg_recording_sample_rate(const struct EegRecording *rec);

// Copies one channel (physical units) into `out`.
//
// # Safety
// `rec` must be a live handle and `out` must hold `capacity` doubles.
enum EegStatus eeg_recording_channel(const struct EegRecording *rec,
                                     size_t channel,
                                     double *out,
                                     size_t capacity);

// # Safety
// `rec` must be null or a handle not yet freed.
void eeg_recording_free(struct EegRecording *rec);

// Band-limits every channel (order-4 Butterworth, forward-backward) and
// extracts instantaneous phase. `band_id` is an [`EegBand`].
//
// # Safety
// `rec` must be a live handle; `out` writable storage for one pointer.
enum EegStatus eeg_band_phase(const struct EegRecording *rec,
                              int32_t band_id,
                              struct EegPhaseSeries **out);

// Same as [`eeg_band_phase`] for an arbitrary pass band and prototype order.
//
// # Safety
// `rec` must be a live handle; `out` writable storage for one pointer.
enum EegStatus eeg_band_phase_custom(const struct EegRecording *rec,
                                     double low_hz,
                                     double high_hz,
                                     size_t order,
                                     struct EegPhaseSeries **out);

// # Safety
// `ps` must be null or a live handle.
size_t eeg_phase_n_channels(const struct EegPhaseSeries *ps);

// # Safety
// `ps` must be null or a live handle.
size_t eeg_phase_n_samples(const struct EegPhaseSeries *ps);

// Copies the wrapped phase of one channel, radians in (−π, π].
//
// # Safety
// `ps` must be a live handle and `out` must hold `capacity` doubles.
enum EegStatus eeg_phase_channel(const struct EegPhaseSeries *ps,
                                 size_t channel,
                                 double *out,
                                 size_t capacity);

// # Safety
// `ps` must be null or a handle not yet freed.
void eeg_phase_free(struct EegPhaseSeries *ps);

// Connectivity features (strict upper triangle, row-major pair order) for
// every non-overlapping epoch of `window_s` seconds. `method_id` is an
// [`EegMethod`].
//
// # Safety
// `ps` must be a live handle; `out` writable storage for one pointer.
enum EegStatus eeg_features(const struct EegPhaseSeries *ps,
                            int32_t method_id,
                            double window_s,
                            struct EegFeatures **out);

// # Safety
// `f` must be null or a live handle.
size_t eeg_features_n_epochs(const struct EegFeatures *f);

// # Safety
// `f` must be null or a live handle.
size_t eeg_features_width(const struct EegFeatures *f);

// # Safety
// `f` must be a live handle and `out` must hold `capacity` doubles.
enum EegStatus eeg_features_row(const struct EegFeatures *f,
                                size_t epoch,
                                double *out,
                                size_t capacity);

// # Safety
// `f` must be null or a handle not yet freed.
void eeg_features_free(struct EegFeatures *f);

// Phase lag index of two phase sequences of length `n`.
//
// # Safety
// `a` and `b` must hold `n` doubles; `out` must be writable.
enum EegStatus eeg_pli(const double *a, const double *b, size_t n, double *out);

// Phase locking value of two phase sequences of length `n`.
//
// # Safety
// `a` and `b` must hold `n` doubles; `out` must be writable.
enum EegStatus eeg_plv(const double *a, const double *b, size_t n, double *out);

// `1 / (1 + ‖a − b‖)` for two feature vectors of length `n`.
//
// # Safety
// `a` and `b` must hold `n` doubles; `out` must be writable.
enum EegStatus eeg_similarity(const double *a, const double *b, size_t n, double *out);

// Equal error rate of a genuine/impostor score set (higher = more similar).
//
// # Safety
// The score arrays must hold the stated counts; `out` must be writable.
enum EegStatus eeg_eer(const double *genuine,
                       size_t n_genuine,
                       const double *impostor,
                       size_t n_impostor,
                       double *out);

// Area under the ROC curve: P(genuine > impostor) + ½ P(tie).
//
// # Safety
// The score arrays must hold the stated counts; `out` must be writable.
enum EegStatus eeg_auc(const double *genuine,
                       size_t n_genuine,
                       const double *impostor,
                       size_t n_impostor,
                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EEGPRINT_H */
