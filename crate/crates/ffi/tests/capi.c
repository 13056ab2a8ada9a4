#include <math.h>
#include <stdio.h>
#include <string.h>

#include "eegprint.h"

int main(void) {
    double a[4] = {0.0, 1.0, 2.0, 3.0};
    double b[4] = {-1.5707963267948966, -0.5707963267948966, 0.4292036732051034, 1.4292036732051034};
    double v = -1.0;
    if (eeg_pli(a, b, 4, &v) != EEG_STATUS_OK || v != 1.0) {
        return 1;
    }
    if (eeg_plv(a, b, 4, &v) != EEG_STATUS_OK || fabs(v - 1.0) > 1e-12) {
        return 2;
    }
    double g[2] = {0.9, 0.8};
    double i[2] = {0.1, 0.2};
    if (eeg_eer(g, 2, i, 2, &v) != EEG_STATUS_OK || v != 0.0) {
        return 3;
    }
    if (eeg_auc(g, 2, i, 2, &v) != EEG_STATUS_OK || v != 1.0) {
        return 4;
    }
    if (eeg_plv(a, b, 4, NULL) != EEG_STATUS_NULL_POINTER || eeg_last_error() == NULL) {
        return 5;
    }
    EegRecording *rec = NULL;
    if (eeg_recording_load("/nonexistent.edf", "S001", EEG_CONDITION_EYES_OPEN, &rec) != EEG_STATUS_IO_ERROR) {
        return 6;
    }
    printf("%s ok\n", eeg_version());
    return 0;
}
