#include <math.h>
#include <stdio.h>

#include "stable_rates.h"

static int fail(const char *what) {
    char msg[256];
    sr_last_error_message(msg, sizeof msg, NULL);
    fprintf(stderr, "%s: %s\n", what, msg);
    return 1;
}

int main(void) {
    double c = 0.0;
    if (sr_c_h(0.5, &c) != SR_STATUS_OK || fabs(c - sqrt(0.5)) > 1e-12) return fail("c_h");

    if (sr_sigma_h(0.9, 1e-10, &c) != SR_STATUS_OUT_OF_DOMAIN) return fail("sigma_h domain");

    SrFbmSampler *s = NULL;
    if (sr_fbm_sampler_new(32, 0.6, &s) != SR_STATUS_OK) return fail("sampler");
    double path[33];
    if (sr_fbm_sampler_sample(s, 1, 0, path, sr_fbm_sampler_len(s)) != SR_STATUS_OK) return fail("sample");
    sr_fbm_sampler_free(s);
    if (path[0] != 0.0) return fail("path start");

    SrReport *r = NULL;
    if (sr_run_experiment("{\"experiment\": \"lemma61\", \"n_ladder\": [32, 64, 128]}", &r) != SR_STATUS_OK)
        return fail("run");
    char csv[8192];
    if (sr_report_csv(r, SR_TABLE_RATES, csv, sizeof csv, NULL) != SR_STATUS_OK) return fail("csv");
    sr_report_free(r);

    puts("ok");
    return 0;
}
