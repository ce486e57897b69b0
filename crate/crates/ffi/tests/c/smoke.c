#include <math.h>
#include <stdio.h>
#include "phaseqkd.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            const char *msg = pq_last_error_message();               \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,  \
                    #cond, msg ? msg : "no message");                \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double bound = 0.0;
    CHECK(pq_detection_rate_bound(0.1, &bound) == PQ_STATUS_OK);
    CHECK(fabs(bound - 0.0122089) < 1e-6);
    CHECK(pq_detection_rate_bound(-0.1, &bound) == PQ_STATUS_INVALID_ARGUMENT);
    CHECK(pq_last_error_message() != NULL);

    PqPovm *povm = NULL;
    CHECK(pq_povm_new(0.1, 0.0, &povm) == PQ_STATUS_OK);
    PqComplex e0[PQ_POVM_DIM * PQ_POVM_DIM];
    CHECK(pq_povm_element(povm, PQ_OUTCOME_BIT0, e0) == PQ_STATUS_OK);
    pq_povm_free(povm);

    PqSecurityReport *report = NULL;
    CHECK(pq_security_report_new(0.146, 0.02, -1.0, &report) == PQ_STATUS_OK);
    PqSecurityValues v;
    CHECK(pq_security_report_values(report, &v) == PQ_STATUS_OK);
    CHECK(v.verdict_r == PQ_VERDICT_R_SECURE && v.verdict_p == PQ_VERDICT_P_BROKEN);
    char *json = NULL;
    CHECK(pq_security_report_to_json(report, &json) == PQ_STATUS_OK);
    pq_string_free(json);
    pq_security_report_free(report);

    PqRunConfig cfg = {100000, PQ_SOURCE_P, 0.1, 0.0, 0.0, PQ_ATTACK_UKD, 1.0, 3, 2};
    PqProtocolStats stats;
    CHECK(pq_run_protocol(&cfg, &stats) == PQ_STATUS_OK);
    CHECK(stats.sent == 100000 && stats.eve_agreement == 1.0);

    printf("ok %s\n", pq_version());
    return 0;
}
