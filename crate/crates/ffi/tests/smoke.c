#include <math.h>
#include <stdio.h>
#include "ontic.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    OnticPermutation *wheel = NULL;
    CHECK(ontic_permutation_cogwheel(6, &wheel) == ONTIC_STATUS_OK);
    CHECK(ontic_permutation_dim(wheel) == 6);

    uint64_t period = 0;
    CHECK(ontic_permutation_period(wheel, &period) == ONTIC_STATUS_OK);
    CHECK(period == 6);

    double phases[6];
    CHECK(ontic_permutation_eigenphases(wheel, ONTIC_BRANCH_ZERO_TO_TWO_PI, phases) == ONTIC_STATUS_OK);
    for (int k = 0; k < 6; k++) {
        CHECK(fabs(phases[k] - 2.0 * M_PI * k / 6.0) < 1e-9);
    }

    double psi[12] = {0};
    double out[12];
    psi[4] = 1.0;
    CHECK(ontic_permutation_evolve(wheel, psi, 6, 3, out) == ONTIC_STATUS_OK);
    CHECK(out[10] == 1.0);
    ontic_permutation_free(wheel);

    size_t bad[2] = {0, 0};
    OnticPermutation *broken = NULL;
    CHECK(ontic_permutation_from_table(bad, NULL, 2, &broken) == ONTIC_STATUS_NOT_INVERTIBLE);
    char msg[128];
    CHECK(ontic_last_error_message(msg, sizeof msg) > 0);

    OnticChsh chsh;
    CHECK(ontic_bell_chsh(0.0, M_PI / 4, M_PI / 8, 3 * M_PI / 8, ONTIC_METHOD_QUADRATURE, 256, 0, &chsh) ==
          ONTIC_STATUS_OK);
    CHECK(chsh.classical_bound == 2.0);
    CHECK(fabs(chsh.s - (chsh.ab.value - chsh.abp.value + chsh.apb.value + chsh.apbp.value)) < 1e-12);

    printf("ok %s\n", ontic_version());
    return 0;
}
