#include <stdio.h>
#include "sqfree.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "failed: %s (%s)\n", #cond,          \
                    sqf_last_error() ? sqf_last_error() : "-");  \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    uint64_t gamma = 0;
    double sigma_x = 0.0;
    CHECK(sqf_gamma(10, &gamma, &sigma_x) == SQF_STATUS_OK);
    CHECK(gamma == 7);

    SqfRootSet *set = NULL;
    CHECK(sqf_roots_new(2, 11, &set) == SQF_STATUS_OK);
    CHECK(sqf_roots_len(set) == 2);
    uint64_t r = 0;
    CHECK(sqf_roots_get(set, 0, &r) == SQF_STATUS_OK && r == 3);
    sqf_roots_free(set);

    CHECK(sqf_lambda(2000, 1000, &r) == SQF_STATUS_NOT_COPRIME);
    CHECK(sqf_last_error() != NULL);

    SqfPrehod p;
    CHECK(sqf_prehod(17, 100, &p) == SQF_STATUS_OK);
    CHECK(p.lhs_num == -89 && p.lhs_den == 289 && p.equal);
    printf("ok\n");
    return 0;
}
