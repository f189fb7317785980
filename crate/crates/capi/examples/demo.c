/* Minimal consumer of the oneway C API: builds two qubit states, compares
 * trace distance and Helstrom optimum, and runs a compression round. */
#include <stdio.h>
#include <string.h>
#include "../include/oneway.h"

int main(void) {
    printf("oneway %s\n", oneway_version());

    const double zero[8] = {1, 0, 0, 0, 0, 0, 0, 0};
    const double one[8] = {0, 0, 0, 0, 0, 0, 1, 0};
    OnewayDensity *a = oneway_density_new(2, zero);
    OnewayDensity *b = oneway_density_new(2, one);
    if (!a || !b) return 1;

    double out = 0.0;
    if (oneway_trace_distance(a, b, &out) != ONEWAY_STATUS_OK) return 2;
    printf("trace distance |0><0| vs |1><1| = %.12f\n", out);
    if (out < 0.999999) return 3;

    if (oneway_helstrom_opt(0.5, a, 0.5, b, &out) != ONEWAY_STATUS_OK) return 4;
    printf("helstrom optimum = %.12f\n", out);

    const double probs[4] = {0.25, 0.25, 0.25, 0.25};
    OnewayJoint *j = oneway_joint_new(2, 2, probs);
    OnewayPlan *plan = oneway_plan_new(j, 0.1);
    if (!plan) return 5;
    uint64_t n = 0;
    uint32_t bits = 0;
    oneway_plan_info(plan, NULL, &n, &bits, NULL);
    printf("plan: N=%llu, bits=%u\n", (unsigned long long)n, bits);
    if (n != 3 || bits != 2) return 6;

    uint64_t message;
    size_t decoded;
    if (oneway_plan_run(plan, 0, 7, &message, &decoded) != ONEWAY_STATUS_OK) return 7;
    printf("compression run: message=%llu decoded=%zu\n",
           (unsigned long long)message, decoded);

    /* Error-message plumbing. */
    OnewayDensity *bad = oneway_density_new(2, (const double[8]){4, 0, 0, 0, 0, 0, 0, 0});
    if (bad != NULL) return 8;
    char buf[256];
    oneway_last_error_message(buf, sizeof buf);
    printf("expected failure: %s\n", buf);

    oneway_plan_free(plan);
    oneway_joint_free(j);
    oneway_density_free(a);
    oneway_density_free(b);
    puts("ok");
    return 0;
}
