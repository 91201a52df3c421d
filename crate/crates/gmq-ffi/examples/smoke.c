/* Minimal consumer of the C ABI. Build with:
 *
 *   cargo build -p gmq-ffi
 *   cc -I crates/gmq-ffi/include crates/gmq-ffi/examples/smoke.c \
 *      target/debug/libgmq_ffi.a -lm -lpthread -ldl -o gmq_smoke
 */
#include "gmq.h"
#include <math.h>
#include <stdio.h>

int main(void) {
    double x[40], y[40];
    for (int i = 0; i < 40; i++) {
        x[i] = (i - 19.5) * 0.1;
        y[i] = 2.0 * x[i];
    }

    GmqFitResult *fit = NULL;
    GmqStatus status = gmq_fit(x, 40, 1, y, false, GMQ_LOSS_FAMILY_GMQ,
                               0.7, 1e-3, 2.0, NULL, &fit);
    if (status != GMQ_STATUS_OK) {
        fprintf(stderr, "fit failed: %s\n", gmq_status_message(status));
        return 1;
    }
    double slope = 0.0;
    gmq_fit_result_coefficients(fit, &slope, 1);
    printf("converged=%d iterations=%zu slope=%.6f\n",
           gmq_fit_result_converged(fit),
           gmq_fit_result_iterations(fit), slope);
    gmq_fit_result_free(fit);

    double u[3] = {-1.0, 0.0, 1.0}, g[3];
    gmq_grad_eval(GMQ_LOSS_FAMILY_GMQ, 0.9, 0.1, 2.0, u, 3, g);
    printf("gradient at 0 for tau=0.9: %.4f\n", g[1]);
    printf("default shape for n=1000, p=50: %.6f\n", gmq_default_c(1000, 50));

    return fabs(slope - 2.0) < 1e-2 ? 0 : 2;
}
