#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "heatsparse.h"

#define CHECK(call, want)                                                        \
    do {                                                                         \
        HsStatus s_ = (call);                                                    \
        if (s_ != (want)) {                                                      \
            const char *m_ = hs_last_error_message();                            \
            fprintf(stderr, "%s -> %d (%s)\n", #call, (int)s_, m_ ? m_ : "-");   \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    HsGraph *g = NULL;
    HsSparsifier *sp = NULL;
    CHECK(hs_graph_grid(20, 20, true, 7, &g), HS_STATUS_OK);
    size_t n = hs_graph_vertex_count(g);

    HsSparsifyOptions opt = hs_sparsify_options_default();
    opt.target_sigma2 = 20.0;
    opt.tree = HS_TREE_KIND_LOW_STRETCH;
    CHECK(hs_sparsify(g, &opt, &sp), HS_STATUS_OK);
    HsSparsifierStats st;
    CHECK(hs_sparsifier_stats(sp, &st), HS_STATUS_OK);

    double *b = malloc(n * sizeof(double));
    double *x = malloc(n * sizeof(double));
    signed char *signs = malloc(n);
    for (size_t i = 0; i < n; i++) b[i] = (double)(i % 7) - 3.0;
    HsSolveStats ss;
    CHECK(hs_solve(g, sp, b, x, n, 1e-6, 500, &ss), HS_STATUS_OK);
    HsPartitionStats ps;
    CHECK(hs_partition(g, sp, 8, 42, signs, n, &ps), HS_STATUS_OK);

    size_t p[1] = {0}, q[1] = {0};
    double w[1] = {1.0};
    HsGraph *bad = NULL;
    CHECK(hs_graph_new(2, p, q, w, 1, &bad), HS_STATUS_INVALID_GRAPH);
    if (bad != NULL || hs_last_error_message() == NULL) return 1;

    printf("version %s n %zu edges %zu sigma2 %.3f iters %zu residual %.3e balance %.3f\n", hs_version(), st.n,
           st.edge_count, st.sigma2_est, ss.iterations, ss.relative_residual, ps.balance_ratio);
    free(b);
    free(x);
    free(signs);
    hs_sparsifier_free(sp);
    hs_graph_free(g);
    return 0;
}
