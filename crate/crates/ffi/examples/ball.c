/* cc -Icrates/ffi/include crates/ffi/examples/ball.c target/release/libsteklov_ffi.a -lpthread -ldl -lm */
#include <stdio.h>
#include <string.h>
#include "steklov.h"

int main(void) {
    SteklovTree *tree = NULL;
    if (steklov_tree_generate("{\"family\":\"BALL\",\"D\":3,\"r\":4}", &tree) != STEKLOV_STATUS_OK) {
        fprintf(stderr, "%s\n", steklov_last_error());
        return 1;
    }
    double lambda2 = 0.0;
    steklov_eigenvalue(tree, 2, &lambda2);
    printf("|V|=%zu |boundary|=%zu lambda_2=%.15f\n", steklov_tree_vertex_count(tree),
           steklov_tree_boundary_count(tree), lambda2);

    char *json = NULL;
    SteklovStatus st = steklov_bounds_json(tree, NULL, 0, &json);
    printf("bounds status %d, report %zu bytes\n", (int)st, json ? strlen(json) : 0);
    steklov_string_free(json);
    steklov_tree_free(tree);
    return st == STEKLOV_STATUS_OK ? 0 : 1;
}
