#include <stdio.h>
#include "cannings.h"
int main(void) {
    CanningsModel *m = NULL;
    const char *json = "{\"d\":2,\"N\":[4,6],\"law\":\"wright-fisher\",\"counts\":[[3,2],[1,4]]}";
    if (cannings_model_from_json(json, &m) != CANNINGS_STATUS_OK) return 1;
    CanningsMatrix *p = NULL;
    if (cannings_transition_matrix(m, 2, &p) != CANNINGS_STATUS_OK) return 2;
    char *s = NULL;
    cannings_matrix_entry_fraction(p, 2, 0, &s);
    printf("%s %s\n", cannings_version(), s);
    cannings_string_free(s);
    cannings_matrix_free(p);
    cannings_model_free(m);
    return 0;
}
