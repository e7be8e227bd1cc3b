/* Exercises the C interface from a C translation unit. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "delayadm/delayadm.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(int argc, char** argv) {
  const double a[2] = {0.0, 0.0};
  const double a1[2] = {1.0, 0.0};
  const double lag = 1.0;
  dadm_system* sys = NULL;

  EXPECT(strlen(dadm_version()) > 0);
  EXPECT(dadm_system_create(1, a, 1, a1, &lag, 0, NULL, &sys) == DADM_OK);
  EXPECT(sys != NULL);

  size_t dim = 0;
  EXPECT(dadm_system_dim(sys, &dim) == DADM_OK && dim == 1);
  double omega0 = -1.0;
  EXPECT(dadm_system_omega0(sys, &omega0) == DADM_OK && fabs(omega0) < 1e-15);

  const double x[2] = {1.0, 0.0};
  double z[2] = {0.0, 0.0};
  EXPECT(dadm_simulate_head(sys, x, 2.0, 200, z) == DADM_OK);
  EXPECT(fabs(z[0] - 3.5) < 1e-5 && fabs(z[1]) < 1e-12);

  double norm = 0.0;
  EXPECT(dadm_semigroup_norm(sys, 0.0, 10, &norm) == DADM_OK && fabs(norm - 1.0) < 1e-12);

  /* The real characteristic root makes the resolvent singular. */
  double r = 0.0;
  EXPECT(dadm_resolvent_norm(sys, 0.5671432904097838, 0.0, 0.0, &r) == DADM_SINGULARITY_ERROR);
  EXPECT(strlen(dadm_last_error()) > 0);
  EXPECT(dadm_resolvent_norm(sys, -1.0, 0.0, 0.0, &r) == DADM_RANGE_ERROR);
  dadm_system_destroy(sys);

  const double bad_lag = 2.0;
  sys = NULL;
  EXPECT(dadm_system_create(1, a, 1, a1, &bad_lag, 0, NULL, &sys) == DADM_CONFIG_ERROR);
  EXPECT(sys == NULL);
  EXPECT(dadm_system_create(1, NULL, 0, NULL, NULL, 0, NULL, &sys) == DADM_INVALID_ARGUMENT);
  EXPECT(dadm_semigroup_norm(NULL, 0.0, 10, &norm) == DADM_INVALID_ARGUMENT);

  /* Scalar admissibility example through the closed form. */
  const double am[2] = {-1.0, 0.0};
  const double zero[2] = {0.0, 0.0};
  const double b[2] = {1.0, 0.0};
  EXPECT(dadm_system_create(1, am, 1, zero, &lag, 1, b, &sys) == DADM_OK);
  EXPECT(dadm_resolvent_norm(sys, 0.684, 0.0, 0.0, &r) == DADM_OK && fabs(r - 0.6104) < 1e-3);
  dadm_system_destroy(sys);

  if (argc > 2) {
    /* argv[1]: a golden simulate config, argv[2]: output directory. */
    int code = -1;
    EXPECT(dadm_run_experiment("simulate", argv[1], argv[2], -1, 1, NULL, &code) == DADM_OK);
    EXPECT(code == DADM_EXIT_PASS);
    char buf[256];
    size_t problems = 99;
    EXPECT(dadm_validate_config(argv[1], "", buf, sizeof buf, &problems) == DADM_OK);
    EXPECT(problems == 0 && buf[0] == '\0');
    EXPECT(dadm_validate_config(argv[1], "bounds", buf, sizeof buf, &problems) == DADM_OK);
    EXPECT(problems == 1 && strstr(buf, "invoked as") != NULL);
  }

  if (failures == 0) printf("c api: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
