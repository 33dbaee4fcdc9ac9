/* Minimal C consumer of the compcap C ABI. */
#include <stdio.h>
#include <stdlib.h>

#include "compcap.h"

static const char *MACHINE =
    "[machine]\n"
    "name = tiny\n"
    "int_regs = 8\n"
    "vec_regs = 8\n"
    "pipeline_width = 2\n"
    "clock_mhz = 1000\n"
    "[instructions]\n"
    "4 cmd r,r 1\n";

int main(void) {
    CompcapSpectrum *fib = compcap_spectrum_new();
    compcap_spectrum_add(fib, 1, 1);
    compcap_spectrum_add(fib, 2, 1);
    double z0 = 0.0, rate = 0.0;
    if (compcap_solve_root(fib, 1e-12, &z0) != COMPCAP_STATUS_OK ||
        compcap_oracle_rate(fib, 200, &rate) != COMPCAP_STATUS_OK) {
        fprintf(stderr, "fib: %s\n", compcap_last_error());
        return 1;
    }
    compcap_spectrum_free(fib);
    printf("fib z0=%.9f oracle=%.9f\n", z0, rate);

    CompcapMachine *m = NULL;
    if (compcap_machine_parse(MACHINE, &m) != COMPCAP_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", compcap_last_error());
        return 1;
    }
    CompcapCapacity cap;
    compcap_machine_capacity(m, &cap);
    printf("tiny capacity=%.6f system_bps=%.1f\n", cap.capacity_per_cycle, cap.system_bps);

    char *table = NULL;
    if (compcap_sweep(m, "[single]\ntargets = int_regs\nfactors = 2\n", COMPCAP_FORMAT_CSV,
                      &table) != COMPCAP_STATUS_OK) {
        fprintf(stderr, "sweep: %s\n", compcap_last_error());
        return 1;
    }
    fputs(table, stdout);
    compcap_string_free(table);
    compcap_machine_free(m);

    CompcapMachine *bad = NULL;
    CompcapStatus status = compcap_machine_parse("[machine]\nname = x\n", &bad);
    printf("bad status=%d error=%s\n", (int)status, compcap_last_error());
    return status == COMPCAP_STATUS_PARSE ? 0 : 1;
}
