"""Search admissible bookkeeping constants and print the stage ledger.

For each dimension parameter n, the staged search fixes the perturbation
decay rate c_s above its threshold 16 n + 24, then the cut-off scale c_n,
then the strip width scale c_lambda, and verifies every stage inequality
for m <= 40.  Also prints the excised-measure series and the truncation
lemma check.
"""

from twistmap.kamcheck import (
    check_cutoff_lemma,
    measure_sum,
    search_constants,
)

for n in (1, 2, 3):
    constants, ledger = search_constants(n, m_max=40)
    print(f"n={n}: c_s={constants.c_s:g}, c_n={constants.c_n:g}, "
          f"c_lambda=2^{constants.c_lambda.hex().split('p')[-1]}"
          f"  ledger={'PASS' if ledger.ok else 'FAIL'}")

constants, ledger = search_constants(2, m_max=40)
print("\nworst slack per stage (n=2):")
print(ledger.to_text())

ms = measure_sum(constants)
print(f"\nmeasure series: limit from sequences  = {ms.limit_from_sequences:.6e}")
print(f"                with bare a0 prefactor = {ms.limit_with_a0_prefactor:.6e}")
print(f"                sigma-part prefactors differ: {ms.prefactor_discrepancy}")

print("\ntruncation lemma at n=2, b=1.5, delta=0.2:")
for trunc, lhs, rhs, ok in check_cutoff_lemma(2, 1.5, 0.2, [10, 20, 40]):
    print(f"  N={trunc:3d}: tail={lhs:12.6g} <= bound={rhs:12.6g}  {ok}")
