"""Walkthrough: the two exact permanent oracles and where they stop scaling.

The naive expansion is the definition, trustworthy and O(n * n!); Ryser's
inclusion-exclusion with Gray-code updates reaches n = 22 on a laptop.
Having two independent routes to the same number is what lets the rest
of the package freeze reference values with confidence.
"""

import math
import time

import numpy as np

from psdperm import permanent_naive, permanent_ryser


def main() -> None:
    print("closed forms first: per(J_n) = n! for the all-ones matrix")
    for n in range(1, 9):
        got = permanent_ryser(np.ones((n, n))).value
        print(f"  n={n}: ryser = {got.real:>9.0f}, n! = {math.factorial(n):>9}")
        assert got == complex(math.factorial(n))

    print("\nrandom complex matrices: the two oracles must agree to roundoff")
    gen = np.random.Generator(np.random.Philox(key=np.array([42, 0], dtype=np.uint64)))
    for n in (4, 6, 8):
        M = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        a = permanent_naive(M).value
        b = permanent_ryser(M).value
        rel = abs(a - b) / abs(a)
        print(f"  n={n}: |naive - ryser| / |naive| = {rel:.2e}")

    print("\nscaling: Ryser at the size guard")
    for n in (16, 18, 20):
        M = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        t0 = time.perf_counter()
        res = permanent_ryser(M)
        dt = time.perf_counter() - t0
        print(f"  n={n}: log|per| = {res.log_abs:8.3f}, {dt:6.2f}s")
    print("(each +1 in n doubles the work; the n <= 22 guard is the point "
          "where patience runs out)")


if __name__ == "__main__":
    main()
