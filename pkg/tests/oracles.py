"""Reference computations written independently of the package internals.

Every quantity here is a direct sum of bra-ket products, so it shares no
index tables, rotations or shortcuts with the code under test.
"""

import numpy as np

ALIGNED, SWAPPED, COMBINED = 0, 1, 2
KIND_CODES = {"aligned": ALIGNED, "swapped": SWAPPED, "combined": COMBINED}


def brute_lhs(rho, ua, ub, d, kind):
    """Direct bra-ket sums, independent of the index tables in the kernels."""
    total = 0.0
    for a in range(d):
        for ap in range(d):
            if a == ap:
                continue
            if kind == ALIGNED:
                pairs = [((a, a), (ap, ap))]
            elif kind == SWAPPED:
                pairs = [((ap, a), (a, ap))]
            else:
                pairs = [((ap, b), (a, bp)) for b in range(d) for bp in range(d) if b != bp]
            for (i, j), (k, l) in pairs:
                bra = np.kron(ua[:, i], ub[:, j])
                ket = np.kron(ua[:, k], ub[:, l])
                total += abs(bra.conj() @ rho @ ket)
    return total


def brute_measure(rho, ua, ub, d, offset):
    total = 0.0
    for a in range(d):
        for ap in range(d):
            for b in range(d):
                for bp in range(d):
                    if a != ap and b != bp:
                        bra = np.kron(ua[:, a], ub[:, b])
                        ket = np.kron(ua[:, ap], ub[:, bp])
                        total += max(abs(bra.conj() @ rho @ ket) - offset, 0.0)
    return total


def element(rho, ua, ub, a, b, ap, bp):
    """``<u_a v_b| rho |u_a' v_b'>``."""
    return np.kron(ua[:, a], ub[:, b]).conj() @ rho @ np.kron(ua[:, ap], ub[:, bp])
