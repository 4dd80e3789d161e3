"""Independent 50-digit evaluation of the finite-blocklength approximation.

Regenerates the reference values frozen in tests/test_fbl.py: block error
probabilities at a few (sinr, D, R) points and the minimum blocklength
over the sinr x D x eps grid by exhaustive search. Needs mpmath.
"""

import mpmath as mp

mp.mp.dps = 50

POINTS = [(100, 50, 20), (10, 50, 20), (10, 50, 15), (1, 10, 12), (1, 200, 150), (3, 50, 30)]
DELTAS = (1, 10, 100)
PAYLOADS = (10, 50, 200)
TARGETS = ("1e-1", "1e-2", "1e-3", "1e-4", "1e-5")


def block_error(delta, d, r):
    delta = mp.mpf(delta)
    c = mp.log(1 + delta, 2)
    v = (1 - 1 / (1 + delta) ** 2) * mp.log(mp.e, 2) ** 2
    x = (c * r - d) / mp.sqrt(v * r)
    return mp.erfc(x / mp.sqrt(2)) / 2


def min_blocklength(delta, d, eps):
    r = 1
    while block_error(delta, d, r) > eps:
        r += 1
    return r


def main():
    for p in POINTS:
        print(p, mp.nstr(block_error(*p), 17))
    for delta in DELTAS:
        rows = [[min_blocklength(delta, d, mp.mpf(e)) for e in TARGETS] for d in PAYLOADS]
        print(f"delta={delta}", rows)
    print("Q(1.2815515655) =", mp.nstr(mp.erfc(mp.mpf("1.2815515655") / mp.sqrt(2)) / 2, 17))


if __name__ == "__main__":
    main()
