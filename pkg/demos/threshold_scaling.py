#!/usr/bin/env python3
"""The threshold f grows polynomially, with an exponent we can measure.

In one dimension f(N) = N^(1/4); for a d-dimensional body scaled by r
the exponent becomes d/(2(d+1)).  We fit both slopes from exact values.
"""

import math

import numpy as np

from apdisc import Polytope, f_K, f_of_N


def main():
    ns = [2 ** k for k in range(6, 13)]
    fs = [f_of_N((n,)).value for n in ns]
    slope = np.polyfit(np.log(ns), np.log(fs), 1)[0]
    print("1-D boxes N = 64..4096: fitted exponent %.4f (exact: 1/4)" % slope)

    rs = [4, 8, 16, 32, 64]
    fk = [f_K(Polytope([[0, 0], [r, 0], [0, r], [r, r]])).f_K for r in rs]
    slope = np.polyfit(np.log(rs), np.log(fk), 1)[0]
    print("2-D squares r = 4..64:  fitted exponent %.4f (target: 1/3)" % slope)

    r = f_K(Polytope([[1], [16]]))
    print("\nthe threshold is an exact rational: s* = %s for [1,16], "
          "attained: %s" % (r.s_star, r.attained))


if __name__ == "__main__":
    main()
