#!/usr/bin/env python3
"""From a box to a low-discrepancy coloring, end to end.

We take the 1-D box of 512 points, build the gamma_2 certificate for the
family of all arithmetic progressions it contains, round the right
factor with the Gram-Schmidt walk, and compare the coloring's actual
discrepancy with the certificate's guarantee.
"""

import math

from apdisc import BoxSpec, ap_cert, f_of_N
from apdisc.walk import ap_family_disc, ap_family_size, gamma2_coloring


def main():
    box = BoxSpec((512,))
    fb = f_of_N(box.N)
    print("box %s: threshold f = %.4f (so the optimum is around N^(1/4))"
          % (box.N, fb.value))

    cert = ap_cert(box, mode="right")
    print("gamma_2 certificate value %.4f, ratio to f = %.2f"
          % (cert.value, cert.value / fb.value))

    m = ap_family_size(box)
    scale = math.sqrt(math.log(2 * m)) * cert.value
    print("family has %d progressions; walk guarantee scale %.2f" % (m, scale))

    for seed in (1, 2, 3):
        chi, rep = gamma2_coloring(
            None, cert, seed=seed,
            disc_fn=lambda c: ap_family_disc(box, c))
        print("  seed %d: disc = %d  (%.3f of the guarantee scale)"
              % (seed, rep["disc"], rep["disc"] / scale))


if __name__ == "__main__":
    main()
