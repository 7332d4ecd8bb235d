"""Operator-norm slopes for every probe tag and the decay of the B operator.

Usage: python scripts/norm_probes.py [--length 10] [--n 31]
"""
import argparse

import numpy as np

from fracweak.elliptic import assemble_operator, eigensolve
from fracweak.kernels import DistributedOrder, MultiTerm, VariableOrder
from fracweak.verify import b_operator_norm, norm_slope_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=float, default=10.0)
    ap.add_argument("--n", type=int, default=31)
    args = ap.parse_args()

    prob = assemble_operator(1, args.n, lengths=[args.length])
    x = prob.points()[:, 0] / args.length
    V = VariableOrder(0.4 + 0.3 * x)
    D = DistributedOrder.builtin("uniform")
    M = MultiTerm((0.3, 0.7), (1.0, 1.0))
    cases = [("S0", V), ("S1", V), ("S0mu", D), ("S1mu", D), ("R0", M), ("R1", M),
             ("resolvent", V), ("resolvent", D), ("resolvent", M)]
    print(f"{'tag':>10} {'family':>16} {'small slope':>12} {'bound':>7} {'large slope':>12} "
          f"{'bound':>7} {'ok':>3}")
    for tag, kernel in cases:
        rep = norm_slope_probe(tag, prob, kernel)
        rows = {r.sample.split()[0]: r for r in rep.rows}
        s, l = rows["small-argument"], rows["large-argument"]
        print(f"{tag:>10} {type(kernel).__name__:>16} {s.measured:>12.3f} {s.tolerance:>7.3f} "
              f"{l.measured:>12.3f} {l.tolerance:>7.3f} {'yes' if rep.passed else 'no':>3}")

    H = eigensolve(prob, 5).vectors.T
    H = H / prob.norm(H)[:, None]
    rep = b_operator_norm(prob, M, sample_vectors=H)
    print("\n|B_R h| for the first eigenvector")
    for R, v in zip(rep.details["radii"], rep.details["norms"][:, 0]):
        print(f"R = {R:8.1e}: {v:.3e}")
    print(rep.summary())


if __name__ == "__main__":
    main()
