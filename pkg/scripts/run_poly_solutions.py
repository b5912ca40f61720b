"""Print the exact polynomial solutions u(x, t) for data x^(2p), p = 1..8.

The uniform kernel's moment table is rational, so every coefficient below
is an exact fraction and the PDE residual check behind explicit_solution
is an exact identity. The leading coefficient in t follows the double
factorial law (2p-1)!! m2^p / p.

Run from the repository root:

    python3 scripts/run_poly_solutions.py [--family uniform --rho 1] [--p-max 8]
"""

from __future__ import annotations

import argparse

from nlheat import kernels, polysol


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--family", default="uniform",
                        choices=["uniform", "bump", "gaussian", "exptail"])
    parser.add_argument("--rho", type=float, default=1.0)
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--gamma0", type=float, default=1.0)
    parser.add_argument("--p-max", type=int, default=8)
    args = parser.parse_args()

    if args.family in ("uniform", "bump"):
        spec = kernels.KernelSpec(args.family, rho=args.rho)
    elif args.family == "gaussian":
        spec = kernels.gaussian(args.gamma)
    else:
        spec = kernels.exponential_tail(args.gamma0)

    table = kernels.moment_table(spec, max_order=2 * args.p_max)
    kind = "exact rational" if table.exact else "floating point"
    print(f"kernel: {args.family}; moment table {kind}\n")
    for p in range(1, args.p_max + 1):
        sol = polysol.explicit_solution(p, table)
        t_pow, lead = sol.leading_term()
        print(f"p = {p}  (leading term {lead} t^{t_pow})")
        print(f"  u = {sol.as_string()}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
