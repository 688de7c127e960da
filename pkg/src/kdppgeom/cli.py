"""Command-line front end.

Exit codes: 0 ok, 2 input, 3 degenerate stratum, 4 singular kernel,
5 boundary MLE, 6 capacity, 7 not a projection.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .combinatorics import SubsetIndex, enumerate_subsets
from .dpp import dpp_distribution, dpp_probability
from .errors import DomainError, KdppError, KernelFileError, SingularKernelError
from .exterior import compound, inclusion_routes, plucker_check, projection_frame
from .identifiability import (
    InvarianceTransform,
    apply_invariance,
    check_kdpp_invariance,
    identifiability_report,
    sample_commuting_rotation,
)
from .kdpp import fisher_information, kdpp_distribution
from .kernelfile import kernel_to_json, load_kernel, parse_subset_line
from .linalg import as_kernel, eig_sym, rank_and_nullspace
from .mle import FitConfig, draw_from_table, fit


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, allow_nan=False))


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise DomainError(f"bad {what} list {text!r}") from exc


def _subset(text: str, n: int) -> SubsetIndex:
    try:
        els = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise DomainError(f"bad subset {text!r}") from exc
    return SubsetIndex.of(els, n)


def cmd_prob(args) -> int:
    kf = load_kernel(args.kernel)
    L = as_kernel(kf.matrix)
    n = L.shape[0]
    if args.subset is not None:
        a = _subset(args.subset, n)
        if args.full:
            rows = [(a, dpp_probability(L, a))]
        else:
            if a.k != args.k:
                raise DomainError(f"subset {a} does not have size k={args.k}")
            rows = [(a, kdpp_distribution(L, args.k).prob(a))]
    elif args.full:
        d = dpp_distribution(L)
        rows = list(zip(d.subsets, d.probs))
    else:
        d = kdpp_distribution(L, args.k)
        rows = list(zip(d.subsets, d.probs))

    if args.json:
        recs = [{"subset": list(a.elements), "prob": float(p)} for a, p in rows]
        _emit(recs[0] if args.subset is not None else recs)
    else:
        for a, p in rows:
            print(f"{a}\t{float(p):.12g}")
    return 0


def cmd_fisher(args) -> int:
    if args.theta is not None:
        theta = np.array(_floats(args.theta, "theta"))
    elif args.kernel is not None:
        kf = load_kernel(args.kernel)
        spec = kf.spectral or eig_sym(kf.matrix)
        n = spec.lambdas.size
        if np.max(np.abs(np.abs(spec.u) - np.eye(n))) > 1e-10:
            print("warning: eigenvectors are not the identity; using eigenvalues only "
                  "(diagonal-orientation model)", file=sys.stderr)
        if np.any(spec.lambdas <= 0):
            raise SingularKernelError("log-eigenvalue coordinates need strictly positive eigenvalues")
        theta = np.log(spec.lambdas)
    else:
        raise DomainError("give a kernel file or --theta")
    fm = fisher_information(theta, args.k)
    rr = rank_and_nullspace(fm.g)
    _emit({
        "n": int(theta.size),
        "k": args.k,
        "theta": theta.tolist(),
        "eta": fm.eta.tolist(),
        "G": fm.g.tolist(),
        "eigvals_G": np.linalg.eigvalsh(fm.g).tolist(),
        "rank": rr.rank,
    })
    return 0


def cmd_identifiability(args) -> int:
    kf = load_kernel(args.kernel)
    rep = identifiability_report(kf.matrix, args.k)
    out = rep.summary()
    if args.emit_basis:
        dirs = [kernel_to_json(h, name=f"direction {i + 1}") for i, h in enumerate(rep.basis_v)]
        Path(args.emit_basis).write_text(json.dumps(dirs, indent=2), encoding="utf-8")
        out["basis_file"] = str(args.emit_basis)
    _emit(out)
    return 0


def cmd_invariance(args) -> int:
    kf = load_kernel(args.kernel)
    L = as_kernel(kf.matrix)
    n = L.shape[0]
    out = {"k": args.k}
    if args.against:
        M = as_kernel(load_kernel(args.against).matrix)
        if M.shape != L.shape:
            raise DomainError("kernels have different sizes")
        out["mode"] = "against"
    else:
        spec = eig_sym(L)
        flips = np.ones(n) if args.flip is None else np.array(_floats(args.flip, "flip"))
        if flips.size != n:
            raise DomainError(f"flip vector has length {flips.size}, expected {n}")
        q = np.eye(n) if args.rotate_seed is None else sample_commuting_rotation(spec.lambdas, args.rotate_seed)
        t = InvarianceTransform(args.scale, flips, q)
        M, closed = apply_invariance(spec, t)
        out.update({
            "mode": "transform",
            "scale": args.scale,
            "flip": flips.astype(int).tolist(),
            "rotate_seed": args.rotate_seed,
            "closed_form_deviation": float(np.max(np.abs(M - closed))),
        })
    rep = check_kdpp_invariance(L, M, args.k)
    out.update({"tv": rep.tv, "tol": 1e-10, "passed": rep.passed})
    _emit(out)
    return 0


def read_data_file(path, n: int) -> list[SubsetIndex]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise KernelFileError(f"cannot read {path}: {exc}") from exc
    out = []
    for line in lines:
        els = parse_subset_line(line)
        if els is not None:
            out.append(SubsetIndex.of(els, n))
    return out


def cmd_fit(args) -> int:
    data = read_data_file(args.data, args.n)
    cfg = FitConfig(
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        step_rule=args.step_rule,
        step_size=args.step_size,
        init=args.init,
    )
    res = fit(data, args.k, cfg)
    out = {"n": args.n, "k": args.k, "num_observations": len(data)}
    out.update(res.to_dict())
    _emit(out)
    return 0


def cmd_draw(args) -> int:
    kf = load_kernel(args.kernel)
    dist = kdpp_distribution(kf.matrix, args.k)
    for a in draw_from_table(dist, args.size, args.seed):
        print(",".join(map(str, a.elements)))
    return 0


def cmd_exterior(args) -> int:
    kf = load_kernel(args.kernel)
    if args.plucker:
        K = kf.matrix
        v = projection_frame(K)
        subsets = enumerate_subsets(4, 2)
        direct = np.array([np.linalg.det(K[np.ix_(s.indices, s.indices)]) for s in subsets])
        lifted = np.diag(compound(K, 2).entries)
        rep = plucker_check(v)
        _emit({
            "k": 2,
            "subsets": [list(s.elements) for s in subsets],
            "inclusion_direct": direct.tolist(),
            "inclusion_exterior": lifted.tolist(),
            "max_deviation": float(np.max(np.abs(direct - lifted))),
            "plucker": {
                "p": {f"{i}{j}": val for (i, j), val in rep.p.items()},
                "relation_residual": rep.relation_residual,
                "sqrt_residual": rep.sqrt_residual,
                "passed": rep.passed,
            },
        })
        return 0
    L = as_kernel(kf.matrix)
    n = L.shape[0]
    if not 1 <= args.k <= n:
        raise DomainError(f"order k={args.k} outside 1..{n}")
    direct, lifted = inclusion_routes(L, args.k)
    _emit({
        "k": args.k,
        "subsets": [list(s.elements) for s in enumerate_subsets(n, args.k)],
        "inclusion_direct": direct.tolist(),
        "inclusion_exterior": lifted.tolist(),
        "max_deviation": float(np.max(np.abs(direct - lifted))),
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdppgeom", description="Exact DPP / k-DPP analysis")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prob", help="subset probabilities under the DPP or k-DPP")
    p.add_argument("kernel")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--full", action="store_true", help="unconditional DPP")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--subset", help='1-based elements, e.g. "1,3"')
    g.add_argument("--table", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("fisher", help="mean parameter and Fisher matrix of the diagonal k-DPP")
    p.add_argument("kernel", nargs="?")
    p.add_argument("--theta", help="comma-separated log-eigenvalues")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("identifiability", help="dimension of first-order invisible directions")
    p.add_argument("kernel")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--emit-basis", metavar="PATH")
    p.set_defaults(func=cmd_identifiability)

    p = sub.add_parser("invariance", help="check a scale/sign/rotation transform preserves the k-DPP")
    p.add_argument("kernel")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--flip", help='signs, e.g. "1,-1,1"')
    p.add_argument("--rotate-seed", type=int)
    p.add_argument("--against", help="compare with a second kernel file instead")
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("fit", help="MLE of the diagonal k-DPP")
    p.add_argument("data", help="one subset per line, comma-separated, 1-based, '#' comments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--step-rule", choices=["fixed", "backtracking"], default="backtracking")
    p.add_argument("--step-size", type=float, default=1.0)
    p.add_argument("--init", choices=["zeros", "moment_match"], default="zeros")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("draw", help="seeded exact draws from a k-DPP table (data-file format)")
    p.add_argument("kernel")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_draw)

    p = sub.add_parser("exterior", help="inclusion probabilities via the compound of K")
    p.add_argument("kernel")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--plucker", action="store_true",
                   help="treat the file as a rank-2 projection K on n=4 and check Plucker relations")
    p.set_defaults(func=cmd_exterior)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KdppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return SingularKernelError.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
