"""Command-line front end: ``permcirc amp|compile|verify|norm|bench``.

All commands parse the circuit file, run the normalization pass, and then work
on the normalized circuit, so the reported (k, h) pair is the same for every
backend. JSON results go to stdout; compile artifacts go to ``--output`` or
stdout. Exit codes: 0 ok, 1 verification disagreement, 2 parse/input error,
3 size cap exceeded, 4 cross-check mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from . import encoder as encoder_mod
from .circuit import (
    Circuit,
    format_basis_state,
    normalize,
    parse_basis_state,
    parse_circuit,
    random_circuit,
    serialize_circuit,
)
from .encoder import (
    EncodingStructureWarning,
    GadgetTemplate,
    encode,
    encode_poly,
    export_dense,
    export_dot,
    export_matrix_market,
)
from .errors import (
    BasisStateError,
    CircuitParseError,
    ConflictingBoundaryError,
    CrossCheckError,
    PermcircError,
    TooLargeError,
    TooManyQubitsError,
    TooManyVariablesError,
)
from .gf2poly import DEFAULT_VAR_LIMIT, count_gap, label_circuit, poly_to_text, substitute
from .permanent import (
    DEFAULT_SIZE_CAP,
    NAIVE_SIZE_CAP,
    gurvits_norm_report,
    per_glynn_exact,
    per_gurvits,
    per_naive,
    per_ryser,
)
from .statevector import MAX_QUBITS, DyadicAmplitude, amplitude, simulate

SCHEMA_VERSION = 1


def _load(path: str) -> tuple[Circuit, Circuit, int]:
    with open(path, "r", encoding="utf-8") as fh:
        circuit = parse_circuit(fh.read())
    ncirc, report = normalize(circuit)
    return circuit, ncirc, report.inserted_pairs


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _print_json(obj: dict) -> None:
    print(json.dumps(obj, indent=2))


# ---------------------------------------------------------------------------
# amp


def _cmd_amp(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    _, ncirc, inserted = _load(args.circuit)
    in_bits = parse_basis_state(args.in_bits, ncirc.q)
    out_bits = parse_basis_state(args.out_bits, ncirc.q)
    labeling = label_circuit(ncirc)
    sub = substitute(labeling, in_bits, out_bits)
    var_limit = max(DEFAULT_VAR_LIMIT, len(sub.free_vars)) if args.force_size else DEFAULT_VAR_LIMIT

    k: int | None = None
    matrix_size: int | None = None
    estimate: dict | None = None
    t1 = time.perf_counter()
    if args.backend == "sv":
        k = amplitude(ncirc, in_bits, out_bits).k
    elif args.backend == "count":
        k = 0 if sub.conflict else count_gap(sub.poly, sub.free_vars, limit=var_limit,
                                             threads=args.threads)
    else:
        if args.mode in ("subst", "substitution") and sub.conflict:
            k = 0 if args.backend == "perm-exact" else None
            if args.backend == "perm-mc":
                estimate = {"mean": 0.0, "stderr": 0.0, "amplitude_mean": 0.0,
                            "amplitude_stderr": 0.0, "samples": args.samples, "seed": args.seed}
        else:
            enc = encode(labeling, in_bits, out_bits, args.mode)
            matrix_size = enc.matrix.n
            if args.backend == "perm-exact":
                k = per_ryser(enc.matrix, force=args.force_size, threads=args.threads)
            else:
                est = per_gurvits(enc.matrix, args.samples, args.seed, threads=args.threads)
                scale = DyadicAmplitude(1, labeling.h).to_float()
                estimate = {
                    "mean": est.mean,
                    "stderr": est.stderr,
                    "amplitude_mean": est.mean * scale,
                    "amplitude_stderr": est.stderr * scale,
                    "samples": est.samples,
                    "seed": est.seed,
                }
    t2 = time.perf_counter()

    if args.cross_check and ncirc.q <= MAX_QUBITS:
        k_sv = amplitude(ncirc, in_bits, out_bits).k
        if k is not None and k != k_sv:
            raise CrossCheckError(
                f"backend {args.backend} returned k={k}, state-vector oracle says {k_sv}"
            )
        if estimate is not None:
            dev = abs(estimate["mean"] - k_sv)
            if dev > max(6.0 * estimate["stderr"], 1e-9):
                raise CrossCheckError(
                    f"MC mean {estimate['mean']} deviates from oracle k={k_sv} "
                    f"by {dev} > 6 stderr"
                )

    result = {
        "schema_version": SCHEMA_VERSION,
        "command": "amp",
        "backend": args.backend,
        "mode": args.mode if args.backend.startswith("perm") else None,
        "circuit": args.circuit,
        "in": format_basis_state(in_bits),
        "out": format_basis_state(out_bits),
        "h": labeling.h,
        "v": len(sub.free_vars),
        "conflict": sub.conflict,
        "matrix_size": matrix_size,
        "k": k,
        "amplitude": DyadicAmplitude(k, labeling.h).to_float() if k is not None else None,
        "estimate": estimate,
        "normalization": {"inserted_pairs": inserted},
        "timings": {"setup_s": t1 - t0, "evaluate_s": t2 - t1,
                    "total_s": time.perf_counter() - t0},
    }
    _print_json(result)
    return 0


# ---------------------------------------------------------------------------
# compile


def _cmd_compile(args: argparse.Namespace) -> int:
    _, ncirc, _ = _load(args.circuit)
    labeling = label_circuit(ncirc)
    has_boundary = args.in_bits is not None or args.out_bits is not None
    if has_boundary and (args.in_bits is None or args.out_bits is None):
        raise BasisStateError("--in and --out must be given together")
    if args.emit != "poly" and not has_boundary:
        raise BasisStateError(f"--emit {args.emit} requires --in and --out")

    if args.emit == "poly":
        if not has_boundary:
            _emit(poly_to_text(labeling.f_raw, labeling.labels), args.output)
            return 0
        sub = substitute(labeling, parse_basis_state(args.in_bits, ncirc.q),
                         parse_basis_state(args.out_bits, ncirc.q))
        if sub.conflict:
            _emit("conflict\n", args.output)
            return 0
        _emit(poly_to_text(sub.poly, labeling.labels), args.output)
        return 0

    in_bits = parse_basis_state(args.in_bits, ncirc.q)
    out_bits = parse_basis_state(args.out_bits, ncirc.q)
    try:
        enc = encode(labeling, in_bits, out_bits, args.mode)
    except ConflictingBoundaryError:
        _emit("conflict\n", args.output)
        return 0
    if args.emit == "matrix":
        _emit(export_matrix_market(enc.matrix), args.output)
    elif args.emit == "matrix-dense":
        _emit(export_dense(enc.matrix), args.output)
    else:
        _emit(export_dot(enc), args.output)
    return 0


# ---------------------------------------------------------------------------
# verify


@dataclass
class VerifyTrial:
    circuit_text: str
    circuit_sha: str
    in_bits: str
    out_bits: str
    k_sv: int
    gap: int
    per_subst: int
    per_graphfix: int
    agree: bool
    unitary_ok: bool
    v: int
    monomials: int
    subst_dim: int
    graphfix_dim: int
    size_bound_ok: bool


@dataclass
class VerifyReport:
    trials: list[VerifyTrial] = field(default_factory=list)

    @property
    def failures(self) -> list[VerifyTrial]:
        return [t for t in self.trials if not t.agree]

    @property
    def ok(self) -> bool:
        return all(t.agree for t in self.trials)


def _vertex_role_counts(labels: Sequence[str]) -> dict[str, int]:
    counts = {"gadget": 0, "force": 0, "mult": 0, "conflict": 0, "sign": 0}
    for lab in labels:
        if lab.startswith("force"):
            counts["force"] += 1
        elif lab.startswith("mult"):
            counts["mult"] += 1
        elif lab.startswith("conflict"):
            counts["conflict"] += 1
        elif lab == "sign":
            counts["sign"] += 1
        else:
            counts["gadget"] += 1
    return counts


def _tampered_quadratic() -> GadgetTemplate:
    return GadgetTemplate(block=((0, -1, 1), (-1, 0, 1), (1, 1, 2)), slots=(0, 1))


def run_verify(
    q,
    gates,
    trials: int,
    seed: int,
    pairs: int = 1,
    p_toffoli: float = 0.25,
    max_vars: int = DEFAULT_VAR_LIMIT,
    max_matrix: int = 30,
    threads: int = 1,
    post_norm_gate_range: tuple[int, int] | None = None,
    inject_bug: bool = False,
) -> VerifyReport:
    """Cross-check k_sv == gap == per(G_subst) == per(G_graphfix) on random instances.

    ``q`` may be an int or a sequence to draw from. Instances whose free-variable
    count or matrix dimensions exceed the limits (or whose post-normalization
    gate count falls outside ``post_norm_gate_range``, when given) are skipped
    and redrawn deterministically from the seeded stream.
    """
    q_choices = (q,) if isinstance(q, int) else tuple(q)
    rng = random.Random(seed)
    report = VerifyReport()
    original_quadratic = encoder_mod._TEMPLATES[2]
    if inject_bug:
        encoder_mod._TEMPLATES[2] = _tampered_quadratic
    try:
        attempts = 0
        while len(report.trials) < trials * pairs:
            attempts += 1
            if attempts > 1000 * trials:
                raise PermcircError("verify could not find instances within the limits")
            qt = rng.choice(q_choices)
            n_gates = gates if isinstance(gates, int) else rng.randint(*gates)
            circ = random_circuit(qt, n_gates, p_toffoli, rng.getrandbits(63))
            ncirc, _ = normalize(circ)
            if post_norm_gate_range is not None:
                lo, hi = post_norm_gate_range
                if not lo <= len(ncirc.gates) <= hi:
                    continue
            labeling = label_circuit(ncirc)
            text = serialize_circuit(ncirc)
            sha = hashlib.sha256(text.encode()).hexdigest()[:16]

            pending = []
            ok_instance = True
            for _ in range(pairs):
                in_bits = tuple(rng.randrange(2) for _ in range(qt))
                out_bits = tuple(rng.randrange(2) for _ in range(qt))
                sub = substitute(labeling, in_bits, out_bits)
                if len(sub.free_vars) > max_vars:
                    ok_instance = False
                    break
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", EncodingStructureWarning)
                    enc_gf = encode(labeling, in_bits, out_bits, "graph-fix")
                    enc_sub = None if sub.conflict else encode_poly(
                        sub.poly, sub.free_vars, labeling.h, var_labels=labeling.labels
                    )
                subst_dim = 0 if enc_sub is None else enc_sub.matrix.n
                if enc_gf.matrix.n > max_matrix or subst_dim > max_matrix:
                    ok_instance = False
                    break
                pending.append((in_bits, out_bits, sub, enc_gf, enc_sub))
            if not ok_instance:
                continue

            for in_bits, out_bits, sub, enc_gf, enc_sub in pending:
                state = simulate(ncirc, in_bits)
                from .circuit import bits_to_index

                k_sv = state.coeffs[bits_to_index(out_bits)]
                unitary_ok = state.squared_norm() == 1 << labeling.h
                if sub.conflict:
                    gap = 0
                    p_sub = 0
                else:
                    gap = count_gap(sub.poly, sub.free_vars, limit=max_vars, threads=threads)
                    p_sub = per_ryser(enc_sub.matrix, force=True, threads=threads)
                p_gf = per_glynn_exact(enc_gf.matrix, force=True, threads=threads)

                roles = _vertex_role_counts(enc_gf.vertex_labels)
                n_mono = len(labeling.f_raw.monomials)
                bound_ok = enc_gf.matrix.n <= 3 * n_mono + roles["force"] + roles["mult"] + roles["conflict"]
                if enc_sub is not None:
                    roles_s = _vertex_role_counts(enc_sub.vertex_labels)
                    bound_ok &= enc_sub.matrix.n <= (
                        3 * len(sub.poly.monomials)
                        + roles_s["mult"] + roles_s["sign"]
                    )
                report.trials.append(VerifyTrial(
                    circuit_text=text,
                    circuit_sha=sha,
                    in_bits=format_basis_state(in_bits),
                    out_bits=format_basis_state(out_bits),
                    k_sv=k_sv,
                    gap=gap,
                    per_subst=p_sub,
                    per_graphfix=p_gf,
                    agree=(k_sv == gap == p_sub == p_gf),
                    unitary_ok=unitary_ok,
                    v=len(sub.free_vars),
                    monomials=n_mono,
                    subst_dim=0 if enc_sub is None else enc_sub.matrix.n,
                    graphfix_dim=enc_gf.matrix.n,
                    size_bound_ok=bound_ok,
                ))
    finally:
        encoder_mod._TEMPLATES[2] = original_quadratic
    return report


def _witness(t: VerifyTrial) -> dict:
    return {
        "circuit": t.circuit_text,
        "circuit_sha": t.circuit_sha,
        "in": t.in_bits,
        "out": t.out_bits,
        "k_sv": t.k_sv,
        "gap": t.gap,
        "per_subst": t.per_subst,
        "per_graphfix": t.per_graphfix,
    }


def _cmd_verify(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    report = run_verify(
        q=args.q,
        gates=args.gates,
        trials=args.trials,
        seed=args.seed,
        pairs=args.pairs,
        p_toffoli=args.p_toffoli,
        max_vars=args.max_vars,
        max_matrix=args.max_matrix,
        threads=args.threads,
        inject_bug=args.inject_bug,
    )
    failures = report.failures
    result = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "q": args.q,
        "gates": args.gates,
        "trials": args.trials,
        "pairs": args.pairs,
        "seed": args.seed,
        "p_toffoli": args.p_toffoli,
        "checked": len(report.trials),
        "failures": len(failures),
        "agreement": not failures,
        "unitarity_ok": all(t.unitary_ok for t in report.trials),
        "size_bound_ok": all(t.size_bound_ok for t in report.trials),
        "max_graphfix_dim": max((t.graphfix_dim for t in report.trials), default=0),
        "max_subst_dim": max((t.subst_dim for t in report.trials), default=0),
        "failure_witnesses": [_witness(t) for t in failures],
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _print_json(result)
    if failures:
        for t in failures:
            print(
                f"DISAGREEMENT on circuit {t.circuit_sha} in={t.in_bits} out={t.out_bits}: "
                f"k_sv={t.k_sv} gap={t.gap} per_subst={t.per_subst} per_graphfix={t.per_graphfix}",
                file=sys.stderr,
            )
        return 1
    return 0


# ---------------------------------------------------------------------------
# norm


def _cmd_norm(args: argparse.Namespace) -> int:
    _, ncirc, _ = _load(args.circuit)
    in_bits = parse_basis_state(args.in_bits, ncirc.q)
    out_bits = parse_basis_state(args.out_bits, ncirc.q)
    labeling = label_circuit(ncirc)
    base = {
        "schema_version": SCHEMA_VERSION,
        "command": "norm",
        "circuit": args.circuit,
        "in": format_basis_state(in_bits),
        "out": format_basis_state(out_bits),
        "mode": args.mode,
        "h": labeling.h,
    }
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EncodingStructureWarning)
            enc = encode(labeling, in_bits, out_bits, args.mode)
    except ConflictingBoundaryError:
        _print_json({**base, "conflict": True, "matrix_size": None,
                     "norm": None, "scale": None, "subunit": None})
        return 0
    rep = gurvits_norm_report(enc)
    _print_json({**base, "conflict": False, "matrix_size": enc.matrix.n,
                 "norm": rep.norm, "scale": rep.scale, "subunit": rep.subunit})
    return 0


# ---------------------------------------------------------------------------
# bench


def _random_matrix(n: int, bound: int, seed: int, rep: int) -> list[list[int]]:
    import numpy as np

    key = np.array([seed & ((1 << 64) - 1), rep], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.integers(-bound, bound + 1, size=(n, n)).tolist()


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.n > DEFAULT_SIZE_CAP and not args.force_size:
        raise TooLargeError(
            f"n={args.n} exceeds the size cap of {DEFAULT_SIZE_CAP}; pass --force-size"
        )
    backends = ["naive", "ryser", "glynn"] if args.backend == "all" else [args.backend]
    if args.n > NAIVE_SIZE_CAP:
        backends = [b for b in backends if b != "naive"]
    rows_out = []
    agreement = True
    for rep in range(args.repeats):
        matrix = _random_matrix(args.n, args.entry_bound, args.seed, rep)
        values: dict[str, int] = {}
        for backend in backends:
            fn = {"naive": per_naive,
                  "ryser": lambda m: per_ryser(m, force=True, threads=args.threads),
                  "glynn": lambda m: per_glynn_exact(m, force=True, threads=args.threads)}[backend]
            start = time.perf_counter()
            values[backend] = fn(matrix)
            rows_out.append({"repeat": rep, "backend": backend,
                             "seconds": time.perf_counter() - start,
                             "value": values[backend]})
        # equality confirmation per repeat, whichever backend was timed
        check = {
            "ryser": values.get("ryser", per_ryser(matrix, force=True, threads=args.threads)),
            "glynn": values.get("glynn", per_glynn_exact(matrix, force=True, threads=args.threads)),
        }
        if args.n <= NAIVE_SIZE_CAP:
            check["naive"] = values.get("naive", per_naive(matrix))
        if len(set(check.values())) != 1:
            agreement = False
    result = {
        "schema_version": SCHEMA_VERSION,
        "command": "bench",
        "n": args.n,
        "backend": args.backend,
        "repeats": args.repeats,
        "seed": args.seed,
        "entry_bound": args.entry_bound,
        "agreement": agreement,
        "rows": rows_out,
    }
    _print_json(result)
    if not agreement:
        raise CrossCheckError("permanent kernels disagreed during bench")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_boundary_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--in", dest="in_bits", required=required, default=None,
                   metavar="BITS", help="input basis state; character i is qubit i")
    p.add_argument("--out", dest="out_bits", required=required, default=None,
                   metavar="BITS", help="output basis state")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permcirc",
        description="Toffoli-Hadamard amplitudes as matrix permanents, four cross-checking backends.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_amp = sub.add_parser("amp", help="compute one transition amplitude")
    p_amp.add_argument("--circuit", required=True, help="circuit file path")
    _add_boundary_flags(p_amp, required=True)
    p_amp.add_argument("--backend", choices=["sv", "count", "perm-exact", "perm-mc"],
                       default="sv")
    p_amp.add_argument("--mode", choices=["subst", "graph-fix"], default="graph-fix")
    p_amp.add_argument("--samples", type=int, default=100000)
    p_amp.add_argument("--seed", type=int, default=0)
    p_amp.add_argument("--threads", type=int, default=1)
    p_amp.add_argument("--force-size", action="store_true")
    p_amp.add_argument("--cross-check", action="store_true",
                       help="recompute via the state-vector oracle and fail loudly on mismatch")
    p_amp.set_defaults(func=_cmd_amp)

    p_comp = sub.add_parser("compile", help="emit intermediate artifacts")
    p_comp.add_argument("--circuit", required=True)
    _add_boundary_flags(p_comp, required=False)
    p_comp.add_argument("--emit", choices=["poly", "matrix", "matrix-dense", "dot"],
                        required=True)
    p_comp.add_argument("--mode", choices=["subst", "graph-fix"], default="graph-fix")
    p_comp.add_argument("--output", default=None, help="artifact file (default stdout)")
    p_comp.set_defaults(func=_cmd_compile)

    p_ver = sub.add_parser("verify", help="random cross-check sweep over all four backends")
    p_ver.add_argument("--q", type=int, default=2)
    p_ver.add_argument("--gates", type=int, default=6)
    p_ver.add_argument("--trials", type=int, default=50)
    p_ver.add_argument("--pairs", type=int, default=1, help="boundary pairs per circuit")
    p_ver.add_argument("--seed", type=int, default=7)
    p_ver.add_argument("--p-toffoli", type=float, default=0.25)
    p_ver.add_argument("--max-vars", type=int, default=DEFAULT_VAR_LIMIT)
    p_ver.add_argument("--max-matrix", type=int, default=30)
    p_ver.add_argument("--threads", type=int, default=1)
    p_ver.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    p_ver.set_defaults(func=_cmd_verify)

    p_norm = sub.add_parser("norm", help="scaled spectral-norm report for an encoding")
    p_norm.add_argument("--circuit", required=True)
    _add_boundary_flags(p_norm, required=True)
    p_norm.add_argument("--mode", choices=["subst", "graph-fix"], default="graph-fix")
    p_norm.set_defaults(func=_cmd_norm)

    p_bench = sub.add_parser("bench", help="time the permanent kernels on random matrices")
    p_bench.add_argument("--n", type=int, required=True)
    p_bench.add_argument("--backend", choices=["naive", "ryser", "glynn", "all"],
                         default="ryser")
    p_bench.add_argument("--repeats", type=int, default=3)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--entry-bound", type=int, default=3)
    p_bench.add_argument("--threads", type=int, default=1)
    p_bench.add_argument("--force-size", action="store_true")
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CircuitParseError, BasisStateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TooLargeError, TooManyVariablesError, TooManyQubitsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CrossCheckError as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
