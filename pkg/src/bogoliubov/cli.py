"""Command-line driver.

Exit codes: 0 success, 1 other library error, 2 violated positivity or
spectral precondition, 3 unreadable problem file, 4 quadrature failure,
5 renormalization criterion failed under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
import time
from dataclasses import replace

import numpy as np

from .criteria import criteria_report
from .diagonalize import diagonalize
from .energy import NORMAL_METHODS, WEYL_METHODS, energy_report, normal_energy
from .errors import (BogoliubovError, InvalidInput, PreconditionError,
                     QuadratureNotConverged)
from .io import (ProblemParseError, dumps_result, load_problem, problem_to_dict,
                 result_document)
from .quadrature import QuadratureConfig

EXIT_OK, EXIT_ERROR, EXIT_PRECONDITION, EXIT_PARSE, EXIT_QUADRATURE, EXIT_CRITERION = range(6)


class _Output:
    """Collects table rows, an optional CSV table, and the machine-readable results."""

    def __init__(self, title: str):
        self.title = title
        self.rows: list = []
        self.results: dict = {}
        self.csv_header = None
        self.csv_rows: list = []

    def add(self, name: str, value, key: str = None):
        self.rows.append((name, value))
        if key is not None:
            self.results[key] = value


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{v:.10g}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.10g}{v.imag:+.10g}j"
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=6, suppress_small=True, max_line_width=100)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def _render_table(out: _Output) -> str:
    lines = [out.title, "-" * len(out.title)]
    width = max((len(n) for n, _ in out.rows), default=0)
    for name, value in out.rows:
        text = _fmt(value)
        if "\n" in text:
            lines.append(f"{name}:")
            lines.extend("  " + t for t in text.splitlines())
        else:
            lines.append(f"{name:<{width}}  {text}")
    if out.csv_header:
        lines.append("")
        lines.append(_render_csv(out).rstrip("\n"))
    return "\n".join(lines) + "\n"


def _render_csv(out: _Output) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if out.csv_header:
        w.writerow(out.csv_header)
        for row in out.csv_rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])
    else:
        w.writerow(["quantity", "value"])
        for name, value in out.rows:
            w.writerow([name, _fmt(value)])
    return buf.getvalue()


def _cmd_diagonalize(pf, args, out: _Output):
    res = diagonalize(pf.problem)
    r = res.R.data
    out.add("R", r)
    out.results["R"] = r
    out.add("h_dg spectrum", res.frequencies, "frequencies")
    out.add("||R||", float(np.linalg.norm(r, 2)), "R_norm")
    out.add("symplectic residual", res.symplectic_residual, "symplectic_residual")
    out.add("off-diagonal residual", res.offdiag_residual, "offdiag_residual")
    out.add("a", res.a if res.a is not None else "not applicable", "a")
    bounds = res.norm_bounds()
    if bounds is not None:
        norm = float(np.linalg.norm(r, 2))
        out.add("norm lower-bound margin", norm - bounds[0], "norm_lower_margin")
        out.add("norm upper-bound margin", bounds[1] - norm, "norm_upper_margin")
    for note in res.notes:
        out.add("note", note)


def _cmd_energy(pf, args, out: _Output):
    methods = [m.strip() for m in args.methods.split(",")] if args.methods else None
    rep = energy_report(pf.problem, pf.quadrature, methods)
    for k, v in rep.e_weyl.items():
        out.add(f"E^w [{k}]", v)
    for k, v in rep.e_normal.items():
        out.add(f"E^n [{k}]", v)
    out.results["e_weyl"] = rep.e_weyl
    out.results["e_normal"] = rep.e_normal
    out.add("max pairwise discrepancy", rep.max_pairwise_discrepancy, "max_pairwise_discrepancy")
    out.results["discrepancies"] = {"weyl": rep.discrepancies("weyl"), "normal": rep.discrepancies("normal")}
    if rep.e_weyl and rep.e_normal:
        ew = next(iter(rep.e_weyl.values()))
        out.add("shift E^w - E^n", ew - next(iter(rep.e_normal.values())), "shift")
    if args.oracle:
        from .fock import ground_energy, oracle_ground_energy, quadratic_hamiltonian, build_basis
        if pf.fock_cutoff is not None and not pf.fock_auto:
            basis = build_basis(pf.problem.m, pf.fock_cutoff)
            e, cutoff = ground_energy(quadratic_hamiltonian(pf.problem, basis))[0], pf.fock_cutoff
        else:
            e, cutoff = oracle_ground_energy(pf.problem, tol=args.oracle_tol)
        ref = normal_energy(pf.problem, "fs1")
        out.add("oracle ground energy", e, "oracle_energy")
        out.add("oracle cutoff", cutoff, "oracle_cutoff")
        out.add("oracle - E^n [fs1]", e - ref, "oracle_discrepancy")


def _sweep(pf, args, out: _Output):
    from .renorm import e_ren
    from .io import _scalar_problem
    if pf.scalar_field is None:
        raise ProblemParseError("--sweep needs a 'scalar_field' block in the problem file")
    out.csv_header = ["K", "L0", "L1", "L2", "E_n", "E_ren"]
    rows = []
    for K in args.sweep:
        p = _scalar_problem(dict(pf.scalar_field, K=K))
        rep = e_ren(p, pf.quadrature, with_counterterms=False)
        row = [K, rep.loops[0], rep.loops[1], rep.loops[2], normal_energy(p, "fs1"), rep.e_ren_direct]
        out.csv_rows.append(row)
        rows.append(dict(zip(out.csv_header, row)))
        out.add(f"K={K} a1", rep.a1)
    out.results["sweep"] = rows


def _cmd_renorm(pf, args, out: _Output):
    from .renorm import e_ren, loop_expansion
    if args.sweep:
        _sweep(pf, args, out)
        return False
    exp = loop_expansion(pf.problem, args.max_loop, pf.quadrature)
    for j, (lj, s) in enumerate(zip(exp.terms, exp.partial_sums)):
        out.add(f"L{j}", lj)
        out.add(f"partial sum 0..{j}", s)
    out.results["loops"] = list(exp.terms)
    out.results["partial_sums"] = list(exp.partial_sums)
    out.add("E^w", exp.target, "e_weyl")
    rep = e_ren(pf.problem, pf.quadrature)
    out.add("E0", rep.E0, "E0")
    out.add("E1", rep.E1, "E1")
    out.add("E2", rep.E2, "E2")
    out.add("E^ren (direct)", rep.e_ren_direct, "e_ren_direct")
    out.add("E^ren (E^w - L0 - L1 - L2)", rep.e_ren_identity, "e_ren_identity")
    out.add("E^w - E0 - E1 - E2", rep.e_ren_counterterms, "e_ren_counterterms")
    out.add("a1", rep.a1, "a1")
    out.add("criterion failed", rep.criterion_failed, "criterion_failed")
    return rep.criterion_failed


def _cmd_criteria(pf, args, out: _Output):
    rep = criteria_report(pf.problem, args.s_minus, args.s_plus, pf.quadrature)
    for k, v in rep.as_dict().items():
        out.add(k, v, k)


def _cmd_fock_check(pf, args, out: _Output):
    from .diagonalize import diagonalize as diag
    from .fock import (build_basis, implementation_residual, implementer_group_check,
                       lowest_eigenpairs, ntau_and_iuy_checks, quadratic_hamiltonian,
                       vacuum_overlap)
    p = pf.problem
    cutoff = args.cutoff or pf.fock_cutoff or (64 if p.m == 1 else max(4, 24 // p.m))
    basis = build_basis(p.m, cutoff)
    res = diag(p)
    R = res.R.data
    out.add("cutoff", cutoff, "cutoff")
    out.add("basis size", basis.size, "basis_size")
    out.add("implementation residual", implementation_residual(R, basis), "implementation_residual")
    u00, expected = vacuum_overlap(R, basis)
    out.add("vacuum overlap", u00.real, "vacuum_overlap")
    out.add("vacuum overlap formula", expected, "vacuum_overlap_formula")
    _, group = implementer_group_check(R, R, basis)
    out.add("group residual (R, R)", group, "group_residual")
    vals, _ = lowest_eigenpairs(quadratic_hamiltonian(p, basis), k=min(4, basis.size))
    out.add("lowest eigenvalues", np.asarray(vals), "lowest_eigenvalues")
    out.add("E^n [fs1]", normal_energy(p, "fs1"), "e_normal")
    out.add("h_dg spectrum", res.frequencies, "frequencies")
    rng = np.random.default_rng(args.seed)
    window = basis.window(max(1, cutoff // 4))
    amps = np.zeros(basis.size, dtype=complex)
    amps[window] = rng.normal(size=window.size) + 1j * rng.normal(size=window.size)
    from .fock import StateVector
    rep = ntau_and_iuy_checks(p, StateVector(basis, amps), seed=args.seed)
    out.add("N_tau min margin", float(np.min(rep.ntau_margins)), "ntau_margin")
    out.add("key estimate margin", rep.iuy_margin, "iuy_margin")
    out.add("pairing positivity margin", rep.pairing_margin, "pairing_margin")


COMMANDS = {
    "diagonalize": (_cmd_diagonalize, "diagonalize the classical Hamiltonian"),
    "energy": (_cmd_energy, "vacuum energies by every formula"),
    "renorm": (_cmd_renorm, "loop expansion and renormalized energy"),
    "criteria": (_cmd_criteria, "magnitudes behind the existence criteria"),
    "fock-check": (_cmd_fock_check, "truncated Fock-space checks of the implementer"),
}


def _k_list(text: str):
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers") from None
    if not ks or min(ks) < 0:
        raise argparse.ArgumentTypeError("expected non-negative integers")
    return ks


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem file (JSON)")
    common.add_argument("--tol", type=float, default=None,
                        help="absolute tolerance of the tau quadrature (overrides the file)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", default=None, help="write the JSON result file here")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")

    parser = argparse.ArgumentParser(prog="bogoliubov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "energy":
            sp.add_argument("--methods", default=None,
                            help="comma-separated subset of " + ",".join(WEYL_METHODS + NORMAL_METHODS))
            sp.add_argument("--oracle", action="store_true", help="compare with the Fock-space ground energy")
            sp.add_argument("--oracle-tol", type=float, default=1e-6)
        elif name == "renorm":
            sp.add_argument("--max-loop", type=int, default=4)
            sp.add_argument("--sweep", type=_k_list, default=None, metavar="K1,K2,...",
                            help="run the scalar-field instance of the file at each cutoff K")
            sp.add_argument("--strict", action="store_true",
                            help="exit 5 when the well-definedness criterion a1 < 1 fails")
        elif name == "criteria":
            sp.add_argument("--s-minus", type=float, default=0.25)
            sp.add_argument("--s-plus", type=float, default=0.75)
        elif name == "fock-check":
            sp.add_argument("--cutoff", type=int, default=None)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        pf = load_problem(args.problem)
        if args.tol is not None:
            pf = replace(pf, quadrature=QuadratureConfig(pf.quadrature.tau_rule, pf.quadrature.tau_points,
                                                         pf.quadrature.sigma_points, args.tol))
        t_parse = time.perf_counter()
        out = _Output(f"{args.command}: {args.problem}")
        failed = COMMANDS[args.command][0](pf, args, out)
    except ProblemParseError as exc:
        print(f"error: {args.problem}: {exc}", file=stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"error: precondition violated ({type(exc).__name__}): {exc}", file=stderr)
        return EXIT_PRECONDITION
    except QuadratureNotConverged as exc:
        print(f"error: quadrature failed: {exc}", file=stderr)
        return EXIT_QUADRATURE
    except InvalidInput as exc:
        print(f"error: invalid input: {exc}", file=stderr)
        return EXIT_PARSE
    except BogoliubovError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=stderr)
        return EXIT_ERROR
    t_end = time.perf_counter()

    echo = pf.raw if pf.scalar_field is not None and "h" not in pf.raw else problem_to_dict(pf.problem, pf.quadrature)
    doc = result_document(args.command, echo, out.results,
                          {"parse_s": t_parse - t0, "compute_s": t_end - t_parse})
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps_result(doc))
    if args.format == "json":
        stdout.write(dumps_result(doc))
    elif args.format == "csv":
        stdout.write(_render_csv(out))
    else:
        stdout.write(_render_table(out))
    if failed and getattr(args, "strict", False):
        print("error: well-definedness criterion a1 < 1 failed", file=stderr)
        return EXIT_CRITERION
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
