"""Command-line driver.

Usage::

    rieszcone <command> --cone spec.json [--chi ...] [--theta ...] [--seed N]
              [--samples N] [--streams K] [--out DIR] [--format csv|summary]

Commands: ``describe``, ``check-axioms``, ``gindikin``, ``gamma``, ``sample``,
``verify-laplace``, ``verify-moments``, ``classify-orbit``.

The cone spec is a JSON document::

    {"elements": ["1", "2", "3", "4"],
     "relations": [["1", "3"], ["1", "4"], ["2", "3"]],
     "dims": {"3|1": 1},
     "structure": "scalar",
     "chi": {"1": 1, "2": 1, "3": 2, "4": 1},
     "theta": {"1": [1.0], "2": [1.0], "3": [1.0], "4": [1.0]}}

``relations`` lists strict pairs ``a < b``. ``structure`` is ``"scalar"`` or
``{"products": {"i|j|k": tensor}, "involutions": {"i|j": matrix}}``.
``chi`` maps labels to numbers (or lists values in element order) and
``theta`` uses the element serialization (keys ``"i"`` and ``"i|j"``).
Both can be overridden on the command line with inline JSON or ``@file``.

Reports
-------
Every command except ``sample`` emits rows with the fixed columns
``quantity, closed_form, estimate, stderr, z, tolerance, pass``;
``verify-moments`` uses ``quantity, closed_form, fd, mc, stderr, rel_err, z,
tolerance, pass``. Numbers carry 17 significant digits. ``sample`` emits one
JSON object per draw (or a CSV of flattened coordinates). With ``--out`` both
``<command>.csv`` and ``<command>.txt`` are written and the chosen format is
also printed.

Exit status: 0 when every check passes, 1 when a check fails (the report is
still written), 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .algebra import AlgebraElement, StructureConstants, axiom_check, build_algebra
from .errors import CheckFailed, NotInClosure, RieszConeError, SpecError
from .gindikin import classify_measure, is_absolutely_continuous
from .nef import RieszFamily, verification_oracles
from .poset import parse_poset, structure_sets
from .power import as_multiplier, log_gamma_cone, log_gamma_orbit, n_profile
from .sampling import (
    log_laplace_closed,
    make_rng,
    mc_laplace,
    random_dual_points,
    sample_riesz,
)
from .triangular import OrbitSignature, classify_orbit

REPORT_COLUMNS = ("quantity", "closed_form", "estimate", "stderr", "z", "tolerance", "pass")
MOMENT_COLUMNS = ("quantity", "closed_form", "fd", "mc", "stderr", "rel_err", "z", "tolerance", "pass")
COMMANDS = (
    "describe", "check-axioms", "gindikin", "gamma", "sample",
    "verify-laplace", "verify-moments", "classify-orbit",
)
# stream id reserved for test points, far from the sampling block ids
POINT_STREAM = 2**40


# ----------------------------------------------------------------------
# input
# ----------------------------------------------------------------------
def _load_json(text: str, what: str):
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise SpecError(f"cannot read {what}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{what} is not valid JSON: {exc}") from exc


def _structure(doc) -> StructureConstants:
    st = doc.get("structure", "scalar")
    if st == "scalar" or st is None:
        return StructureConstants.scalar()
    if not isinstance(st, Mapping):
        raise SpecError("structure must be 'scalar' or an object")
    unknown = set(st) - {"products", "involutions"}
    if unknown:
        raise SpecError(f"unknown structure keys: {sorted(unknown)}")
    prods = {k: np.asarray(v, dtype=float) for k, v in st.get("products", {}).items()}
    invs = {k: np.asarray(v, dtype=float) for k, v in st.get("involutions", {}).items()}
    return StructureConstants(products=prods, involutions=invs)


def load_cone(source):
    """Parse a cone spec (path, JSON text or mapping) into ``(algebra, doc)``.

    Raises
    ------
    SpecError
    """
    doc = source
    if isinstance(source, (str, Path)):
        path = Path(source)
        if path.exists():
            doc = _load_json(path.read_text(), "cone spec")
        else:
            doc = _load_json(str(source), "cone spec")
    if not isinstance(doc, Mapping):
        raise SpecError("cone spec must be a JSON object")
    p = parse_poset(doc)
    dims = doc.get("dims") or {}
    if not isinstance(dims, Mapping):
        raise SpecError("dims must map 'i|j' to positive integers")
    try:
        alg = build_algebra(p, dims, _structure(doc))
    except RieszConeError as exc:
        raise SpecError(str(exc)) from exc
    return alg, doc


def _chi(alg, doc, override):
    raw = _load_json(override, "chi") if override is not None else doc.get("chi")
    if raw is None:
        raise SpecError("no multiplier: pass --chi or set 'chi' in the cone spec")
    if not isinstance(raw, (Mapping, list)):
        raise SpecError("chi must be an object or a list")
    return as_multiplier(alg, raw)


def _element(alg, raw, what) -> AlgebraElement:
    if not isinstance(raw, Mapping):
        raise SpecError(f"{what} must use the element serialization")
    try:
        return AlgebraElement(alg, alg.from_dict(raw))
    except (KeyError, ValueError) as exc:
        raise SpecError(f"bad {what}: {exc}") from exc


def _theta(alg, doc, override):
    raw = _load_json(override, "theta") if override is not None else doc.get("theta")
    if raw is None:
        return alg.unit
    return _element(alg, raw, "theta")


def _seed(args) -> int:
    if args.seed is None:
        raise SpecError(f"{args.command} draws random samples and needs --seed")
    return args.seed


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------
def fmt(v) -> str:
    """17 significant digits for floats, lowercase booleans, text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def to_csv(rows: Sequence[Mapping], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _row(quantity, closed_form=None, estimate=None, stderr=None, z=None, tolerance=None, ok=True):
    return {"quantity": quantity, "closed_form": closed_form, "estimate": estimate,
            "stderr": stderr, "z": z, "tolerance": tolerance, "pass": bool(ok)}


class Report:
    """Rows, summary lines and an aggregate status for one command."""

    def __init__(self, command: str, columns=REPORT_COLUMNS):
        self.command = command
        self.columns = columns
        self.rows: list[dict] = []
        self.lines: list[str] = []
        self.verdict: bool | None = None

    @property
    def ok(self) -> bool:
        """Aggregate status; ``verdict`` overrides the all-rows rule."""
        if self.verdict is not None:
            return self.verdict
        return all(r["pass"] for r in self.rows)

    def summary(self) -> str:
        n_fail = sum(not r["pass"] for r in self.rows)
        head = [f"command: {self.command}", f"status: {'PASS' if self.ok else 'FAIL'}",
                f"rows: {len(self.rows)} ({n_fail} failing)"]
        body = list(self.lines)
        for r in self.rows:
            if not r["pass"]:
                body.append("FAIL " + ", ".join(f"{c}={fmt(r.get(c))}" for c in self.columns))
        return "\n".join(head + body) + "\n"

    def csv(self) -> str:
        return to_csv(self.rows, self.columns)


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------
def _labels(s) -> str:
    return "{" + ",".join(sorted(s)) + "}"


def cmd_describe(alg, doc, args) -> Report:
    rep = Report("describe")
    p, dims = alg.poset, alg.dims
    ss = structure_sets(p)
    rep.rows.append(_row("elements", " ".join(p.order)))
    rep.rows.append(_row("n_total", float(dims.n_total)))
    rep.rows.append(_row("dim", alg.dim))
    for (a, b), v in sorted(dims.n_pair.items()):
        rep.rows.append(_row(f"n[{a}|{b}]", v))
    for lab in p.order:
        rep.rows.append(_row(f"n_below[{lab}]", dims.n_below[lab]))
        rep.rows.append(_row(f"n_above[{lab}]", dims.n_above[lab]))
        rep.rows.append(_row(f"n_i[{lab}]", float(dims.n[lab])))
        # absolute continuity threshold and the shift inside the gamma factor
        rep.rows.append(_row(f"gamma_shift[{lab}]", dims.n_below[lab] / 2))
    rep.rows.append(_row("roots", _labels(ss.roots)))
    rep.rows.append(_row("separators", _labels(ss.separators)))
    for lab in p.order:
        rep.rows.append(_row(f"S[{lab}]", _labels(ss.separators_of[lab])))
        rep.rows.append(_row(f"M[{lab}]", _labels(ss.children[lab])))
    for a in ss.anchors(p):
        prof = n_profile(alg, a, OrbitSignature.ones(alg, a))
        for lab, v in prof.n.items():
            rep.rows.append(_row(f"orbit_exponent[{a}][{lab}]", v))
    rep.rows.append(_row("gamma_pi_exponent", (dims.n_total - alg.n) / 2))
    rep.lines += [
        f"elements (linear extension): {' '.join(p.order)}",
        f"relations: {' '.join(f'{a}<{b}' for a, b in p.relations())}",
        f"n_total: {fmt(float(dims.n_total))}",
        f"roots: {_labels(ss.roots)}",
        f"separators: {_labels(ss.separators)}",
        "children: " + ", ".join(f"M[{k}]={_labels(v)}" for k, v in ss.children.items()),
        "gamma shifts: " + ", ".join(f"{k}:{dims.n_below[k] / 2:g}" for k in p.order),
    ]
    return rep


def cmd_check_axioms(alg, doc, args) -> Report:
    rep = Report("check-axioms")
    tol = args.tol if args.tol is not None else 1e-9
    samples = args.samples if args.samples is not None else 200
    res = axiom_check(alg, samples=samples, tol=tol, seed=args.seed or 0)
    for r in res.rows():
        rep.rows.append(_row(f"axiom_{r['quantity']}", 0.0, r["residual"], None, None, tol, r["pass"]))
    rep.lines.append(f"samples: {samples}, tolerance: {tol:g}")
    rep.lines += [f"axiom {k}: {'pass' if v else 'FAIL'}" for k, v in res.passed.items()]
    return rep


def cmd_gindikin(alg, doc, args) -> Report:
    rep = Report("gindikin")
    lam = _chi(alg, doc, args.chi)
    cl = classify_measure(alg, lam)
    rep.rows.append(_row("kind", cl.kind.value))
    rep.rows.append(_row("generates_nef", cl.generates_nef))
    rep.rows.append(_row("absolutely_continuous", is_absolutely_continuous(alg, lam)))
    rep.lines.append(f"chi: {lam}")
    rep.lines.append(f"classification: {cl.describe()}")
    if cl.witness is not None:
        for a in cl.witness.psi:
            sig = "".join(str(v) for v in cl.witness.psi[a].values)
            comp = cl.witness.chi[a]
            vals = " ".join(f"{k}:{float(v):g}" for k, v in comp.as_dict().items())
            rep.rows.append(_row(f"witness[{a}].psi", sig))
            for k, v in comp.as_dict().items():
                rep.rows.append(_row(f"witness[{a}].chi[{k}]", float(v)))
            rep.lines.append(f"witness {a}: psi={sig} chi=({vals})")
    return rep


def cmd_gamma(alg, doc, args) -> Report:
    rep = Report("gamma")
    lam = _chi(alg, doc, args.chi)
    rep.lines.append(f"chi: {lam}")
    if is_absolutely_continuous(alg, lam):
        lg = log_gamma_cone(alg, lam)
        rep.rows.append(_row("log_gamma_cone", lg))
        rep.rows.append(_row("gamma_cone", math.exp(lg) if lg < 709 else math.inf))
        rep.lines.append(f"log gamma_cone: {fmt(lg)}")
    else:
        rep.rows.append(_row("gamma_cone", "divergent"))
        rep.lines.append("gamma_cone: divergent (chi is not absolutely continuous)")
    cl = classify_measure(alg, lam)
    if cl.witness is None:
        rep.lines.append("no Gindikin witness: orbit gamma factors undefined")
        return rep
    total = 0.0
    tilde = cl.witness.tilde(alg)
    for a, psi in cl.witness.psi.items():
        lgo = log_gamma_orbit(alg, a, psi, tilde[a])
        total += lgo
        sig = "".join(str(v) for v in psi.values)
        rep.rows.append(_row(f"log_gamma_orbit[{a}][{sig}]", lgo))
        rep.lines.append(f"log gamma_orbit {a} psi={sig}: {fmt(lgo)}")
    rep.rows.append(_row("log_gamma_orbit_product", total))
    return rep


def _flat_names(alg) -> list[str]:
    names = []
    for key, vals in alg.to_dict(np.zeros(alg.dim), hermitian=True).items():
        names += [key] if len(vals) == 1 else [f"{key}[{k}]" for k in range(len(vals))]
    return names


def cmd_sample(alg, doc, args):
    lam = _chi(alg, doc, args.chi)
    theta = _theta(alg, doc, args.theta)
    n = args.samples if args.samples is not None else 1000
    Z = sample_riesz(alg, lam, theta, n, _seed(args), streams=args.streams)
    if args.format == "csv":
        names = _flat_names(alg)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["draw"] + names)
        for k, z in enumerate(Z):
            flat = [x for v in alg.to_dict(z, hermitian=True).values() for x in v]
            w.writerow([k] + [fmt(x) for x in flat])
        text = buf.getvalue()
    else:
        text = "".join(json.dumps(alg.to_dict(z, hermitian=True)) + "\n" for z in Z)
    mean = Z.mean(axis=0) if n else np.zeros(alg.dim)
    summary = (f"command: sample\nstatus: PASS\nchi: {lam}\ndraws: {n}\n"
               f"mean: {json.dumps(alg.to_dict(mean, hermitian=True))}\n")
    return text, summary


def cmd_verify_laplace(alg, doc, args) -> Report:
    rep = Report("verify-laplace")
    lam = _chi(alg, doc, args.chi)
    theta = _theta(alg, doc, args.theta)
    seed = _seed(args)
    n = args.samples if args.samples is not None else 200_000
    zt = args.tol if args.tol is not None else 4.0
    Z = sample_riesz(alg, lam, theta, n, seed, streams=args.streams)
    base = log_laplace_closed(alg, lam, theta)
    pts = random_dual_points(alg, args.points, make_rng(seed, POINT_STREAM))
    passes = 0
    for k, s in enumerate(pts):
        closed = math.exp(log_laplace_closed(alg, lam, theta + s) - base)
        est, se = mc_laplace(alg, Z, s)
        diff = est - closed
        if se > 0:
            z = diff / se
        else:
            z = 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(closed)) else math.copysign(math.inf, diff)
        ok = abs(z) <= zt
        passes += ok
        rep.rows.append(_row(f"s{k}", closed, est, se, z, zt, ok))
    # individual points may miss; at least 90% must fall inside the band
    need = math.ceil(0.9 * len(pts))
    rep.verdict = passes >= need
    rep.lines.append(f"chi: {lam}; draws: {n}; points: {len(pts)}")
    rep.lines.append(f"within {zt:g} stderr: {passes}/{len(pts)} (need {need})")
    return rep


def cmd_verify_moments(alg, doc, args) -> Report:
    rep = Report("verify-moments", MOMENT_COLUMNS)
    lam = _chi(alg, doc, args.chi)
    seed = _seed(args)
    n = args.samples if args.samples is not None else 200_000
    F = RieszFamily(alg, lam)
    pts = [_theta(alg, doc, args.theta)]
    pts += random_dual_points(alg, max(args.points - 1, 0), make_rng(seed, POINT_STREAM))
    kw = {} if args.tol is None else {"fd_tol": args.tol}
    rep.rows = verification_oracles(F, pts, n_samples=n, seed=seed, streams=args.streams, **kw)
    rep.lines.append(f"chi: {lam}; points: {len(pts)}; draws per point: {n}")
    return rep


def cmd_classify_orbit(alg, doc, args) -> Report:
    rep = Report("classify-orbit")
    raw = args.z if args.z is not None else doc.get("z")
    if raw is None:
        raise SpecError("classify-orbit needs an element (positional or 'z' in the cone spec)")
    Z = _element(alg, _load_json(raw, "element") if isinstance(raw, str) else raw, "element")
    try:
        sig, T = classify_orbit(Z, args.tol)
    except NotInClosure as exc:
        rep.rows.append(_row("in_closure", True, False, ok=False))
        rep.lines.append(f"not in the closed cone: {exc}")
        return rep
    rep.rows.append(_row("in_closure", True, True))
    for lab, v, t in zip(alg.poset.order, sig.values, T.coef[: alg.n]):
        rep.rows.append(_row(f"psi[{lab}]", v))
        rep.rows.append(_row(f"t[{lab}]", float(t)))
    rep.lines.append("psi: " + " ".join(f"{lab}:{v}" for lab, v in zip(alg.poset.order, sig.values)))
    return rep


HANDLERS = {
    "describe": cmd_describe,
    "check-axioms": cmd_check_axioms,
    "gindikin": cmd_gindikin,
    "gamma": cmd_gamma,
    "verify-laplace": cmd_verify_laplace,
    "verify-moments": cmd_verify_moments,
    "classify-orbit": cmd_classify_orbit,
}


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------
def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rieszcone", description="Riesz measures on poset cones.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cone", required=True, help="cone spec: JSON file or inline JSON")
    common.add_argument("--chi", help="multiplier as JSON (label -> value) or @file")
    common.add_argument("--theta", help="dual-cone point in the element serialization")
    common.add_argument("--seed", type=_u64, help="64-bit seed; required when sampling")
    common.add_argument("--samples", type=_positive, help="sample size N")
    common.add_argument("--streams", type=_positive, default=1, help="worker streams")
    common.add_argument("--points", type=_positive,
                        help="test points (default 10 for verify-laplace, 5 for verify-moments)")
    common.add_argument("--tol", type=float, help="tolerance override")
    common.add_argument("--out", help="directory for <command>.csv and <command>.txt")
    common.add_argument("--format", choices=("csv", "summary"), default="summary")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "gindikin" or name == "gamma":
            sp.add_argument("chi_pos", nargs="?", metavar="CHI")
        if name == "classify-orbit":
            sp.add_argument("z", nargs="?", metavar="Z")
    return ap


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    """Run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "chi_pos", None) is not None:
        args.chi = args.chi_pos
    if not hasattr(args, "z"):
        args.z = None
    if args.points is None:
        args.points = 5 if args.command == "verify-moments" else 10
    try:
        alg, doc = load_cone(args.cone)
        if args.command == "sample":
            text, summary = cmd_sample(alg, doc, args)
            ok = True
            files = {"sample.csv" if args.format == "csv" else "sample.jsonl": text,
                     "sample.txt": summary}
            # draws go to stdout unless they were written to a file
            shown = text if args.out is None or args.format == "csv" else summary
        else:
            rep = HANDLERS[args.command](alg, doc, args)
            ok = rep.ok
            files = {f"{args.command}.csv": rep.csv(), f"{args.command}.txt": rep.summary()}
            shown = rep.csv() if args.format == "csv" else rep.summary()
    except RieszConeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    stdout.write(shown)
    if not ok:
        print(f"error: {CheckFailed.__name__}: {args.command} reported failing rows", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
