"""
Command-line front end.

Every command prints a JSON report (sorted keys) with the inputs echoed, the
outputs, and a list of named checks.  Exit status: 0 when all checks pass,
1 when a check fails, 2 when the input is malformed.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

import click
import mpmath

from . import __version__
from .qseries import (
    PrecisionError,
    QSeries,
    coeff_to_json,
    klein_j,
    klein_j_via_E6,
    rational_to_str,
    series_to_json,
)
from .schemas import InputError, load

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2
DIGITS_ENV = "SQLIFT_DIGITS"


def default_digits() -> int:
    raw = os.environ.get(DIGITS_ENV, "40")
    try:
        d = int(raw)
    except ValueError:
        raise InputError(f"${DIGITS_ENV}: {raw!r} is not an integer") from None
    return d


@dataclass
class RunConfig:
    precision: Fraction = Fraction(10)
    digits: int = 40
    inputs: dict[str, str] = field(default_factory=dict)
    output: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if self.precision <= 0:
            raise InputError("--prec: precision must be positive")
        if self.digits < 20:
            raise InputError("--digits: at least 20 digits are required")
        if self.jobs < 1:
            raise InputError("--jobs: must be at least 1")


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    outputs: dict[str, Any] = field(default_factory=dict)
    checks: list[dict[str, Any]] = field(default_factory=list)

    def check(self, name: str, ok: bool, residue: Any = None, detail: str = "") -> bool:
        entry: dict[str, Any] = {"name": name, "ok": bool(ok)}
        if residue is not None:
            entry["residue"] = residue
        if detail:
            entry["detail"] = detail
        self.checks.append(entry)
        return bool(ok)

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def to_json(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "outputs": self.outputs, "checks": self.checks,
                "ok": self.ok, "versions": {"sqlift": __version__, "python": sys.version.split()[0],
                                            "mpmath": mpmath.__version__}}


# ---------------------------------------------------------------------------
# encoding helpers


def exact(value: Any) -> dict:
    return {"exact": True, "value": value}


def numeric(value, bound, digits: int) -> dict:
    return {"exact": False, "value": mpmath.nstr(value, digits), "±": mpmath.nstr(bound, 3)}


def series_out(s: QSeries) -> dict:
    out = series_to_json(s)
    out["exact"] = True
    return out


def coeff_table(s: QSeries) -> dict[str, Any]:
    return {rational_to_str(e): coeff_to_json(c) for e, c in s.items()}


def write_csv(path: str, rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["key", "exponent", "coefficient"])
        for row in rows:
            w.writerow(row)


def emit(report: Report, out: Optional[str]) -> None:
    text = json.dumps(report.to_json(), sort_keys=True, indent=1, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def run(command: str, inputs: dict, body: Callable[[Report], None], out: Optional[str] = None) -> None:
    """Build a report, print it and exit with the status code."""
    report = Report(command, {k: v for k, v in inputs.items() if v is not None})
    try:
        body(report)
    except InputError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except PrecisionError as exc:
        report.check("precision", False, detail=str(exc))
    except (ValueError, KeyError) as exc:
        click.echo(f"input error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except (ArithmeticError, AssertionError) as exc:
        report.check(type(exc).__name__, False, detail=str(exc))
    emit(report, out)
    if not report.ok:
        failed = ", ".join(c["name"] for c in report.checks if not c["ok"])
        click.echo(f"check failed: {failed}", err=True)
        sys.exit(EXIT_CHECK)
    sys.exit(EXIT_OK)


def _input_guard(fn: Callable, what: str):
    """Run a constructor, turning data errors into InputError."""
    try:
        return fn()
    except (InputError, PrecisionError):
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{what}: {exc}") from exc


def _prec(value: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--prec: {value!r} is not a rational number") from None


prec_option = click.option("--prec", "prec", default="10", show_default=True, help="truncation order (rational)")
out_option = click.option("--out", "out", default=None, help="write the report here instead of stdout")
digits_option = click.option("--digits", type=int, default=None,
                             help=f"numeric precision (default ${DIGITS_ENV} or 40)")


def _digits(d: Optional[int]) -> int:
    return default_digits() if d is None else d


@click.group()
@click.version_option(__version__, prog_name="sqlift")
def main():
    """Twined Borcherds products of weight 1/2 modules, with their checks."""


# ---------------------------------------------------------------------------
# forms


@main.command("f0")
@prec_option
@click.option("--csv", "csv_path", default=None, help="also write the coefficient table as CSV")
@out_option
def cmd_f0(prec, csv_path, out):
    """Coefficients of f_3 = q^-3 - 248 q + ... below q^PREC."""
    from .vvforms import f0

    def body(rep: Report):
        cfg = RunConfig(_prec(prec))
        f = f0(int(cfg.precision))
        rep.outputs["f0"] = series_out(f)
        rep.check("leading term q^-3", f.valuation() == -3 and f.leading_coefficient() == 1)
        rep.check("plus support", all(e % 4 in (0, 1) for e, _ in f.items()))
        if csv_path:
            write_csv(csv_path, [("f0", rational_to_str(e), coeff_to_json(c)) for e, c in f.items()])

    run("f0", {"prec": prec}, body, out)


@main.command("plus-basis")
@click.option("--dmax", type=int, required=True)
@prec_option
@click.option("--csv", "csv_path", default=None)
@out_option
def cmd_plus_basis(dmax, prec, csv_path, out):
    """The echelon family f_D, D = 0, 3 mod 4, D <= DMAX."""
    from .vvforms import plus_basis

    def body(rep: Report):
        cfg = RunConfig(_prec(prec))
        basis = _input_guard(lambda: plus_basis(dmax, int(cfg.precision)), "--dmax")
        rep.outputs["basis"] = {str(b.D): series_out(b.series) for b in basis}
        ok = all(b.series.valuation() == -b.D for b in basis)
        rep.check("echelon leading terms", ok)
        if csv_path:
            write_csv(csv_path, [(f"f{b.D}", rational_to_str(e), coeff_to_json(c))
                                 for b in basis for e, c in b.series.items()])

    run("plus-basis", {"dmax": dmax, "prec": prec}, body, out)


@main.command("jproduct")
@prec_option
@out_option
def cmd_jproduct(prec, out):
    """The Borcherds product of 3 F^(2): j(tau) as an infinite product."""
    from .borcherds import class_number_H, j_example, psi_product

    def body(rep: Report):
        cfg = RunConfig(_prec(prec))
        P = int(cfg.precision)
        W = j_example()
        H = class_number_H(W)
        psi = psi_product(W, "1A", P + 1, H)
        j = klein_j(P + 1)
        rep.outputs["H"] = exact(rational_to_str(H))
        rep.outputs["product"] = series_out(psi)
        rep.check("H = 1", H == 1)
        rep.check("product = E4^3/Delta", psi == j)
        rep.check("product = E6^2/Delta + 1728", psi == klein_j_via_E6(P + 1))
        known = {1: 196884, 2: 21493760, 3: 864299970}
        rep.check("coefficients q^1..q^3", all(psi.coeff(n) == c for n, c in known.items() if n <= P))

    run("jproduct", {"prec": prec}, body, out)


@main.command("weil")
@click.option("--m", "m", type=int, required=True)
@click.option("--N", "N", type=int, default=1, show_default=True)
@click.option("--matrices/--no-matrices", default=False, help="include rhoT and rhoS in the output")
@out_option
def cmd_weil(m, N, matrices, out):
    """Exact relation checks for the Weil representation rho_{m,N}."""
    from .weil import rep_relations_check, weil_rep

    def body(rep: Report):
        W = _input_guard(lambda: weil_rep(m, N), "--m/--N")
        R = rep_relations_check(W)
        rep.outputs["dimension"] = W.dim
        rep.outputs["labels"] = [list(x) for x in W.labels]
        if matrices:
            rep.outputs["rep"] = W.to_json()
        for name, ok in sorted(R.results.items()):
            rep.check(name, ok, detail=R.details.get(name, ""))

    run("weil", {"m": m, "N": N}, body, out)


@main.command("repackage")
@click.option("--input", "input_path", required=True, help="family JSON")
@click.option("--engine", "engine_path", default=None, help="eta-quotient engine JSON (needed for rows i != 0)")
@click.option("--prec", "prec", default=None, help="truncation order (default: that of the members)")
@click.option("--out", "out", default=None, help="write the check form JSON here")
def cmd_repackage(input_path, engine_path, prec, out):
    """F^(n) family -> F^check of type rho_{m,N}."""
    from .repackage import CheckForm, EtaSlashEngine, FormFamily, check_row0, inverse_repackage, repackage_full

    def body(rep: Report):
        _, data = load(input_path, "family")
        fam = _input_guard(lambda: FormFamily.from_json(data), input_path)
        eng = None
        if engine_path:
            _, edata = load(engine_path, "engine")
            eng = _input_guard(lambda: EtaSlashEngine.from_json(edata), engine_path)
        P = None if prec is None else _prec(prec)
        if eng is None and fam.N > 1:
            rows = check_row0(fam)
            rep.outputs["row0"] = [{"j": j, "r": r, "series": series_out(s)} for (j, r), s in sorted(rows.items())]
            rep.check("row 0 only (no engine)", True)
            return
        F = repackage_full(fam, eng, P)
        rep.outputs["check_form"] = F.to_json()
        back = inverse_repackage(F)
        rep.check("inverse recovers row 0", all(
            back[(0, j)][r].agrees(fam.member(j)[r]) for j in range(fam.N) for r in range(2 * abs(fam.m))))
        rep.check("check form validates", CheckForm.from_json(F.to_json()).agrees(F))

    run("repackage", {"input": input_path, "engine": engine_path, "prec": prec}, body, out)


@main.command("frame-shape")
@click.option("--input", "input_path", required=True, help="traces JSON {order, traces}")
@out_option
def cmd_frame_shape(input_path, out):
    """Frame shape and eigenvalue multiplicities from the traces of g^d."""
    from .repth import VirtualModuleTraces, ud_from_traces, vb_from_traces, weight_identity

    def body(rep: Report):
        _, data = load(input_path, "traces")
        T = _input_guard(lambda: VirtualModuleTraces.from_json(data), input_path)
        shape = vb_from_traces(T)
        u = ud_from_traces(T)
        rep.outputs["frame_shape"] = exact(str(shape))
        rep.outputs["v"] = exact(shape.to_json())
        rep.outputs["u"] = exact({str(d): x for d, x in u.items()})
        lhs, rhs = weight_identity(T, T.order)
        rep.outputs["weight"] = exact([rational_to_str(lhs), rhs])
        rep.check("v_b integrality", True)
        rep.check("frame shape reproduces traces", all(shape.trace(d) == T.traces[d] for d in T.traces))
        rep.check("weight identity", lhs == rhs)

    run("frame-shape", {"input": input_path}, body, out)


@main.command("classnum")
@click.option("--D", "D", type=int, default=None, help="a discriminant D <= 0")
@click.option("--max", "dmax", type=int, default=None, help="table of H(n) for 0 <= n <= MAX")
@out_option
def cmd_classnum(D, dmax, out):
    """Hurwitz class numbers H(|D|)."""
    from .borcherds import hurwitz

    def body(rep: Report):
        if (D is None) == (dmax is None):
            raise InputError("give exactly one of --D and --max")
        if D is not None:
            if D > 0:
                raise InputError("--D: discriminant must be <= 0")
            rep.outputs["H"] = exact(rational_to_str(hurwitz(-D)))
        else:
            if dmax < 0:
                raise InputError("--max: must be nonnegative")
            rep.outputs["table"] = exact({str(n): rational_to_str(hurwitz(n)) for n in range(dmax + 1)})
        rep.check("computed", True)

    run("classnum", {"D": D, "max": dmax}, body, out)


def _sq_one(args):
    path_data, name, prec = args
    from .borcherds import WModuleData, sq_traces, t_w

    W = WModuleData.from_json(path_data)
    s = sq_traces(W, name, prec)
    t = t_w(W, name, prec)
    return name, s, t


@main.command("sq")
@click.option("--input", "input_path", required=True, help="W-module JSON")
@prec_option
@click.option("--table", "table", default=None, help="character table (S3, S4, Zn or a JSON path) to decompose")
@click.option("--jobs", type=int, default=1, show_default=True)
@out_option
def cmd_sq(input_path, prec, table, jobs, out):
    """Traces of SQ(W) on every class, checked against Psi/eta."""
    from .borcherds import WModuleData, class_number_H, h_exponent, sq_decompose
    from .repth import CharacterTable, load_table

    def body(rep: Report):
        cfg = RunConfig(_prec(prec), jobs=jobs)
        _, data = load(input_path, "w-module")
        W = _input_guard(lambda: WModuleData.from_json(data), input_path)
        H = class_number_H(W)
        rep.outputs["H"] = exact(rational_to_str(H))
        rep.outputs["h"] = exact(rational_to_str(h_exponent(W, H)))
        tasks = [(data, c.name, cfg.precision) for c in W.classes]
        if cfg.jobs > 1:
            with ProcessPoolExecutor(cfg.jobs) as ex:
                results = list(ex.map(_sq_one, tasks))
        else:
            results = [_sq_one(t) for t in tasks]
        rep.outputs["traces"] = {}
        for name, s, t in results:
            rep.outputs["traces"][name] = series_out(s)
            rep.check(f"SQ = T^W at {name}", s == t)
        if table:
            if Path(table).exists():
                _, tdata = load(table, "character-table")
                CT = _input_guard(lambda: CharacterTable.from_json(tdata), table)
            else:
                CT = _input_guard(lambda: load_table(table), "--table")
            dec = sq_decompose(W, CT, cfg.precision, H)
            rep.outputs["decomposition"] = exact({rational_to_str(e): m for e, m in dec.items()})
            rep.check("integral decomposition", True)

    run("sq", {"input": input_path, "prec": prec, "table": table}, body, out)


@main.command("twisted")
@click.option("--input", "input_path", default=None, help="W-module JSON (default: the j-example)")
@click.option("--class", "name", default=None, help="class name (default: identity)")
@click.option("--D1", "D1", type=int, required=True)
@click.option("--r1", "r1", type=int, default=None)
@click.option("--prec", "prec", type=int, default=3, show_default=True)
@out_option
def cmd_twisted(input_path, name, D1, r1, prec, out):
    """The twisted product Psi^W_{D1,r1} with coefficients in Q(sqrt D1)."""
    from .borcherds import WModuleData, j_example, twisted_psi

    def body(rep: Report):
        if input_path:
            _, data = load(input_path, "w-module")
            W = _input_guard(lambda: WModuleData.from_json(data), input_path)
        else:
            W = j_example()
        cls = name or W.identity
        rr = D1 % 2 if r1 is None else r1
        if cls not in W.by_name:
            raise InputError(f"--class: no class {cls!r}")
        psi = _input_guard(lambda: twisted_psi(W, cls, D1, rr, prec, check=(cls == W.identity)), "--D1/--r1")
        rep.outputs["psi"] = series_out(psi)
        rep.check("exp form = binomial product form" if cls == W.identity else "computed", True)

    run("twisted", {"input": input_path, "class": name, "D1": D1, "r1": r1, "prec": prec}, body, out)


def _parse_divisor(items: tuple[str, ...]) -> list[tuple[int, int, int]]:
    out = []
    for it in items:
        try:
            D, r, mult = (int(x) for x in it.split(","))
        except ValueError:
            raise InputError(f"--divisor: {it!r} is not D,r,mult") from None
        out.append((D, r, mult))
    return out or [(-3, 1, 3)]


@main.command("trace")
@click.option("--D1", "D1", type=int, required=True)
@click.option("--r1", "r1", type=int, default=None)
@click.option("--divisor", multiple=True, help="D,r,mult (repeatable); default -3,1,3 (the j-example)")
@click.option("--D0", "D0", type=int, default=None, help="single divisor term: discriminant (with --mult)")
@click.option("--mult", type=int, default=None, help="single divisor term: multiplier")
@digits_option
@click.option("--invert", type=int, default=0, help="recover C(D1 n^2, r1 n) for n <= INVERT")
@out_option
def cmd_trace(D1, r1, divisor, D0, mult, digits, invert, out):
    """Twisted traces of singular moduli, optionally inverted to coefficients."""
    from .heegner import divisor_from_spec, invert_coefficients, trace_singular_moduli

    def body(rep: Report):
        cfg = RunConfig(digits=_digits(digits) if digits is not None else max(_digits(None), 60))
        if (D0 is None) != (mult is None):
            raise InputError("--D0 and --mult go together")
        spec = _parse_divisor(divisor) if D0 is None else [(D0, D0 % 2, mult)] + _parse_divisor(divisor)[:len(divisor)]
        rr = D1 % 2 if r1 is None else r1
        div = _input_guard(lambda: divisor_from_spec(D1, rr, spec), "--D1/--divisor")
        rep.outputs["divisor"] = div.to_json()
        val = trace_singular_moduli(D1, rr, spec, cfg.digits)
        rep.outputs["trace"] = numeric(val.value, val.bound, cfg.digits)
        rep.check("bound below 10^-(digits-20)", val.bound < mpmath.mpf(10) ** (-(cfg.digits - 20)), mpmath.nstr(val.bound, 3))
        if invert:
            inv = invert_coefficients(D1, rr, spec, invert, cfg.digits)
            rep.outputs["coefficients"] = {str(n): {"D": x["D"], "r": x["r"], "C": exact(x["C"]),
                                                    "residue": x["residue"]} for n, x in inv.items()}
            worst = max(x["residue"] for x in inv.values())
            rep.check("rounding residue < 1e-3", worst < 1e-3, worst)

    run("trace", {"D1": D1, "r1": r1, "divisor": list(divisor), "D0": D0, "mult": mult, "digits": digits,
                  "invert": invert}, body, out)


@main.command("replication")
@click.option("--disc", "disc", type=int, required=True, help="discriminant of the CM point (< 0)")
@click.option("--prec", type=int, default=5, show_default=True)
@digits_option
@out_option
def cmd_replication(disc, prec, digits, out):
    """J(tau) - J(alpha) against its Hecke product expansion at each CM point of discriminant DISC."""
    from .heegner import cm_point, reduce_forms, replication_check

    def body(rep: Report):
        cfg = RunConfig(digits=_digits(digits))
        forms = _input_guard(lambda: reduce_forms(disc), "--disc")
        tol = 10.0 ** (-(cfg.digits - 10))
        rep.outputs["points"] = []
        for Q in forms:
            if Q.content() != 1:
                continue
            R = replication_check(cm_point(Q), prec, cfg.digits, tol)
            rep.outputs["points"].append(R.to_json())
            rep.check(f"replication at {Q}", R.ok, R.max_residual)

    run("replication", {"disc": disc, "prec": prec, "digits": digits}, body, out)


# ---------------------------------------------------------------------------
# validation


_FAILURE_TAGS = (("symmetry", "symmetry"), ("power map", "power-map closure"), ("not an integer", "integrality"),
                 ("mod 4", "plus support"), ("exponent", "support"), ("level", "level condition"),
                 ("identity", "identity class"), ("not rational", "rationality"))


def validate_file(path: str, rep: Report) -> None:
    from .borcherds import WModuleData
    from .repackage import EtaSlashEngine, FormFamily
    from .repth import CharacterTable, InvalidCharacterData, VirtualModuleTraces, ud_from_traces, vb_from_traces
    from .vvforms import FormValidationError

    kind, data = load(path)
    rep.outputs["kind"] = kind
    rep.check("schema", True)

    def guarded(name: str, fn: Callable[[], Any]) -> Any:
        try:
            res = fn()
        except (FormValidationError, InvalidCharacterData, ArithmeticError, AssertionError, ValueError, KeyError) as exc:
            msg = str(exc)
            label = name
            for key, tag in _FAILURE_TAGS:
                if key in msg:
                    label = f"{tag} ({name})"
                    break
            rep.check(label, False, detail=msg)
            return None
        rep.check(name, True)
        return res

    if kind == "w-module":
        W = guarded("forms", lambda: WModuleData.from_json(data))
        if W is not None:
            guarded("rationality", lambda: _check_rational(W))
            guarded("v_b integrality", lambda: _w_frame_shapes(W))
    elif kind == "family":
        guarded("forms", lambda: FormFamily.from_json(data))
    elif kind == "engine":
        guarded("engine terms", lambda: _engine_weights(EtaSlashEngine.from_json(data)))
    elif kind == "traces":
        T = guarded("traces", lambda: VirtualModuleTraces.from_json(data))
        if T is not None:
            guarded("v_b integrality", lambda: vb_from_traces(T))
            guarded("u_d integrality", lambda: ud_from_traces(T))
    elif kind == "character-table":
        CT = guarded("table", lambda: CharacterTable.from_json(data))
        if CT is not None:
            guarded("orthogonality and power maps", CT.validate)


def _check_rational(W) -> None:
    for c in W.classes:
        if c.form is None:
            continue
        for D, r, v in c.form.coefficients():
            if not isinstance(v, (int, Fraction)):
                raise ValueError(f"class {c.name}: C({D}, {r}) = {v} is not rational")


def _w_frame_shapes(W) -> None:
    from .repth import vb_from_traces

    P = Fraction(3)
    for c in W.classes:
        if c.form is not None and c.form.truncation is not None:
            P = min(P, c.form.truncation)
    for c in W.classes:
        for D, r, _ in W.form(c.name, P).coefficients():
            if Fraction(D, 4 * W.index) < P:
                vb_from_traces(W.traces(c.name, D, r, P))


def _engine_weights(E) -> None:
    from .repackage import WeightError

    for n, spec in E.members.items():
        for r, terms in spec.components.items():
            for t in terms:
                if t.weight2 != 1:
                    raise WeightError(f"member {n} component {r}: weight {Fraction(t.weight2, 2)} is not 1/2")


@main.command("validate")
@click.option("--input", "input_path", required=True)
@out_option
def cmd_validate(input_path, out):
    """Boundary invariants of an input file, without computing any product."""
    run("validate", {"input": input_path}, lambda rep: validate_file(input_path, rep), out)


if __name__ == "__main__":
    main()
