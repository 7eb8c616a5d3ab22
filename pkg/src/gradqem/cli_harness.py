"""Command-line front end.

Subcommands::

    gradqem beam      --bc ss --basis lagrange --n 13 --g 1e-5 --modes 3
    gradqem plate     --bc ssss --basis ll --n 11 --g 0.05 --with-oracle
    gradqem oracle    --problem beam --bc clamped --g 0.005
    gradqem reproduce --table 6 [--strict]
    gradqem converge  --problem beam --bc ss --n-range 7:13

Exit codes: 0 ok, 1 usage error, 2 numerical failure, 3 strict reproduction failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from importlib import resources

import numpy as np

from . import dense_linalg as dl
from ._modal import AssemblyInconsistencyError
from .analytical_oracle import beam_natural_frequencies, ssss_plate_spectrum
from .beam_qem import BeamBC, BeamModel, beam_frequencies
from .beam_qem import parse_basis as parse_beam_basis
from .plate_qem import PlateBC, PlateModel, plate_frequencies
from .plate_qem import parse_basis as parse_plate_basis

CSV_HEADER = ["case_id", "problem", "bc", "basis", "N", "g_effective", "mode_index", "omega_bar", "source"]
STRICT_TOL = 5e-3
DISTINCT_RTOL = 1e-2    # published plate columns merge (near-)degenerate pairs
NUMERICAL_ERRORS = (dl.SingularMatrixError, dl.ConvergenceError, dl.NonSymmetricError,
                    AssemblyInconsistencyError, np.linalg.LinAlgError, FloatingPointError)


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    problem: str = "beam"
    bc: str = "ss"
    basis: str | None = None
    n: int | None = None
    g: float = 0.0
    g_scale: float = 1.0
    modes: int = 6
    with_oracle: bool = False
    format: str = "csv"
    treatment: str = "auto"
    lh_edge: str = "lagrange"
    # material / geometry overrides
    E: float | None = None
    I: float | None = None
    A: float | None = None
    rho: float | None = None
    L: float | None = None
    nu: float | None = None
    h: float | None = None
    lx: float | None = None
    ly: float | None = None

    @property
    def g_effective(self) -> float:
        return self.g * self.g_scale

    def normalized(self) -> "RunConfig":
        c = RunConfig(**asdict(self))
        c.problem = str(c.problem).lower()
        if c.problem not in ("beam", "plate"):
            raise UsageError("problem must be 'beam' or 'plate'")
        try:
            if c.problem == "beam":
                c.bc = BeamBC.parse(c.bc).value
                c.basis = parse_beam_basis(c.basis or "lagrange")
                c.n = 13 if c.n is None else int(c.n)
            else:
                c.bc = PlateBC.parse(c.bc).value
                c.basis = parse_plate_basis(c.basis or "LL")
                c.n = 11 if c.n is None else int(c.n)
        except ValueError as exc:
            raise UsageError("%s (problem=%s)" % (exc, c.problem)) from None
        if not (c.g >= 0 and c.g_scale > 0 and math.isfinite(c.g)):
            raise UsageError("g must be >= 0 and g-scale > 0")
        if c.modes < 1:
            raise UsageError("--modes must be >= 1")
        if c.format not in ("csv", "table"):
            raise UsageError("--format must be csv or table")
        if c.treatment not in ("auto", "strong", "slope", "weak"):
            raise UsageError("unknown treatment %r" % (c.treatment,))
        if c.problem == "plate" and c.treatment == "slope":
            raise UsageError("treatment 'slope' applies to beams only")
        if c.with_oracle and c.problem == "plate" and c.bc != "SSSS":
            raise UsageError("closed-form reference exists only for SSSS plates")
        return c

    def beam_model(self) -> BeamModel:
        kw = {k: v for k, v in (("E", self.E), ("I", self.I), ("A_cs", self.A), ("rho", self.rho), ("L", self.L))
              if v is not None}
        return BeamModel(g=self.g_effective, **kw)

    def plate_model(self) -> PlateModel:
        kw = {k: v for k, v in (("E", self.E), ("nu", self.nu), ("h", self.h), ("rho", self.rho),
                                ("lx", self.lx), ("ly", self.ly)) if v is not None}
        return PlateModel(g=self.g_effective, **kw)


@dataclass(frozen=True)
class ResultRow:
    case_id: str
    problem: str
    bc: str
    basis: str
    N: int
    g_effective: float
    mode_index: int
    omega_bar: float
    source: str

    def as_csv(self):
        return [self.case_id, self.problem, self.bc, self.basis, str(self.N), "%.9g" % self.g_effective,
                str(self.mode_index), "%.9g" % self.omega_bar, self.source]


def case_id(cfg: RunConfig, tag: str = "") -> str:
    cid = "%s-%s-%s-N%d-g%.6g" % (cfg.problem, cfg.bc, cfg.basis, cfg.n, cfg.g_effective)
    return cid + ("-" + tag if tag else "")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GRADQEM_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Order-stable map, fanned out over GRADQEM_THREADS workers."""
    items = list(items)
    nt = min(_threads(), len(items))
    if nt <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=nt) as ex:
        return list(ex.map(fn, items))


# -- core runs ---------------------------------------------------------------

def qem_frequencies(cfg: RunConfig) -> np.ndarray:
    """Elastic frequencies (rigid modes dropped) for a normalized config."""
    try:
        if cfg.problem == "beam":
            res = beam_frequencies(cfg.beam_model(), cfg.bc, cfg.basis, cfg.n, treatment=cfg.treatment)
        else:
            res = plate_frequencies(cfg.plate_model(), cfg.bc, cfg.basis, cfg.n, treatment=cfg.treatment,
                                    lh_edge=cfg.lh_edge)
    except NUMERICAL_ERRORS as exc:
        raise NumericalFailure(str(exc)) from exc
    return np.asarray(res.elastic)


def oracle_frequencies(cfg: RunConfig, count: int) -> np.ndarray:
    if cfg.problem == "beam":
        r = beam_natural_frequencies(cfg.beam_model(), cfg.bc, count=count)
        if not r.complete:
            raise NumericalFailure("oracle found only %d of %d roots" % (r.omega_bar.size, count))
        return r.omega_bar
    if cfg.bc != "SSSS":
        raise UsageError("closed-form reference exists only for SSSS plates")
    return np.array([w for w, _, _ in ssss_plate_spectrum(cfg.plate_model(), count, distinct=False)])


def run(config: RunConfig) -> list:
    """Rows for one configuration sorted by mode_index (qem before oracle within a mode)."""
    cfg = config.normalized()
    om = qem_frequencies(cfg)
    if om.size < cfg.modes:
        raise UsageError("only %d elastic modes available at N=%d" % (om.size, cfg.n))
    rows = [ResultRow(case_id(cfg), cfg.problem, cfg.bc, cfg.basis, cfg.n, cfg.g_effective, i + 1, float(w), "qem")
            for i, w in enumerate(om[:cfg.modes])]
    if cfg.with_oracle:
        ref = oracle_frequencies(cfg, cfg.modes)
        rows += [ResultRow(case_id(cfg), cfg.problem, cfg.bc, "exact", cfg.n, cfg.g_effective, i + 1, float(w),
                           "oracle") for i, w in enumerate(ref)]
    rows.sort(key=lambda r: r.mode_index)   # stable: qem row stays ahead of its oracle row
    return rows


def convergence_study(config: RunConfig, n_range) -> list:
    """One qem row per (N, mode); oracle rows appended once when requested."""
    n_range = [int(n) for n in n_range]
    if any(b <= a for a, b in zip(n_range, n_range[1:])):
        raise UsageError("N range must be ascending")
    if any(n < 6 for n in n_range):
        raise UsageError("N range entries must be >= 6")
    base = config.normalized()
    cfgs = []
    for n in n_range:
        c = RunConfig(**asdict(base))
        c.n, c.with_oracle = n, False
        cfgs.append(c)
    rows = [r for block in _pmap(run, cfgs) for r in block]
    if base.with_oracle:
        ref = oracle_frequencies(base, base.modes)
        rows += [ResultRow(case_id(base, "ref"), base.problem, base.bc, "exact", 0, base.g_effective, i + 1,
                           float(w), "oracle") for i, w in enumerate(ref)]
    return rows


# -- published tables --------------------------------------------------------

def load_reference_tables(corrected: bool = True) -> dict:
    """Reference data file; ``corrected`` applies the recorded errata."""
    with resources.files("gradqem").joinpath("data/reference_tables.json").open("r") as fh:
        doc = json.load(fh)
    if corrected:
        for e in doc["errata"]:
            t = doc["tables"][e["table"]]
            col = t["g_labels"].index(e["g_label"])
            t["rows"][e["row"]][e["mode"] - 1][col] = e["corrected"]
    return doc


@dataclass
class TableReport:
    table: str
    text: str
    rows: list = field(default_factory=list)
    max_dev: float = 0.0
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def _rel(a, b):
    if a is None or b is None or not (b != 0):
        return None
    return a / b - 1.0


def reproduce_table(tid, n=None, treatment="auto", lh_edge="lagrange") -> TableReport:
    """Qem and exact values next to the published ones, with relative deviations.

    Beam tables are evaluated under both readings of the g columns: ``label``
    (g = column label) and ``scaled`` (g = documented factor x label). The
    strict check compares every qem value, under the documented reading,
    with the published row of the same basis (plates) or the exact row
    (beams) at 0.5%.
    """
    doc = load_reference_tables()
    tid = str(tid)
    if tid not in doc["tables"]:
        raise UsageError("table must be one of %s" % ", ".join(sorted(doc["tables"])))
    t = doc["tables"][tid]
    problem, bc = t["problem"], t["bc"]
    labels = t["g_labels"]
    if problem == "beam":
        bases = ["lagrange", "hermite"]
        readings = [("label", 1.0), ("scaled", t["g_scale_documented"])]
        n = n or 15
        exact_key = "analytical"
    else:
        bases = ["LL", "LH"]
        readings = [("label", 1.0)]
        n = n or t.get("n", 11)
        exact_key = "analytical" if "analytical" in t["rows"] else "classical"
    documented = readings[-1][0]

    jobs = []
    for rname, scale in readings:
        for col, gl in enumerate(labels):
            for b in bases:
                jobs.append((rname, scale, col, gl, b))

    def qem_job(job):
        rname, scale, col, gl, b = job
        c = RunConfig(problem=problem, bc=bc, basis=b, n=n, g=gl, g_scale=scale, treatment=treatment,
                      lh_edge=lh_edge).normalized()
        return qem_frequencies(c)[:24]

    def oracle_job(job):
        rname, scale, col, gl = job
        c = RunConfig(problem=problem, bc=bc, n=n, g=gl, g_scale=scale).normalized()
        if problem == "plate" and bc != "SSSS":
            return None
        if problem == "plate":
            # published SSSS columns list distinct frequencies
            return np.array([w for w, _, _ in ssss_plate_spectrum(c.plate_model(), 6, distinct=True)])
        return oracle_frequencies(c, 6)

    qem = dict(zip([j for j in jobs], _pmap(qem_job, jobs)))
    ojobs = [(r, s, c, g) for r, s in readings for c, g in enumerate(labels)]
    orc = dict(zip(ojobs, _pmap(oracle_job, ojobs)))

    rep = TableReport(tid, "")
    out = io.StringIO()
    out.write("Table %s: %s (N=%d)\n" % (tid, t["title"], n))
    for rname, scale in readings:
        out.write("\n[g reading: %s, g_effective = %g x column label%s]\n"
                  % (rname, scale, ", documented" if rname == documented else ""))
        hdr = ["mode", "g_label", "g_eff"]
        for b in bases:
            hdr += ["pub_" + b, "qem_" + b, "dev_%"]
        hdr += ["pub_" + exact_key, "exact", "dev_%"]
        lines = [hdr]
        for m in range(6):
            for col, gl in enumerate(labels):
                geff = gl * scale
                line = [str(m + 1), "%g" % gl, "%g" % geff]
                for b in bases:
                    pub = t["rows"][b][m][col]
                    q = _pick(qem[(rname, scale, col, gl, b)], m, problem, bc)
                    d = _rel(q, pub)
                    line += [_fmt(pub), _fmt(q), _fmt_pct(d)]
                    if q is not None:
                        rep.rows.append(ResultRow("table%s-%s-%s-g%g" % (tid, rname, b, gl), problem, bc, b, n, geff,
                                                  m + 1, float(q), "qem"))
                    if rname == documented:
                        target = pub if problem == "plate" else t["rows"][exact_key][m][col]
                        dd = _rel(q, target)
                        if dd is not None:
                            rep.checked += 1
                            rep.max_dev = max(rep.max_dev, abs(dd))
                            if abs(dd) > STRICT_TOL:
                                rep.failures.append((rname, b, m + 1, gl, q, target))
                pub = t["rows"][exact_key][m][col]
                o = orc[(rname, scale, col, gl)]
                ov = None if o is None or m >= len(o) else float(o[m])
                line += [_fmt(pub), _fmt(ov), _fmt_pct(_rel(ov, pub))]
                if ov is not None:
                    rep.rows.append(ResultRow("table%s-%s-exact-g%g" % (tid, rname, gl), problem, bc, "exact", n,
                                              geff, m + 1, ov, "oracle"))
                lines.append(line)
        out.write(_align(lines))
    out.write("\nstrict check: %d values, max |dev| = %.3f%%, %d above %.1f%%\n"
              % (rep.checked, 100 * rep.max_dev, len(rep.failures), 100 * STRICT_TOL))
    # published values as tagged rows
    for src, vals in t["rows"].items():
        for m in range(6):
            for col, gl in enumerate(labels):
                v = vals[m][col]
                if v is not None:
                    rep.rows.append(ResultRow("table%s-published-%s-g%g" % (tid, src, gl), problem, bc, src, n,
                                              gl * readings[-1][1], m + 1, float(v), "paper"))
    rep.text = out.getvalue()
    return rep


def _pick(vals, m, problem, bc):
    """m-th frequency as the published tables count it (distinct values for plates)."""
    if vals is None:
        return None
    if problem == "plate":
        from .plate_qem import distinct_frequencies
        vals = distinct_frequencies(vals, rtol=DISTINCT_RTOL)
    return float(vals[m]) if m < len(vals) else None


def _fmt(v):
    return "-" if v is None else "%.4f" % v


def _fmt_pct(d):
    return "-" if d is None else "%+.3f" % (100 * d)


def _align(lines):
    w = [max(len(r[i]) for r in lines) for i in range(len(lines[0]))]
    return "".join("  ".join(c.rjust(w[i]) for i, c in enumerate(r)) + "\n" for r in lines)


# -- output ------------------------------------------------------------------

def format_rows(rows, fmt="csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for r in rows:
            wr.writerow(r.as_csv())
        return buf.getvalue()
    return _align([CSV_HEADER] + [r.as_csv() for r in rows])


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _common(p, problem=None):
    p.add_argument("--config", help="flat JSON file with run keys; flags override it")
    if problem is None:
        p.add_argument("--problem", choices=["beam", "plate"])
    p.add_argument("--bc")
    p.add_argument("--basis")
    p.add_argument("--n", type=int)
    p.add_argument("--g", type=float)
    p.add_argument("--g-scale", dest="g_scale", type=float)
    p.add_argument("--modes", type=int)
    p.add_argument("--with-oracle", dest="with_oracle", action="store_true", default=None)
    p.add_argument("--format", choices=["csv", "table"])
    p.add_argument("--out")
    p.add_argument("--treatment", choices=["auto", "strong", "slope", "weak"])
    p.add_argument("--lh-edge", dest="lh_edge", choices=["lagrange", "hermite"])
    for k in ("E", "I", "A", "rho", "L", "nu", "h", "lx", "ly"):
        p.add_argument("--" + k, dest=k, type=float)


def build_parser():
    ap = _Parser(prog="gradqem", description="Quadrature-element vibration of gradient beams and plates.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    _common(sub.add_parser("beam", help="single beam analysis"), "beam")
    _common(sub.add_parser("plate", help="single plate analysis"), "plate")
    _common(sub.add_parser("oracle", help="exact frequencies only"))
    p = sub.add_parser("reproduce", help="rebuild a published comparison table")
    p.add_argument("--table", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--n", type=int)
    p.add_argument("--format", choices=["csv", "table"], default="table")
    p.add_argument("--out")
    p.add_argument("--treatment", choices=["auto", "strong", "slope", "weak"], default="auto")
    p.add_argument("--lh-edge", dest="lh_edge", choices=["lagrange", "hermite"], default="lagrange")
    p = sub.add_parser("converge", help="convergence study over N")
    _common(p)
    p.add_argument("--n-range", dest="n_range", default="7:13",
                   help="'lo:hi' (inclusive) or comma list")
    return ap


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def config_from_args(ns, problem=None) -> RunConfig:
    vals = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError("cannot read config: %s" % exc) from None
        if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
            raise UsageError("config must be a flat JSON object")
        for k, v in data.items():
            key = k.replace("-", "_")
            if key == "g_scale" or key in _CONFIG_KEYS:
                vals[key] = v
            else:
                raise UsageError("unknown config key %r" % k)
    for k in _CONFIG_KEYS:
        v = getattr(ns, k, None)
        if v is not None:
            vals[k] = v
    if problem is not None:
        if vals.get("problem", problem) != problem:
            raise UsageError("config problem %r conflicts with subcommand %r" % (vals["problem"], problem))
        vals["problem"] = problem
    return RunConfig(**vals)


def _n_range(spec):
    try:
        if ":" in spec:
            lo, hi = (int(x) for x in spec.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError("bad --n-range %r" % spec) from None


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:      # argparse: --help (0) or bad flags (1)
        return int(exc.code or 0)
    try:
        if ns.cmd in ("beam", "plate"):
            cfg = config_from_args(ns, ns.cmd)
            rows = run(cfg)
            _emit(format_rows(rows, cfg.format), ns.out)
        elif ns.cmd == "oracle":
            cfg = config_from_args(ns).normalized()
            om = oracle_frequencies(cfg, cfg.modes)
            rows = [ResultRow(case_id(cfg, "exact"), cfg.problem, cfg.bc, "exact", 0, cfg.g_effective, i + 1,
                              float(w), "oracle") for i, w in enumerate(om)]
            _emit(format_rows(rows, cfg.format), ns.out)
        elif ns.cmd == "converge":
            cfg = config_from_args(ns)
            rows = convergence_study(cfg, _n_range(ns.n_range))
            _emit(format_rows(rows, cfg.normalized().format), ns.out)
        else:
            rep = reproduce_table(ns.table, n=ns.n, treatment=ns.treatment, lh_edge=ns.lh_edge)
            _emit(rep.text if ns.format == "table" else format_rows(rep.rows, "csv"), ns.out)
            if ns.strict and not rep.ok:
                sys.stderr.write("strict: %d of %d values outside %.1f%%\n"
                                 % (len(rep.failures), rep.checked, 100 * STRICT_TOL))
                return 3
    except UsageError as exc:
        sys.stderr.write("gradqem: usage error: %s\n" % exc)
        return 1
    except (NumericalFailure,) + NUMERICAL_ERRORS as exc:
        sys.stderr.write("gradqem: numerical failure: %s\n" % exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
