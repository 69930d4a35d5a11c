"""Command-line driver: run pipeline documents and print verification reports.

A pipeline document is a JSON object::

    {"task": "factor" | "reduce" | "unitroot" | "verify",
     "ring": {"p": "5", "N": "12", ...},
     "inputs": {...}, "options": {...}, "seed": "0", "expect": {...}}

Any input may be replaced by ``{"random": kind, "n": "2"}``, which draws it
from :data:`robba.fixtures.GENERATORS` with a ``random.Random`` seeded by
the document seed.  The report lists every certified value the task computed
and one pass/fail line per check, and it contains nothing that depends on
the clock, so equal documents and seeds give byte-identical reports.
Timings are written to stderr instead.
"""
from __future__ import annotations

import argparse
import math
import random
import sys
import time
from fractions import Fraction

from . import fixtures
from .coeff import INF
from .factor import FactorizationError, approximate_inverse, birkhoff_factor, factor_full, is_plus_unit
from .residue import ResidueMatrix
from .serialize import (DocumentError, dumps, frac_str, loads, matrix_from_json, matrix_to_json,
                        module_from_json, module_to_json, parse_frac, parse_int, residue_from_json,
                        residue_to_json, ring_from_json, ring_to_json)
from .series import NotCertifiedError, PrecisionError, SeriesMatrix
from .sigma_nabla import (InconsistentReductionError, UnipotenceWitness, WitnessError, base_change,
                          check_compatibility, check_unipotent, semistable_reduce)
from .unitroot import UnitRootError, solve_artin_schreier, solve_lang_mult, unit_root_reduce

TASKS = ("factor", "reduce", "unitroot", "verify")
U64 = 2**64

# failures that belong in a report rather than a traceback
TASK_ERRORS = (FactorizationError, InconsistentReductionError, WitnessError, UnitRootError,
               NotCertifiedError, PrecisionError, ArithmeticError, ValueError)


def value_str(x) -> str:
    """Report encoding of a valuation-like value: a rational string or ``"inf"``."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if x == INF or (isinstance(x, float) and math.isinf(x)):
        return "inf" if x > 0 else "-inf"
    return frac_str(x)


class Report:
    """Collects outputs, values and checks for one document."""

    def __init__(self, doc: dict, seed: int):
        self.doc = doc
        self.seed = seed
        self.outputs: dict = {}
        self.values: dict = {}
        self.checks: list = []
        self.error: str | None = None

    def value(self, name, x):
        self.values[name] = value_str(x)

    def check(self, name, ok, detail=""):
        self.checks.append({"name": name, "pass": bool(ok), "detail": detail})

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["pass"] for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "task": self.doc.get("task"),
            "seed": str(self.seed),
            "ring": self.doc.get("ring"),
            "options": self.doc.get("options", {}),
            "outputs": self.outputs,
            "values": self.values,
            "checks": self.checks,
            "status": "pass" if self.passed else "fail",
        }
        if "name" in self.doc:
            out["name"] = self.doc["name"]
        if self.error is not None:
            out["error"] = self.error
        return out


# -- inputs --------------------------------------------------------------------


def _window(options):
    w = options.get("window")
    if w is None:
        return None
    if not isinstance(w, list) or len(w) != 2:
        raise DocumentError("options.window: expected [lo, hi]")
    return (parse_int(w[0], "options.window"), parse_int(w[1], "options.window"))


class _Inputs:
    """Decodes the ``inputs`` block, drawing random inputs from a seeded generator."""

    def __init__(self, doc, ring, seed, window):
        self.raw = doc.get("inputs", {})
        if not isinstance(self.raw, dict):
            raise DocumentError("inputs: expected an object")
        self.ring = ring
        self.window = window
        self.rng = random.Random(seed)
        self.generated = {}
        # random inputs are drawn in sorted key order so the draw is independent of key order in the file
        for key in sorted(self.raw):
            entry = self.raw[key]
            if isinstance(entry, dict) and "random" in entry:
                kind = entry["random"]
                if kind not in fixtures.GENERATORS:
                    raise DocumentError(f"inputs.{key}.random: unknown generator {kind!r}")
                n = parse_int(entry.get("n", 2), f"inputs.{key}.n")
                self.generated[key] = fixtures.GENERATORS[kind](self.rng, ring, n)

    def has(self, key):
        return key in self.raw

    def matrix(self, key) -> SeriesMatrix:
        if key not in self.raw:
            raise DocumentError(f"inputs.{key}: missing")
        if key in self.generated:
            return self.generated[key]
        return matrix_from_json(self.ring, self.raw[key], f"inputs.{key}", self.window)

    def module(self, key="module"):
        if key not in self.raw:
            raise DocumentError(f"inputs.{key}: missing")
        if key in self.generated:
            return self.generated[key]
        return module_from_json(self.ring, self.raw[key], f"inputs.{key}", self.window)


# -- tasks ---------------------------------------------------------------------


def _gauss(A, r):
    try:
        return A.gauss_norm(r).w
    except NotCertifiedError:
        return -INF


def _task_factor(rep: Report, ring, inp: _Inputs, opts):
    r = parse_frac(opts.get("r", "1/2"), "options.r")
    method = opts.get("method", "full")
    max_iters = parse_int(opts.get("max_iters", 20), "options.max_iters")
    F = Fraction(ring.N)
    U = inp.matrix("U")
    if method == "full":
        ff = factor_full(U, r, max_iters=max_iters)
        rep.outputs.update(V=matrix_to_json(ff.V), W=matrix_to_json(ff.W), X=matrix_to_json(ff.X),
                           Y=matrix_to_json(ff.Y))
        rep.value("reconstruction", ff.achieved_floor)
        rep.value("birkhoff_iterations", ff.birkhoff.iterations)
        # V is only determined up to a plus unit; this says whether it is one
        rep.value("V_plus_unit", is_plus_unit(ff.V, r, F))
        rep.check("reconstructs", ff.achieved_floor >= F, f"w_r(VW - U) >= {value_str(ff.achieved_floor)}")
        rep.check("W_plus", ff.W.is_plus())
        rep.check("W_plus_unit", is_plus_unit(ff.W, r, F))
        rep.check("contraction_monotone", ff.birkhoff.contraction_monotone())
    elif method == "birkhoff":
        bf = birkhoff_factor(U, r, max_iters)
        I = SeriesMatrix.identity(ring, U.n, U[0, 0].window)
        rep.outputs.update(Y=matrix_to_json(bf.Y), Z=matrix_to_json(bf.Z))
        rep.value("reconstruction", bf.achieved_floor)
        rep.value("iterations", bf.iterations)
        rep.check("reconstructs", bf.achieved_floor >= F, f"w_r(YZ - M) >= {value_str(bf.achieved_floor)}")
        rep.check("Y_strict_minus", (bf.Y - I).is_strict_minus())
        rep.check("Z_plus", bf.Z.is_plus())
        rep.check("contraction_monotone", bf.contraction_monotone(),
                  " -> ".join(value_str(d) for d in bf.deltas))
    elif method == "approximate_inverse":
        X = approximate_inverse(U, r)
        resid = X.mul(U) - SeriesMatrix.identity(ring, U.n, U[0, 0].window)
        w = _gauss(resid, r)
        rep.outputs["X"] = matrix_to_json(X)
        rep.value("residual", w)
        rep.check("residual_positive", w > 0, f"w_r(XU - I) >= {value_str(w)}")
    else:
        raise DocumentError(f"options.method: unknown factorization method {method!r}")


def _task_reduce(rep: Report, ring, inp: _Inputs, opts):
    r = parse_frac(opts.get("r", "1/2"), "options.r")
    M = inp.module()
    U = inp.matrix("witness")
    red = semistable_reduce(M, UnipotenceWitness(U), r)
    rep.outputs["module"] = module_to_json(red.module)
    rep.outputs["phi"] = matrix_to_json(red.module.phi)
    rep.outputs["nconn"] = matrix_to_json(red.module.nconn)
    for k in sorted(red.values):
        rep.value(k, red.values[k])
    for k in sorted(red.checks):
        rep.check(k, red.checks[k])


def _task_verify(rep: Report, ring, inp: _Inputs, opts):
    r = parse_frac(opts.get("r", "1/2"), "options.r")
    M = inp.module()
    before = check_compatibility(M, r)
    rep.value("compatibility_before", before.residual.w)
    rep.check("compatible_before", before.holds)
    rep.value("unipotent", check_unipotent(M))
    if inp.has("V"):
        V = inp.matrix("V")
        M2 = base_change(M, V, r=r)
        after = check_compatibility(M2, r)
        rep.outputs["phi_after"] = matrix_to_json(M2.phi)
        rep.outputs["nconn_after"] = matrix_to_json(M2.nconn)
        rep.value("compatibility_after", after.residual.w)
        rep.check("compatible_after", after.holds)


def _task_unitroot(rep: Report, ring, inp: _Inputs, opts):
    T = parse_int(opts.get("T", 30), "options.T")
    max_degree = parse_int(opts.get("max_degree", 64), "options.max_degree")
    if inp.has("B"):
        B = residue_from_json(ring.p, inp.raw["B"], "inputs.B").truncate(T)
        solver = opts.get("solver", "lang")
        if solver == "lang":
            sol = solve_lang_mult(B, T, ring.a, max_degree)
            ok = sol.D == B.embed(sol.field) * sol.D.tau(ring.a) and sol.D.is_invertible()
            rep.check("substitute_back", ok, "D = B D^tau")
        elif solver == "artin_schreier":
            sol = solve_artin_schreier(B, T, ring.a, max_degree)
            ok = sol.D.tau(ring.a) - sol.D == B.embed(sol.field)
            rep.check("substitute_back", ok, "D^tau - D = B")
        else:
            raise DocumentError(f"options.solver: unknown solver {solver!r}")
        rep.outputs["D"] = residue_to_json(sol.D)
        rep.outputs["search"] = _plain(sol.transcript)
        rep.value("m", sol.m)
        return
    Phi = inp.matrix("phi")
    res = unit_root_reduce(Phi, T=T, max_degree=max_degree)
    rep.outputs["C"] = [[[[str(c) for c in x] for x in row] for row in Cj] for Cj in res.C_coefficients()]
    rep.outputs["ring"] = ring_to_json(res.ring)
    rep.outputs["transcript"] = _plain(res.transcript)
    rep.value("d", res.d)
    rep.value("m", res.m)
    rep.value("residual", res.residual)
    rep.check("congruence", res.residual >= res.d,
              f"C^-1 Phi C^sigma = I mod p^{res.d} to t-degree {T}")
    rep.check("residue_invertible", ResidueMatrix.from_series_matrix(Phi, T).is_invertible())


def _plain(x):
    """Transcripts with every scalar turned into a string."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, bool):
        return x
    if isinstance(x, (int, Fraction)) or x == INF:
        return value_str(x)
    return x


RUNNERS = {"factor": _task_factor, "reduce": _task_reduce, "unitroot": _task_unitroot, "verify": _task_verify}


# -- expectations --------------------------------------------------------------


def _compare_expectations(rep: Report, ring, doc, window):
    r = parse_frac(doc.get("options", {}).get("r", "1/2"), "options.r")
    for key in sorted(doc.get("expect", {})):
        want = doc["expect"][key]
        name = f"expect.{key}"
        if isinstance(want, list):
            if key not in rep.outputs:
                rep.check(name, False, "output missing")
                continue
            got = matrix_from_json(ring, rep.outputs[key], name, window)
            exp = matrix_from_json(ring, want, name, window)
            w = _gauss(got - exp, r)
            rep.check(name, w >= ring.N, f"w_r(output - expected) >= {value_str(w)}")
        else:
            want_s = value_str(want) if isinstance(want, bool) else str(want)
            got = rep.values.get(key)
            rep.check(name, got == want_s, f"expected {want_s}, got {got}")


# -- entry points --------------------------------------------------------------


def _seed(doc, seed):
    if seed is None:
        seed = parse_int(doc.get("seed", 0), "seed")
    if not 0 <= seed < U64:
        raise DocumentError(f"seed: {seed} is not an unsigned 64-bit integer")
    return seed


def run(doc: dict, seed: int | None = None) -> Report:
    """Execute one pipeline document.

    Malformed documents raise :class:`DocumentError`; failures of the task
    itself are recorded in the report, whose status is then ``"fail"``.
    """
    if not isinstance(doc, dict):
        raise DocumentError("document: expected a JSON object")
    task = doc.get("task")
    if task not in TASKS:
        raise DocumentError(f"task: expected one of {', '.join(TASKS)}, got {task!r}")
    seed = _seed(doc, seed)
    ring = ring_from_json(doc.get("ring", {}))
    opts = doc.get("options", {})
    window = _window(opts)
    inp = _Inputs(doc, ring, seed, window)
    rep = Report(dict(doc, ring=ring_to_json(ring)), seed)
    try:
        RUNNERS[task](rep, ring, inp, opts)
    except DocumentError:
        raise
    except TASK_ERRORS as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        return rep
    _compare_expectations(rep, ring, doc, window)
    return rep


def selfcheck(seed: int = 0, log=None) -> dict:
    """Run the bundled corpus and the seeded smoke documents; return the combined report."""
    reports = []
    for doc in fixtures.corpus() + fixtures.smoke_documents(seed):
        t0 = time.perf_counter()
        rep = run(doc)
        if log is not None:
            print(f"{doc['name']}: {'pass' if rep.passed else 'FAIL'} ({time.perf_counter() - t0:.2f} s)",
                  file=log)
        reports.append(rep.to_json())
    ok = all(r["status"] == "pass" for r in reports)
    return {"selfcheck": True, "seed": str(seed), "documents": reports, "status": "pass" if ok else "fail"}


def _parse_u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < U64:
        raise argparse.ArgumentTypeError(f"not an unsigned 64-bit integer: {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robba", description="Run factorization, reduction and unit-root pipelines.")
    ap.add_argument("--task", choices=TASKS, help="task to run (overrides the document's task)")
    ap.add_argument("--input", help="pipeline document (JSON); '-' reads stdin")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--seed", type=_parse_u64, help="seed for random inputs (overrides the document's seed)")
    ap.add_argument("--selfcheck", action="store_true", help="run the bundled fixture corpus and smoke suite")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.selfcheck:
            report = selfcheck(args.seed or 0, log=sys.stderr)
            ok = report["status"] == "pass"
        else:
            if not args.input:
                print("robba: --input is required unless --selfcheck is given", file=sys.stderr)
                return 1
            text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
            doc = loads(text)
            if args.task:
                if not isinstance(doc, dict):
                    raise DocumentError("document: expected a JSON object")
                doc["task"] = args.task
            rep = run(doc, args.seed)
            report = rep.to_json()
            ok = rep.passed
    except DocumentError as exc:
        print(f"robba: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"robba: {exc}", file=sys.stderr)
        return 1
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"robba: {'pass' if ok else 'fail'} in {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
