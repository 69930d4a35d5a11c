"""Canonical JSON encodings for rings, coefficients, series, matrices and modules.

Conventions:

* every integer is written as a decimal string, so sizes never depend on a
  JSON reader's number type;
* rationals are strings ``"num/den"`` (or just ``"num"`` when den = 1);
* documents are dumped with sorted keys and a fixed indent, which makes
  ``dumps(loads(text)) == text`` for anything :func:`dumps` produced.

A series is ``{"lo", "hi", "coeffs": {"i": {"val": v, "unit": [...]}},
"tail_lo", "tail_hi", "error", "floor"}``.  The unit part of a stored
coefficient is the exact integer vector, not its reduction modulo p^N, so
series round-trip without loss.  ``error`` is the certificate for the
truncated tails and ``floor`` the rounding level in force.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .coeff import INF, CoeffElem, CoeffRing, vp_int
from .series import DEFAULT_WINDOW, ErrorBound, Floor, LaurentSeries, SeriesMatrix


class DocumentError(ValueError):
    """A malformed document; the message names where the problem is."""


# -- scalars -----------------------------------------------------------------


def frac_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def int_str(x) -> str:
    return str(int(x))


def parse_int(x, where: str = "value") -> int:
    if isinstance(x, bool):
        raise DocumentError(f"{where}: expected an integer, got a boolean")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x.strip())
        except ValueError:
            pass
    raise DocumentError(f"{where}: expected an integer (decimal string), got {x!r}")


def parse_frac(x, where: str = "value") -> Fraction:
    if isinstance(x, bool):
        raise DocumentError(f"{where}: expected a rational, got a boolean")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise DocumentError(f"{where}: expected a rational \"num/den\", got {x!r}")


# -- rings and coefficients --------------------------------------------------


def ring_to_json(ring: CoeffRing) -> dict:
    return {"p": int_str(ring.p), "a": int_str(ring.a), "m": int_str(ring.m), "N": int_str(ring.N),
            "modulus": [int_str(c) for c in ring.modulus]}


def ring_from_json(d: dict, where: str = "ring") -> CoeffRing:
    if not isinstance(d, dict):
        raise DocumentError(f"{where}: expected an object")
    try:
        p = parse_int(d.get("p", 5), f"{where}.p")
        a = parse_int(d.get("a", 1), f"{where}.a")
        m = parse_int(d.get("m", 1), f"{where}.m")
        N = parse_int(d.get("N", 12), f"{where}.N")
        modulus = d.get("modulus")
        if modulus is not None:
            modulus = [parse_int(c, f"{where}.modulus") for c in modulus]
        return CoeffRing(p, a, m, N, modulus)
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(f"{where}: {exc}") from exc


def coeff_to_json(c: CoeffElem) -> dict:
    return {"val": None if c.val == INF else int_str(c.val), "unit": [int_str(x) for x in c.unit]}


def coeff_from_json(ring: CoeffRing, d: dict, where: str = "coefficient") -> CoeffElem:
    unit = [parse_int(x, f"{where}.unit") for x in d.get("unit", [])]
    if d.get("val") is None:
        return ring.zero()
    val = parse_int(d["val"], f"{where}.val")
    if len(unit) > ring.m:
        raise DocumentError(f"{where}: unit has more than m = {ring.m} coordinates")
    unit += [0] * (ring.m - len(unit))
    if all(x % ring.p == 0 for x in unit):
        raise DocumentError(f"{where}: unit part must be nonzero modulo p")
    return CoeffElem.from_integers(ring, val, unit, ring.N)


# -- series ------------------------------------------------------------------


def floor_to_json(fl: Floor | None):
    if fl is None:
        return None
    return {"F": frac_str(fl.F), "s1": frac_str(fl.s1), "s2": frac_str(fl.s2)}


def floor_from_json(d, where: str = "floor") -> Floor | None:
    if d is None:
        return None
    return Floor(parse_frac(d["F"], f"{where}.F"), parse_frac(d["s1"], f"{where}.s1"),
                 parse_frac(d["s2"], f"{where}.s2"))


def error_from_json(d, where: str = "error") -> ErrorBound | None:
    if d is None:
        return None
    pts = [(parse_int(i, f"{where}.points"), parse_frac(v, f"{where}.points")) for i, v in d["points"]]
    smax = None if d.get("smax") is None else parse_frac(d["smax"], f"{where}.smax")
    elo = -INF if d.get("elo") is None else parse_int(d["elo"], f"{where}.elo")
    ehi = INF if d.get("ehi") is None else parse_int(d["ehi"], f"{where}.ehi")
    return ErrorBound(pts, parse_frac(d.get("smin", "0"), f"{where}.smin"), smax, elo, ehi)


def _vector_to_json(vec, den: int, p: int) -> dict:
    """Exact coefficient vec / p^den as {"val", "unit"} with an unreduced integer unit part."""
    nz = [c for c in vec if c]
    if not nz:
        return {"val": None, "unit": ["0"] * len(vec)}
    v = min(vp_int(c, p) for c in nz)
    pv = p**v
    return {"val": int_str(v - den), "unit": [int_str(c // pv) for c in vec]}


def series_to_json(f: LaurentSeries) -> dict:
    p, den = f.ring.p, f.den
    coeffs = {int_str(i): _vector_to_json(f.coeff_vector(i), den, p) for i in f.exponents()}
    return {"lo": int_str(f.lo), "hi": int_str(f.hi), "coeffs": coeffs,
            "tail_lo": f.tail_lo, "tail_hi": f.tail_hi,
            "error": None if f.err is None else f.err.to_json(),
            "floor": floor_to_json(f.floor)}


def _term_vector(ring: CoeffRing, c, where: str) -> list[Fraction]:
    m = ring.m
    if isinstance(c, dict):
        unit = [parse_int(x, f"{where}.unit") for x in c.get("unit", [])]
        if len(unit) > m:
            raise DocumentError(f"{where}: unit has more than m = {m} coordinates")
        unit += [0] * (m - len(unit))
        if c.get("val") is None:
            if any(unit):
                raise DocumentError(f"{where}: val is null but unit is nonzero")
            return [Fraction(0)] * m
        val = parse_int(c["val"], f"{where}.val")
        if all(x % ring.p == 0 for x in unit):
            raise DocumentError(f"{where}: unit part must be nonzero modulo p")
        s = Fraction(ring.p) ** val
        return [x * s for x in unit]
    if isinstance(c, list):
        if len(c) > m:
            raise DocumentError(f"{where}: more than m = {m} coordinates")
        return [parse_frac(x, where) for x in c] + [Fraction(0)] * (m - len(c))
    return [parse_frac(c, where)] + [Fraction(0)] * (m - 1)


def series_from_json(ring: CoeffRing, d, where: str = "series", window=None) -> LaurentSeries:
    """Decode a series.

    Besides the full form, a bare ``{"exponent": value}`` object is accepted
    as shorthand, where a value is a rational string, a list of coordinates
    or a coefficient object.
    """
    if not isinstance(d, dict):
        raise DocumentError(f"{where}: expected a series object")
    if "coeffs" not in d:
        d = {"coeffs": d}
    if "lo" in d or "hi" in d:
        window = (parse_int(d["lo"], f"{where}.lo"), parse_int(d["hi"], f"{where}.hi"))
    window = window or DEFAULT_WINDOW
    fl = floor_from_json(d.get("floor"), f"{where}.floor")
    err = error_from_json(d.get("error"), f"{where}.error")
    if not isinstance(d["coeffs"], dict):
        raise DocumentError(f"{where}.coeffs: expected an object keyed by exponent")
    p = ring.p
    vecs = {}
    for key, val in d["coeffs"].items():
        i = parse_int(key, f"{where}.coeffs")
        vecs[i] = _term_vector(ring, val, f"{where}.coeffs[{key}]")
    den = 0
    for v in vecs.values():
        for x in v:
            if x:
                dv = vp_int(x.denominator, p)
                if x.denominator != p**dv:
                    raise DocumentError(f"{where}: coefficient {frac_str(x)} is not in Z[1/{p}]; "
                                        "give it as a coefficient object")
                den = max(den, dv)
    vecs = {i: v for i, v in vecs.items() if any(v)}
    if not vecs:
        out = LaurentSeries.zero(ring, window, fl)
    else:
        lo, hi = min(vecs), max(vecs)
        parts = [[0] * (hi - lo + 1) for _ in range(ring.m)]
        for i, v in vecs.items():
            for k, x in enumerate(v):
                parts[k][i - lo] = int(x * p**den)
        out = LaurentSeries(ring, lo, den, parts, None, window, fl)
    return out.with_error(err) if err is not None else out


def matrix_to_json(M: SeriesMatrix) -> list:
    return [[series_to_json(e) for e in row] for row in M.rows]


def matrix_from_json(ring: CoeffRing, d, where: str = "matrix", window=None) -> SeriesMatrix:
    if not isinstance(d, list) or not d or any(not isinstance(r, list) or len(r) != len(d) for r in d):
        raise DocumentError(f"{where}: expected a square list of rows")
    return SeriesMatrix([[series_from_json(ring, e, f"{where}[{i}][{j}]", window) for j, e in enumerate(row)]
                         for i, row in enumerate(d)])


def module_to_json(M) -> dict:
    frob = {"q": int_str(M.frob.q),
            "image_of_u": None if M.frob.is_default() else series_to_json(M.frob.image_of_u)}
    return {"n": int_str(M.n), "phi": matrix_to_json(M.phi), "nconn": matrix_to_json(M.nconn),
            "frob": frob, "ring": M.ring_kind}


def module_from_json(ring: CoeffRing, d, where: str = "module", window=None):
    from .sigma_nabla import FrobeniusLift, SigmaNablaModule

    if not isinstance(d, dict) or "phi" not in d or "nconn" not in d:
        raise DocumentError(f"{where}: expected an object with \"phi\" and \"nconn\"")
    phi = matrix_from_json(ring, d["phi"], f"{where}.phi", window)
    N = matrix_from_json(ring, d["nconn"], f"{where}.nconn", window)
    if "n" in d and parse_int(d["n"], f"{where}.n") != phi.n:
        raise DocumentError(f"{where}.n: does not match the size of phi")
    frob = d.get("frob") or {}
    if "q" in frob and parse_int(frob["q"], f"{where}.frob.q") != ring.q:
        raise DocumentError(f"{where}.frob.q: does not match the ring (q = {ring.q})")
    img = frob.get("image_of_u")
    try:
        lift = FrobeniusLift(ring, None if img is None else series_from_json(ring, img, f"{where}.frob.image_of_u",
                                                                             window))
        return SigmaNablaModule(phi, N, lift, d.get("ring", "R"))
    except ValueError as exc:
        raise DocumentError(f"{where}: {exc}") from exc


# -- residue matrices --------------------------------------------------------


def residue_to_json(D) -> dict:
    K = D.field
    entries = []
    for i in range(D.n):
        row = []
        for k in range(D.n):
            s = D.entry(i, k)
            row.append({int_str(j): [int_str(c) for c in K.coords(x)] for j, x in sorted(s.coeffs.items())})
        entries.append(row)
    return {"m": int_str(K.m), "T": int_str(D.T), "entries": entries,
            "modulus": [int_str(c) for c in K.modulus]}


def residue_from_json(p: int, d, where: str = "residue"):
    from .coeff import first_irreducible
    from .residue import ResidueField, ResidueMatrix

    m = parse_int(d.get("m", 1), f"{where}.m")
    modulus = d.get("modulus")
    modulus = first_irreducible(p, m) if modulus is None else [parse_int(c, f"{where}.modulus") for c in modulus]
    K = ResidueField(p, modulus)
    T = parse_int(d["T"], f"{where}.T")
    entries = []
    for i, row in enumerate(d["entries"]):
        out = []
        for k, e in enumerate(row):
            ent = {}
            for j, c in e.items():
                jj = parse_int(j, f"{where}.entries[{i}][{k}]")
                if jj < 0:
                    raise DocumentError(f"{where}.entries[{i}][{k}]: negative t-exponent {jj}")
                ent[jj] = K.from_coords([parse_int(x, where) for x in c]) if isinstance(c, list) else K(parse_int(c))
            out.append(ent)
        entries.append(out)
    return ResidueMatrix.from_entries(K, entries, T)


# -- documents ---------------------------------------------------------------


def dumps(obj) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


__all__ = [
    "DocumentError", "frac_str", "int_str", "parse_int", "parse_frac",
    "ring_to_json", "ring_from_json", "coeff_to_json", "coeff_from_json",
    "floor_to_json", "floor_from_json", "error_from_json",
    "series_to_json", "series_from_json", "matrix_to_json", "matrix_from_json",
    "module_to_json", "module_from_json", "residue_to_json", "residue_from_json",
    "dumps", "loads",
]
