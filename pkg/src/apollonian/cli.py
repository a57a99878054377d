"""Command-line reports: census, admissibility, delta fit, exponential sums,
singular series, spectra, the circle-method toy harness, invariant
verification, and an SVG rendering of the gasket.

Reports are deterministic JSON with sorted keys.  Empirically measured
constants (stand-ins for implicit big-O constants) live in a frozen
registry: the first run with --freeze writes them, later runs compare
within the declared tolerances, and --ci forbids writes.

Exit codes: 0 pass, 1 invariant failure, 2 invalid input, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, congruence, core, expsums, forms, orbit, spectral

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

DEFAULT_ROOT = (-11, 21, 24, 28)


def _default_registry_path() -> Path:
    cache = os.environ.get("APOLLO_CACHE_DIR")
    if cache:
        return Path(cache) / "frozen.json"
    try:
        return Path(str(resources.files("apollonian").joinpath("data/frozen.json")))
    except Exception:
        return Path("apollonian_frozen.json")


class FrozenMismatch(AssertionError):
    pass


class FrozenRegistry:
    """First run records constants; later runs regress against them."""

    def __init__(self, path, freeze: bool = False, ci: bool = False):
        self.path = Path(path)
        self.freeze = freeze
        self.ci = ci
        self.data = {}
        self.dirty = False
        self.mismatches = []
        if self.path.exists():
            self.data = json.loads(self.path.read_text()).get("constants", {})

    def record(self, name: str, value, rtol: float = 0.0, atol: float = 0.0):
        if isinstance(value, (np.integer,)):
            value = int(value)
        if isinstance(value, (np.floating,)):
            value = float(value)
        if name not in self.data or self.freeze:
            if self.ci and name not in self.data:
                self.mismatches.append(f"{name}: missing from registry in CI mode")
                return value
            if name not in self.data or self.freeze:
                self.data[name] = {"value": value, "rtol": rtol, "atol": atol}
                self.dirty = True
            return value
        ref = self.data[name]
        rv = ref["value"]
        tol = ref.get("atol", 0.0) + ref.get("rtol", 0.0) * abs(rv if isinstance(rv, (int, float)) else 0)
        if isinstance(rv, (int, float)) and isinstance(value, (int, float)):
            if abs(value - rv) > tol:
                self.mismatches.append(f"{name}: got {value}, frozen {rv} (tol {tol})")
        elif value != rv:
            self.mismatches.append(f"{name}: got {value!r}, frozen {rv!r}")
        return value

    def save(self):
        if self.ci:
            if self.dirty:
                raise FrozenMismatch("registry writes are forbidden in CI mode")
            return
        if self.dirty:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(
                {"version": 1, "constants": self.data}, indent=1, sort_keys=True))
            self.dirty = False

    def check(self):
        if self.mismatches:
            raise FrozenMismatch("; ".join(self.mismatches))


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set)):
        return [_jsonable(v) for v in sorted(x) if isinstance(x, set)] if isinstance(x, set) \
            else [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def emit_report(command: str, config: dict, results: dict, out=None,
                fmt: str = "json", t0: float | None = None) -> dict:
    config = {k: v for k, v in config.items() if not callable(v)}
    report = {
        "command": command,
        "config": _jsonable(config),
        "results": _jsonable(results),
        "version": __version__,
        "elapsed_s": round(time.time() - t0, 3) if t0 else None,
    }
    text = json.dumps(report, indent=1, sort_keys=True)
    if fmt == "csv" and isinstance(results.get("table"), list):
        rows = results["table"]
        lines = [",".join(str(c) for c in row) for row in rows]
        text = "\n".join(lines)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)
    return report


def _parse_root(s: str):
    try:
        parts = tuple(int(x) for x in s.split(","))
    except ValueError:
        raise SystemExit(EXIT_INPUT)
    if len(parts) != 4:
        print("root must be a,b,c,d", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)
    return parts


def cmd_gasket(args) -> int:
    t0 = time.time()
    root = _parse_root(args.root)
    if core.descartes_form(root) != 0:
        print(f"root {root} violates the Descartes relation", file=sys.stderr)
        return EXIT_INPUT
    if args.limit > 2 * 10**9:
        print(f"warning: limit {args.limit} needs about "
              f"{args.limit / 1e9:.0f} GB of scratch memory", file=sys.stderr)
    try:
        adm = congruence.admissible_classes(24, root)
        cs = orbit.enumerate_curvatures(root, args.limit, threads=args.threads)
        rep = orbit.census(root, args.limit, adm, curvatures=cs)
    except orbit.CapExceededError as e:
        print(e, file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(e, file=sys.stderr)
        return EXIT_INPUT
    if args.snapshot:
        cs.save(args.snapshot)
    results = {
        "residue_counts": rep.residue_counts,
        "curvature_count": rep.curvature_count,
        "admissible_count": rep.admissible_count,
        "exception_count": int(rep.exceptions.size),
        "exceptions_head": rep.exceptions[:50],
        "dyadic_exceptions": rep.dyadic_exceptions,
        "density": rep.density,
    }
    if args.limit <= 1000:
        results["curvatures"] = cs.values()
    emit_report("gasket", vars(args), results, args.out, args.format, t0)
    return EXIT_OK


def cmd_admissible(args) -> int:
    t0 = time.time()
    root = _parse_root(args.root)
    qs = [int(x) for x in args.q.split(",")]
    results = {}
    for q in qs:
        results[str(q)] = sorted(congruence.admissible_classes(q, root))
    emit_report("admissible", vars(args), results, args.out, args.format, t0)
    return EXIT_OK


def cmd_delta_fit(args) -> int:
    t0 = time.time()
    ys = np.geomspace(args.ymin, args.ymax, args.points)
    try:
        table = orbit.norm_ball_count(ys)
    except orbit.CapExceededError as e:
        print(e, file=sys.stderr)
        return EXIT_RESOURCE
    delta = orbit.fit_delta(table)
    results = {
        "delta": delta,
        "table": [[float(y), int(c)] for y, c in zip(table.ys, table.counts)],
    }
    emit_report("delta-fit", vars(args), results, args.out, args.format, t0)
    return EXIT_OK


def cmd_expsum(args) -> int:
    t0 = time.time()
    A, B, C, a = (int(x) for x in args.form.split(","))
    f = forms.ShiftedForm(A, B, C, a)
    val = expsums.sf_direct(f, args.q0, args.r, args.n, args.m)
    results = {"sf_direct": val}
    if args.q0 % 2 == 1:
        results["sf_closed"] = expsums.sf_closed(f, args.q0, args.r, args.n, args.m)
        results["agreement"] = abs(results["sf_closed"] - val)
    emit_report("expsum", vars(args), results, args.out, args.format, t0)
    return EXIT_OK


def cmd_singular(args) -> int:
    t0 = time.time()
    root = _parse_root(args.root)
    val = expsums.singular_series(args.n, root, args.pcut, args.depth)
    results = {
        "n": args.n,
        "singular_series": val,
        "admissible": congruence.is_admissible(args.n, root),
        "note": "non-admissible" if val == 0 else "admissible",
    }
    emit_report("singular", vars(args), results, args.out, args.format, t0)
    return EXIT_OK


def cmd_spectral(args) -> int:
    t0 = time.time()
    qs = [int(x) for x in args.q.split(",")]
    results = {}
    try:
        for q in qs:
            entry = {}
            spec = spectral.markov_spectrum(q, seed=args.seed)
            entry["group_order"] = spec.group_order
            entry["s_size"] = spec.s_size
            entry["eigenvalues"] = list(spec.eigenvalues)
            if args.check == "transference":
                rep = spectral.transference_check(q)
                entry["transference"] = {
                    "k": rep.k_alt, "lhs": rep.lhs, "rhs": rep.rhs,
                    "holds": rep.holds,
                }
                entry["status"] = "PASS" if rep.holds else "FAIL"
            if args.check == "alternation":
                k, sizes = spectral.alternation_length(q)
                entry["alternation_k"] = k
                entry["set_sizes"] = sizes
            results[str(q)] = entry
    except orbit.CapExceededError as e:
        print(e, file=sys.stderr)
        return EXIT_RESOURCE
    emit_report("spectral", vars(args), results, args.out, args.format, t0)
    if args.check == "transference" and not all(
            v.get("transference", {}).get("holds", True) for v in results.values()):
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_circle(args) -> int:
    t0 = time.time()
    root = _parse_root(args.root)
    try:
        fam = orbit.build_family(root, args.t1, args.t2)
    except ValueError as e:
        print(e, file=sys.stderr)
        return EXIT_INPUT
    rep = expsums.representation_number(fam, args.x, args.u if args.u else None)
    n_scale = fam.t * args.x * args.x
    try:
        dec = expsums.major_arc_decomposition(rep, n_scale, args.q0cap, args.k0,
                                              args.grid)
    except expsums.GridTooCoarseError as e:
        print(e, file=sys.stderr)
        return EXIT_INPUT
    resid = float(np.abs(dec.major + dec.error - dec.folded).max())
    minor = expsums.minor_arc_report(rep, n_scale, args.q0cap, args.k0,
                                     min(args.grid, 1 << 12), args.x * fam.t)
    results = {
        "family_size": len(fam),
        "support_size": len(rep.values),
        "total_mass": rep.total_mass(),
        "n_scale": n_scale,
        "decomposition_residual": resid,
        "minor_arc_report": minor,
    }
    emit_report("circle", vars(args), results, args.out, args.format, t0)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.time()
    registry = FrozenRegistry(args.registry or _default_registry_path(),
                              freeze=args.freeze, ci=args.ci)
    mods = args.modules.split(",") if args.modules else [
        "core", "orbit", "congruence", "forms", "expsums", "spectral"]
    root = DEFAULT_ROOT
    rng = np.random.default_rng(args.seed)
    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}")

    if "core" in mods:
        ok = core.descartes_form(root) == 0
        for _ in range(200):
            v = _random_cone_point(rng)
            ok &= all(core.descartes_form(core.apply_reflection(i, v)) == 0
                      for i in (1, 2, 3, 4))
        check("core: reflections preserve the cone", ok)
        ok = all(core.xi(x, y)[3] == core.w_vector(x, y)
                 for (x, y) in ((0, 1), (1, 1), (2, -3), (-4, 9)))
        check("core: xi bottom rows", ok)
        ok = all(core.in_gamma(core.iota(g)) for g in core.SPIN_PREIMAGE_GENERATORS)
        check("core: spin preimage generators land in Gamma", ok)
    if "orbit" in mods:
        cs = orbit.enumerate_curvatures(root, 100)
        ok = set(cs.values().tolist()) == {21, 24, 28, 40, 52, 61, 76, 85, 96}
        check("orbit: curvature set at 100", ok)
    if "congruence" in mods:
        ok = sorted(congruence.admissible_classes(24, root)) == [0, 4, 12, 13, 16, 21]
        check("congruence: admissible classes mod 24", ok)
        ok = congruence.quotient_order(6) == congruence.quotient_order(2) * congruence.quotient_order(3)
        check("congruence: multiplicativity at 6", ok)
    if "forms" in mods:
        f = forms.extract_form(core.IDENTITY, root)
        ok = (f.A, f.B, f.C, f.a) == (10, 7, 17, -11) and forms.evaluate(f, 1, 1) == 96
        check("forms: identity form and value", ok)
    if "expsums" in mods:
        f = forms.ShiftedForm(10, 7, 17, -11)
        ok = abs(expsums.sf_direct(f, 3, 1, 0, 0) + 1 / 3) < 1e-9
        from math import gcd as _g
        for q0 in (3, 5, 7, 9, 15):
            for r in range(1, q0):
                if _g(r, q0) != 1:
                    continue
                for (n, m) in ((0, 0), (1, 2), (3, 1)):
                    ok &= abs(expsums.sf_closed(f, q0, r, n, m)
                              - expsums.sf_direct(f, q0, r, n, m)) < 1e-9
        check("expsums: closed form vs direct sum", ok)
        val = registry.record("verify.singular_series_96",
                              expsums.singular_series(96, root), rtol=1e-9)
        check("expsums: singular series at 96 frozen", not registry.mismatches)
    if "spectral" in mods:
        ok = spectral.generator_correspondence_check()["all_match"]
        check("spectral: generator correspondence", ok)
        lam = registry.record("verify.lambda1_q4",
                              spectral.markov_spectrum(4).eigenvalues[1], atol=1e-6)
        check("spectral: lambda1(4) frozen", not registry.mismatches)

    try:
        registry.check()
        registry.save()
    except FrozenMismatch as e:
        print(f"frozen-constant mismatch: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    ok_all = all(ok for _, ok in checks)
    emit_report("verify", vars(args), {"checks": {n: ok for n, ok in checks}},
                args.out, args.format, t0)
    return EXIT_OK if ok_all else EXIT_INVARIANT


def _random_cone_point(rng) -> tuple:
    word = [int(rng.integers(1, 5)) for _ in range(int(rng.integers(0, 8)))]
    return core.apply_word(word, DEFAULT_ROOT)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _root_positions(root):
    """Centers and radii of the four root circles; the first is the bounding
    circle (negative curvature), centered at the origin."""
    b1, b2, b3, b4 = root
    if b1 >= 0 or min(b2, b3, b4) <= 0:
        raise ValueError("expected one bounding circle and three positive")
    r1, r2, r3, r4 = (1 / abs(b1), 1 / b2, 1 / b3, 1 / b4)
    z1 = 0 + 0j
    z2 = complex(r1 - r2, 0)
    z3 = _tangent_point(z1, r1, True, z2, r2, False, r3)
    z4a = _tangent_point(z1, r1, True, z2, r2, False, r4)
    z4b = None
    # two candidates (mirror images); pick the one tangent to circle 3
    for cand in (z4a, np.conj(z4a)):
        if abs(abs(cand - z3) - (r3 + r4)) < 1e-9:
            z4b = cand
            break
    if z4b is None:
        # circle 3 mirror choice instead
        z3 = np.conj(z3)
        for cand in (z4a, np.conj(z4a)):
            if abs(abs(cand - z3) - (r3 + r4)) < 1e-9:
                z4b = cand
                break
    if z4b is None:
        raise ValueError("could not realize the root quadruple")
    return [(b1, z1), (b2, z2), (b3, z3), (b4, z4b)]


def _tangent_point(z1, r1, inside1, z2, r2, inside2, r):
    """Center of a circle of radius r tangent to both given circles."""
    d1 = r1 - r if inside1 else r1 + r
    d2 = r2 - r if inside2 else r2 + r
    d = abs(z2 - z1)
    x = (d * d + d1 * d1 - d2 * d2) / (2 * d)
    y2 = d1 * d1 - x * x
    y = math.sqrt(max(y2, 0.0))
    u = (z2 - z1) / d
    return z1 + u * complex(x, y)


def render_svg(root, depth: int, size: int = 800) -> str:
    """SVG of the gasket: the reflection tree acts on curvature and
    curvature-times-center coordinates jointly."""
    circles = _root_positions(root)
    state = np.array(
        [[b, b * z.real, b * z.imag] for b, z in circles], dtype=float)
    seen = [tuple(row) for row in state]
    frontier = [(state, -1)]
    for _ in range(depth):
        nxt = []
        for st, last in frontier:
            s = st.sum(axis=0)
            for i in range(4):
                if i == last:
                    continue
                child = st.copy()
                child[i] = 2 * (s - st[i]) - st[i]
                nxt.append((child, i))
                seen.append(tuple(child[i]))
        frontier = nxt
    scale = size / (2.2 / abs(root[0]))
    cx = cy = size / 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for b, bx, by in seen:
        if b == 0:
            continue
        r = abs(1 / b) * scale
        x = cx + (bx / b) * scale
        y = cy + (by / b) * scale
        parts.append(
            f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{r:.3f}" fill="none" '
            f'stroke="black" stroke-width="0.6"/>')
        if r > 9:
            parts.append(
                f'<text x="{x:.3f}" y="{y + 3:.3f}" font-size="{max(r / 3, 6):.0f}" '
                f'text-anchor="middle">{int(round(b))}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def cmd_render(args) -> int:
    t0 = time.time()
    root = _parse_root(args.root)
    if core.descartes_form(root) != 0:
        print("root violates the Descartes relation", file=sys.stderr)
        return EXIT_INPUT
    try:
        svg = render_svg(root, args.depth)
    except ValueError as e:
        print(e, file=sys.stderr)
        return EXIT_INPUT
    out = args.out or "gasket.svg"
    Path(out).write_text(svg)
    print(f"wrote {out} ({time.time() - t0:.2f}s)")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--root", default="-11,21,24,28")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="apollonian",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gasket", help="curvature census up to a bound")
    _add_common(p)
    p.add_argument("--limit", type=int, default=10**8,
                   help="bound N (default 1e8, about a minute; 1e10 supported)")
    p.add_argument("--snapshot", default=None, help="write the bitset file")
    p.set_defaults(func=cmd_gasket)

    p = sub.add_parser("admissible", help="admissible residue classes")
    _add_common(p)
    p.add_argument("--q", default="24")
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("delta-fit", help="norm-ball growth exponent")
    _add_common(p)
    p.add_argument("--ymin", type=float, default=100.0)
    p.add_argument("--ymax", type=float, default=10000.0)
    p.add_argument("--points", type=int, default=25)
    p.set_defaults(func=cmd_delta_fit)

    p = sub.add_parser("expsum", help="local exponential sum values")
    _add_common(p)
    p.add_argument("--form", default="10,7,17,-11")
    p.add_argument("--q0", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.set_defaults(func=cmd_expsum)

    p = sub.add_parser("singular", help="singular series value")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pcut", type=int, default=13)
    p.add_argument("--depth", type=int, default=1)
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("spectral", help="quotient spectra and transference")
    _add_common(p)
    p.add_argument("--q", default="2,3,4")
    p.add_argument("--check", choices=("spectrum", "transference", "alternation"),
                   default="spectrum")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("circle", help="toy circle-method decomposition")
    _add_common(p)
    p.add_argument("--t1", type=int, default=8)
    p.add_argument("--t2", type=int, default=8)
    p.add_argument("--x", type=int, default=32)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--q0cap", type=int, default=8)
    p.add_argument("--k0", type=float, default=64.0)
    p.add_argument("--grid", type=int, default=1 << 16)
    p.set_defaults(func=cmd_circle)

    p = sub.add_parser("verify", help="run the cross-module invariant suite")
    _add_common(p)
    p.add_argument("--modules", default=None)
    p.add_argument("--registry", default=None)
    p.add_argument("--freeze", action="store_true")
    p.add_argument("--ci", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="SVG of the gasket")
    _add_common(p)
    p.add_argument("--depth", type=int, default=4)
    p.set_defaults(func=cmd_render)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except orbit.CapExceededError as e:
        print(e, file=sys.stderr)
        return EXIT_RESOURCE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
