"""Command-line front end: `susy-kernel <group> <command> [options]`.

Exit codes: 0 when every check passes, 1 when a check fails or a library
error is reported, 2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from . import atlas as atl
from . import elliptic as ell
from . import fop
from . import susy
from .grassmann import DNumber, GrassmannAlgebra, GrassmannError
from .superfn import ChartError, parse_vector_field
from .symcore import ParseError, SymbolicError, normalize, parse

SCHEMA = 1

ERROR_CODES = [
    (ParseError, "parse-error"),
    (SymbolicError, "symbolic-error"),
    (ChartError, "chart-error"),
    (atl.AtlasError, "atlas-error"),
    (susy.SusyError, "susy-error"),
    (fop.FopError, "fop-error"),
    (GrassmannError, "grassmann-error"),
    (ell.EllipticError, "elliptic-error"),
    (ZeroDivisionError, "division-by-zero"),
    (ValueError, "value-error"),
]


class UsageError(Exception):
    pass


class Report:
    def __init__(self, command: str, inputs: dict, timing: bool = False):
        self.command = command
        self.inputs = inputs
        self.checks = []
        self.data = {}
        self.timing = timing
        self._t = time.perf_counter()

    def check(self, name, passed, **detail):
        rec = {"name": name, "verdict": "pass" if passed else "fail"}
        rec.update(detail)
        if self.timing:
            now = time.perf_counter()
            rec["elapsed"] = round(now - self._t, 6)
            self._t = now
        self.checks.append(rec)
        return passed

    def error(self, exc: Exception):
        code = next((c for t, c in ERROR_CODES if isinstance(exc, t)), "internal-error")
        self.checks.append({"name": "error", "verdict": "fail", "code": code, "witness": str(exc)})

    @property
    def passed(self):
        return bool(self.checks) and all(c["verdict"] == "pass" for c in self.checks)

    def to_json(self):
        return {"schema": SCHEMA, "command": self.command, "inputs": self.inputs,
                "checks": self.checks, "data": self.data,
                "verdict": "pass" if self.passed else "fail"}

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.to_json(), indent=2, sort_keys=True, default=str)
        lines = [f"{self.command}"]
        for c in self.checks:
            extra = {k: v for k, v in c.items() if k not in ("name", "verdict")}
            detail = json.dumps(extra, sort_keys=True, default=str) if extra else ""
            lines.append(f"  {c['verdict'].upper():4} {c['name']} {detail}".rstrip())
        for k, v in sorted(self.data.items()):
            lines.append(f"  {k}: {json.dumps(v, sort_keys=True, default=str)}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# atlas


def _atlas_from_args(args):
    if getattr(args, "file", None):
        with open(args.file) as fh:
            return atl.Atlas.loads(fh.read())
    if args.pi:
        return atl.build_pi_line_atlas()
    if args.proj:
        m, n = args.proj
        return atl.build_projective_atlas(m, n)
    raise UsageError("give --proj M N, --pi or --file PATH")


def cmd_atlas_verify(args, rep: Report):
    A = _atlas_from_args(args)
    r = atl.verify_cocycle(A)
    for c in r.checks:
        rep.check(f"{c['kind']} {'->'.join(c['charts'])}", c["passed"], residual=c["residual"])
    rep.data["label"] = A.label


def cmd_atlas_build(args, rep: Report):
    A = _atlas_from_args(args)
    rep.data["atlas"] = A.to_json()
    rep.check("built", True, charts=len(A.charts), transitions=len(A.transitions))


# ---------------------------------------------------------------------------
# susy


def _field(args):
    return parse_vector_field(args.field, susy.STD_CHART)


def cmd_susy_check(args, rep: Report):
    v = susy.is_susy(_field(args), args.invertible or ())
    rep.check("frame (D, D^2)", v.ok, witness=v.witness, f=v.f, g=v.g, d_squared=v.d_squared)


def cmd_susy_canon(args, rep: Report):
    cc = susy.canonical_coordinates(_field(args), args.invertible or (), numeric=args.numeric)
    data = cc.to_json()
    rep.data["coordinates"] = data
    if cc.mode == "symbolic":
        for k, v in sorted(cc.residuals.items()):
            rep.check(k, v == "0", residual=v)
    else:
        rep.check("quadrature description", True, integrand=cc.quadrature["integrand"])


def cmd_susy_auto(args, rep: Report):
    F = susy.SusyAutomorphismCandidate.parse(args.f, args.g, tuple(args.param or ()))
    v = susy.is_susy_automorphism(F)
    rep.check("F*(omega) = f' omega", v.residual_f == "0", residual=v.residual_f)
    rep.check("F*(omega) = g^2 omega", v.residual_g == "0", residual=v.residual_g)
    rep.check("t is a unit", v.ok, t=str(v.t) if v.t is not None else None, witness=v.reason)
    cls = susy.classify_c11_automorphism(F) if v.ok else None
    if cls is not None:
        rep.data["classification"] = {"a": str(cls[0]), "b": str(cls[1]), "sign": cls[2]}


def cmd_susy_elliptic_gens(args, rep: Report):
    tau = _tau(args)
    for sa in (1, -1):
        for sb in (1, -1):
            if args.signs and (sa, sb) != tuple(args.signs):
                continue
            A, B = susy.elliptic_action_generators(tau, sa, sb)
            ta, tb = susy.is_susy_automorphism(A), susy.is_susy_automorphism(B)
            tag = f"({'+' if sa > 0 else '-'},{'+' if sb > 0 else '-'})"
            rep.check(f"A{tag} t=1", ta.ok and str(ta.t) == "1", map=str(A))
            rep.check(f"B{tag} t=1", tb.ok and str(tb.t) == "1", map=str(B))
            rep.check(f"AB=BA {tag}", susy.commute(A, B))


def cmd_susy_reduce(args, rep: Report):
    tau = susy.Tau.parse(args.tau)
    t2, g = susy.reduce_to_fundamental_domain(tau)
    rep.data["tau"] = str(t2)
    rep.data["gamma"] = [list(r) for r in g]
    ok = susy.mobius(g, tau.value) == t2.value and susy.in_fundamental_domain(t2.value)
    rep.check("gamma.tau in the closed domain", ok)


# ---------------------------------------------------------------------------
# theta


def _cocycle(args):
    A = _atlas_from_args(args)
    if args.cocycle == "canonical":
        return atl.canonical_cocycle(A), A
    return atl.odd_part_cocycle(A), A


def cmd_theta_degree(args, rep: Report):
    L, _ = _cocycle(args)
    d = atl.degree(L)
    rep.data["cocycle"] = L.to_json()
    rep.data["degree"] = d
    rep.data["degree_square"] = atl.degree(atl.cocycle_square(L))
    rep.check("cocycle conditions", L.verify().passed)


def cmd_theta_sqrt(args, rep: Report):
    L, _ = _cocycle(args)
    roots = atl.cocycle_sqrt(L)
    rep.data["cocycle"] = L.to_json()
    if roots is None:
        rep.data["roots"] = None
        rep.check("square root exists", False, witness=f"odd exponent {atl.degree(L)}")
        return
    rep.data["roots"] = [r.to_json() for r in roots]
    for k, r in enumerate(roots):
        rep.check(f"root {k} squares back", atl.cocycle_square(r).g == L.g)


def cmd_theta_build(args, rep: Report):
    A = _atlas_from_args(args)
    K = atl.canonical_cocycle(A)
    L = atl.odd_part_cocycle(A)
    v = atl.theta_witness(L, K)
    rep.data["verdict"] = v.to_json()
    if not rep.check("theta witness g^2 = f'", v.exists, witness=v.reason):
        return
    S = atl.build_supermanifold_from_theta(v.theta)
    rep.data["atlas"] = S.to_json()
    rep.check("built atlas cocycle", atl.verify_cocycle(S).passed)
    rep.check("odd part round trip", atl.odd_part_cocycle(S) == v.theta.L)


# ---------------------------------------------------------------------------
# fop


def cmd_fop_roundtrip(args, rep: Report):
    rng = random.Random(args.seed)
    m, n = args.proj or (1, 1)
    alg = GrassmannAlgebra(args.N)
    bad_rt = bad_scale = 0
    for _ in range(args.samples):
        p = fop.random_proj_point(alg, m, n, rng)
        c = fop.proj_standard_form(p)
        if fop.proj_standard_form(fop.affine_to_proj(p.i, c, alg)) != c:
            bad_rt += 1
        lam = alg.random(rng, parity=0, invertible=True)
        if fop.proj_standard_form(p.rescale(lam)) != c:
            bad_scale += 1
    rep.check("round trip", bad_rt == 0, failures=bad_rt, cases=args.samples)
    rep.check("rescaling invariance", bad_scale == 0, failures=bad_scale, cases=args.samples)


def cmd_fop_pi_glue(args, rep: Report):
    rng = random.Random(args.seed)
    alg = GrassmannAlgebra(args.N)
    bad = bad_inv = 0
    for _ in range(args.samples):
        v0 = alg.random(rng, parity=0, invertible=True)
        nu0 = alg.random(rng, parity=1)
        if not fop.pi_gluing_check(v0, nu0).passed:
            bad += 1
        p = fop.random_pi_point(alg, rng)
        d = DNumber(alg.random(rng, parity=0, invertible=True), alg.random(rng, parity=1))
        if fop.pi_standard_form(fop.pi_rescale(p, d), p.chart()) != fop.pi_standard_form(p):
            bad_inv += 1
    rep.check("gluing (1,0,v,nu) ~ (1/v,-nu/v^2,1,0)", bad == 0, failures=bad, cases=args.samples)
    rep.check("D-rescaling invariance", bad_inv == 0, failures=bad_inv, cases=args.samples)


def cmd_fop_phi_check(args, rep: Report):
    rng = random.Random(args.seed)
    alg = GrassmannAlgebra(args.N)
    disagree = 0
    stable = 0
    for k in range(args.samples):
        rows = random_rows(alg, rng, stable=(k % 2 == 0))
        a = fop.phi_invariance_check(rows)
        b = fop.theta_stability_check(rows)
        stable += a
        disagree += a != b
    rep.check("phi-invariance agrees with right theta-stability", disagree == 0,
              failures=disagree, cases=args.samples, stable=stable)


def random_rows(alg, rng, stable: bool):
    """A rank 1|1 pair of rows; phi-paired and recombined when ``stable``, generic otherwise."""
    while True:
        if stable:
            p = fop.random_pi_point(alg, rng)
            e, E = p.e(), p.E()
            a = alg.random(rng, parity=0, invertible=True)
            alpha = alg.random(rng, parity=1)
            b = alg.random(rng, parity=0, invertible=True)
            beta = alg.random(rng, parity=1)
            r1 = tuple(e[k] * a + E[k] * alpha for k in range(4))
            r2 = tuple(e[k] * beta + E[k] * b for k in range(4))
        else:
            r1 = (alg.random(rng, parity=0), alg.random(rng, parity=1),
                  alg.random(rng, parity=0), alg.random(rng, parity=1))
            r2 = (alg.random(rng, parity=1), alg.random(rng, parity=0),
                  alg.random(rng, parity=1), alg.random(rng, parity=0))
        try:
            fop.span_coefficients((r1, r2), r1)
        except fop.FopError:
            continue
        return r1, r2


# ---------------------------------------------------------------------------
# elliptic


def _tau(args):
    if not args.tau:
        raise UsageError("--tau is required")
    return args.tau


def cmd_elliptic_invariants(args, rep: Report):
    ctx = ell.EllipticContext(_tau(args))
    rep.data["context"] = ctx.to_json()
    pts = ell.sample_points(ctx, args.samples, args.seed)
    for name, r in sorted(ell.invariant_checks(ctx, pts).items()):
        rep.check(name, r < args.eps, residual=r)


def cmd_elliptic_verify(args, rep: Report):
    ctx = ell.EllipticContext(_tau(args))
    rep.data["context"] = ctx.to_json()
    pts = ell.sample_points(ctx, args.samples, args.seed)
    for name, r in sorted(ell.invariant_checks(ctx, pts).items()):
        rep.check(name, r < args.eps, residual=r)
    worst_a = [0.0] * 4
    worst_h = [0.0] * 4
    worst_misc = {"wp1^2 - (wp - e1)": 0.0, "2 wp1 wp1' - wp'": 0.0}
    for z in pts:
        ra = ell.verify_affine_ideal(z, ctx)
        P = ell.embed(z, ctx)
        rh = ell.verify_homogeneous_ideal(P, ctx)
        rs = ell.verify_homogeneous_ideal(P, ctx, complex(1.7, -0.3))
        worst_a = [max(a, b) for a, b in zip(worst_a, ra.relative)]
        worst_h = [max(a, b, c) for a, b, c in zip(worst_h, rh.relative, rs.relative)]
        q = P.xi[0]
        p = P.x[0]
        worst_misc["wp1^2 - (wp - e1)"] = max(worst_misc["wp1^2 - (wp - e1)"], ell._rel(q * q - (p - ctx.e1), q * q, p))
        worst_misc["2 wp1 wp1' - wp'"] = max(worst_misc["2 wp1 wp1' - wp'"], ell._rel(2 * q * P.xi[1] - P.x[1], P.x[1]))
    for name, r in zip(ell.AFFINE_NAMES, worst_a):
        rep.check(f"affine: {name}", r < args.eps, residual=r)
    for name, r in zip(ell.HOMOGENEOUS_NAMES, worst_h):
        rep.check(f"homogeneous: {name}", r < args.eps, residual=r)
    for name, r in worst_misc.items():
        rep.check(name, r < args.eps, residual=r)
    a1, a2, res = ell.fit_reduced_cubic(ctx, pts)
    rep.data["cubic 4x^3 - a1 x^2 - a2 (reported only)"] = {
        "a1": [a1.real, a1.imag], "a2": [a2.real, a2.imag], "max_relative_residual": res}


# ---------------------------------------------------------------------------
# parse


def cmd_parse(args, rep: Report):
    tree = parse(args.text)
    nf = normalize(tree)
    rep.data["tree"] = str(tree)
    rep.data["normal_form"] = str(nf)
    rep.check("parsed", True)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--eps", type=float, default=1e-8)
    common.add_argument("--tau")
    common.add_argument("--proj", type=int, nargs=2, metavar=("M", "N"))
    common.add_argument("--timing", action="store_true", help="add elapsed seconds per check")

    p = argparse.ArgumentParser(prog="susy-kernel", description=__doc__.splitlines()[0])
    groups = p.add_subparsers(dest="group", required=True)

    def add(group, name, fn, *configure):
        sp = group.add_parser(name, parents=[common])
        sp.set_defaults(fn=fn)
        for c in configure:
            c(sp)
        return sp

    def atlas_src(sp):
        sp.add_argument("--pi", action="store_true", help="the Pi-line atlas")
        sp.add_argument("--file", help="atlas JSON document")

    def field_opt(sp):
        sp.add_argument("--field", required=True, help='e.g. "d/dzeta + zeta*d/dz"')
        sp.add_argument("--invertible", nargs="*", help="coordinates treated as units")

    def cocycle_opt(sp):
        atlas_src(sp)
        sp.add_argument("--cocycle", choices=["canonical", "odd"], default="odd")

    def samples(default):
        def f(sp):
            sp.add_argument("--samples", type=int, default=default)
            sp.add_argument("--N", type=int, default=3, help="Grassmann generators")
        return f

    g = groups.add_parser("atlas").add_subparsers(dest="cmd", required=True)
    add(g, "verify", cmd_atlas_verify, atlas_src)
    add(g, "build", cmd_atlas_build, atlas_src)

    g = groups.add_parser("susy").add_subparsers(dest="cmd", required=True)
    add(g, "check", cmd_susy_check, field_opt)
    add(g, "canon", cmd_susy_canon, field_opt, lambda sp: sp.add_argument("--numeric", action="store_true"))

    def auto_opt(sp):
        sp.add_argument("--f", required=True)
        sp.add_argument("--g", required=True)
        sp.add_argument("--param", nargs="*")

    add(g, "auto", cmd_susy_auto, auto_opt)
    add(g, "elliptic-gens", cmd_susy_elliptic_gens,
        lambda sp: sp.add_argument("--signs", type=int, nargs=2, choices=[1, -1]))
    add(g, "reduce", cmd_susy_reduce)

    g = groups.add_parser("theta").add_subparsers(dest="cmd", required=True)
    add(g, "degree", cmd_theta_degree, cocycle_opt)
    add(g, "sqrt", cmd_theta_sqrt, cocycle_opt)
    add(g, "build", cmd_theta_build, atlas_src)

    g = groups.add_parser("fop").add_subparsers(dest="cmd", required=True)
    add(g, "roundtrip", cmd_fop_roundtrip, samples(200))
    add(g, "pi-glue", cmd_fop_pi_glue, samples(100))
    add(g, "phi-check", cmd_fop_phi_check, samples(500))

    g = groups.add_parser("elliptic").add_subparsers(dest="cmd", required=True)
    add(g, "verify", cmd_elliptic_verify, lambda sp: sp.add_argument("--samples", type=int, default=20))
    add(g, "invariants", cmd_elliptic_invariants, lambda sp: sp.add_argument("--samples", type=int, default=20))

    sp = groups.add_parser("parse", parents=[common])
    sp.add_argument("text")
    sp.set_defaults(fn=cmd_parse, cmd="")
    return p


def run(argv=None):
    """(exit code, Report or None)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (0 if exc.code == 0 else 2), None
    command = " ".join(x for x in (args.group, args.cmd) if x)
    inputs = {k: v for k, v in sorted(vars(args).items())
              if k not in ("fn", "group", "cmd", "json", "timing") and v is not None and v is not False}
    rep = Report(command, inputs, args.timing)
    try:
        args.fn(args, rep)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2, None
    except ParseError as exc:
        rep.error(exc)
        return 2, rep
    except Exception as exc:  # library errors become report entries
        rep.error(exc)
    return (0 if rep.passed else 1), rep


def main(argv=None):
    code, rep = run(argv)
    if rep is not None:
        as_json = "--json" in (sys.argv[1:] if argv is None else argv)
        print(rep.render(as_json))
    return code


if __name__ == "__main__":
    sys.exit(main())
