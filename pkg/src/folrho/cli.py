"""Command line entry point ``folrho``.

Exit codes: 0 success, 2 validation failure, 3 numerical verification failure.
"""

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import tolerances as _tol
from .charforms import (
    ahat_form,
    ahat_in_ch,
    chern_character,
    chern_forms,
    genus_table,
    pontryagin_forms,
    transgress_ahat,
    transgress_ch,
)
from .connections import Connection, HermMetric, bott_partial
from .errors import (
    ConvergenceError,
    DimensionError,
    FolrhoError,
    QuadratureError,
    ValidationError,
    VerificationError,
)
from .forms import Form
from .random import random_form
from .rho import (
    bordism_integrand,
    e_relative,
    gv_chernweil_identity,
    gv_constant_derived,
    gv_constant_literal,
    gv_form,
    rho_imag,
    rho_imag_gv,
    rho_s1,
)
from .scene import load_scene, read_scene_file
from .spectral import ArithmeticProgression, eta_arith, eta_numeric, spectrum_from_json
from .wo import kt_class_relation, universal_class, wo_cohomology

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VERIFICATION = 3

COMMANDS = (
    "validate", "rho-s1", "rho-imag", "gv-check", "e-rel", "eta", "chern", "ahat",
    "transgress", "bordism-integrand", "wo-betti", "wo-universal", "kt-relation",
)


def cnum(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


class Failure(Exception):
    def __init__(self, code, message, payload=None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def _need_scene(args):
    path = args.scene_pos or args.scene
    if not path:
        raise ValidationError("this command needs a scene file")
    return load_scene(path, waive=args.waive or ())


def _flags(args):
    keep = ("r", "q", "dim", "max_degree", "tolerance", "seed", "p", "n", "method", "strict", "constant", "waive")
    return {k: getattr(args, k) for k in keep if getattr(args, k, None) not in (None, False, [])}


def _charform_json(cf):
    return {str(f.degree): f.to_json() for f in cf.seq.entries.values()}


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    scene = _need_scene(args)
    return scene, {"valid": True, "dim": scene.dim, "codim": scene.foliation.codim}, {}


def cmd_rho_s1(args):
    if args.r is None:
        raise ValidationError("rho-s1 needs --r")
    res = rho_s1(args.r, method=args.method or "closed-form")
    out = res.to_json()
    return None, out, {"corrections_checked_below": 1e-12}


def cmd_rho_imag(args):
    scene = _need_scene(args)
    if scene.dim % 2 == 0:
        raise ValidationError("rho-imag needs an odd-dimensional torus")
    if scene.bundles:
        b = scene.bundle(0)
        pc, c, h, source = b.partial, b.connection, b.metric, "bundles[0]"
    elif scene.codim1 is not None:
        # V is the normal bundle with its Bott connection and the trivial metric
        pc, c, h, source = bott_partial(scene.codim1), scene.normal, HermMetric.identity(1), "normal bundle"
    else:
        raise ValidationError("rho-imag needs a bundle or codim1 data")
    value = rho_imag(pc, c, h, scene.normal)
    normal = "scene" if "normal" in scene.raw else ("bott" if scene.normal else "none")
    prov = {"ahat_lc": 1.0, "bundle": source, "normal_connection": normal}
    return scene, {"value": cnum(value)}, prov


def cmd_gv_check(args):
    if not (args.scene_pos or args.scene) and args.seed is not None:
        return _gv_random(args)
    scene = _need_scene(args)
    n = int(args.n if args.n is not None else scene.task.get("n", 2))
    if scene.codim1 is not None:
        omega = scene.codim1.omega
    elif "omega" in scene.task:
        omega = Form.from_json(scene.task["omega"])
    else:
        raise ValidationError("gv-check needs a codim1 foliation or task.omega")
    which = args.constant or "literal"
    const = gv_constant_literal(n) if which == "literal" else gv_constant_derived(n)
    check = gv_chernweil_identity(omega, n, const)
    out = {"identity": check.to_json(), "constant_choice": which, "n": n}
    if scene.codim1 is not None and scene.dim == 2 * n + 1:
        rho = rho_imag_gv(scene.codim1, n)
        gv_int = gv_form(omega, n).integrate_top()
        lemma = (-1) ** (n + 1) / ((2j * math.pi) ** (n + 1) * math.factorial(n)) * gv_int
        out["rho_imag"] = cnum(rho)
        out["gv_integral"] = cnum(gv_int)
        out["lemma_value"] = cnum(lemma)
        out["lemma_residual"] = abs(rho - lemma)
    tol = _tol.tol(1e-8)
    if check.residual > tol or out.get("lemma_residual", 0.0) > tol:
        raise Failure(EXIT_VERIFICATION, f"GV identity residual {check.residual:.3e} exceeds {tol:.1e}", out)
    return scene, out, {}


def _gv_random(args):
    """Identity check on a seeded random real 1-form (bandwidth 2)."""
    n = args.n if args.n is not None else 2
    dim = args.dim if args.dim is not None else 2 * n + 1
    rng = np.random.default_rng(args.seed)
    omega = random_form(rng, dim, 1, nterms=2, band=2, real=True, density=0.8)
    which = args.constant or "literal"
    const = gv_constant_literal(n) if which == "literal" else gv_constant_derived(n)
    check = gv_chernweil_identity(omega, n, const)
    out = {"identity": check.to_json(), "constant_choice": which, "n": n, "omega": omega.to_json()}
    if check.residual > _tol.tol(1e-8):
        raise Failure(EXIT_VERIFICATION, f"GV identity residual {check.residual:.3e} exceeds {_tol.tol(1e-8):.1e}", out)
    return None, out, {"seed": args.seed}


def cmd_e_rel(args):
    scene = _need_scene(args)
    if len(scene.framings) < 2:
        raise ValidationError("e-rel needs two framings")
    s1, s0 = scene.framings[1], scene.framings[0]
    u = chern_character(scene.bundle(0).connection) if scene.bundles else chern_character(Connection.trivial(scene.dim))
    value = e_relative(s1, s0, u)
    return scene, {"value": cnum(value)}, {"u": "bundles[0]" if scene.bundles else "trivial"}


def cmd_eta(args):
    path = args.scene_pos or args.scene
    if not path:
        raise ValidationError("eta needs a spectrum file")
    data = read_scene_file(path)
    spec = spectrum_from_json(data)
    num = eta_numeric(spec)
    out = {"numeric": num.to_json()}
    if isinstance(spec, ArithmeticProgression):
        closed = eta_arith(spec.a, spec.sigma)
        out["closed_form"] = closed.to_json()
        out["agreement"] = abs(closed.eta0 - num.eta0)
    return None, out, {"em_terms": 8}


def cmd_chern(args):
    scene = _need_scene(args)
    c = scene.bundle(0).connection
    out = {"ch": _charform_json(chern_character(c)), "c": _charform_json(chern_forms(c))}
    if c.real:
        out["p"] = _charform_json(pontryagin_forms(c))
        out["ahat"] = _charform_json(ahat_form(c))
    return scene, out, {}


def cmd_ahat(args):
    q = args.q if args.q is not None else 2
    table = genus_table(max(8, 4 * (q // 2 + 1)))
    out = {
        "genus_table": table.to_json(),
        "ahat_in_ch": {"q": q, "form_level": str(ahat_in_ch(q, strict=args.strict)),
                       "odd_components_eliminated": str(ahat_in_ch(q, eliminate_odd=True, strict=args.strict))},
    }
    return None, out, {"truncation": "strict" if args.strict else "inclusive"}


def cmd_transgress(args):
    scene = _need_scene(args)
    if len(scene.bundles) < 2:
        raise ValidationError("transgress needs two bundles (c0 = bundles[0], c1 = bundles[1])")
    c0, c1 = scene.bundles[0].connection, scene.bundles[1].connection
    tr = transgress_ch(c1, c0)
    ch1, ch0 = chern_character(c1), chern_character(c0)
    residual = 0.0
    for f in tr.seq.entries.values():
        residual = max(residual, (f.d() - (ch1.component(f.degree + 1) - ch0.component(f.degree + 1))).sup())
    out = {"ch_tilde": _charform_json(tr), "stokes_residual": residual}
    if c0.real and c1.real:
        out["ahat_tilde"] = _charform_json(transgress_ahat(c1, c0))
    if residual > _tol.tol(1e-9):
        raise Failure(EXIT_VERIFICATION, f"transgression residual {residual:.3e}", out)
    return scene, out, {}


def cmd_bordism(args):
    scene = _need_scene(args)
    b = scene.bundle(0)
    value = bordism_integrand(b.partial, b.connection, scene.normal)
    return scene, {"value": cnum(value)}, {"codim": scene.foliation.codim}


def cmd_wo_betti(args):
    if args.q is None or args.max_degree is None:
        raise ValidationError("wo-betti needs --q and --max-degree")
    rep = wo_cohomology(args.q, args.max_degree, strict=args.strict)
    report = rep.to_json()
    # Betti numbers keyed by degree at the top level, full report alongside
    out = dict(report["ranks"])
    out["report"] = report
    return None, out, {"truncation": report["truncation"]}


def cmd_wo_universal(args):
    if args.q is None or args.dim is None:
        raise ValidationError("wo-universal needs --q and --dim")
    U = universal_class(args.q, args.dim, strict=args.strict)
    U_class = universal_class(args.q, args.dim, eliminate_odd=True, strict=args.strict)
    out = {"U": U.to_json(), "U_text": repr(U), "U_odd_eliminated": repr(U_class), "cycle": True}
    return None, out, {}


def cmd_kt(args):
    scene = _need_scene(args)
    p = int(args.p if args.p is not None else scene.task.get("p", 1))
    cF = scene.normal or scene.bundle(0).connection
    h = scene.bundle(0).metric if scene.normal is None and scene.bundles else None
    h = h or HermMetric.identity(cF.rank)
    rel = kt_class_relation(p, cF, h, q=max(scene.foliation.codim, p))
    out = rel.to_json()
    if max(rel.residual, rel.pairing_residual) > _tol.tol(1e-8):
        raise Failure(EXIT_VERIFICATION, f"Kamber-Tondeur relation residual {rel.residual:.3e}", out)
    return scene, out, {"p": p}


HANDLERS = {
    "validate": cmd_validate,
    "rho-s1": cmd_rho_s1,
    "rho-imag": cmd_rho_imag,
    "gv-check": cmd_gv_check,
    "e-rel": cmd_e_rel,
    "eta": cmd_eta,
    "chern": cmd_chern,
    "ahat": cmd_ahat,
    "transgress": cmd_transgress,
    "bordism-integrand": cmd_bordism,
    "wo-betti": cmd_wo_betti,
    "wo-universal": cmd_wo_universal,
    "kt-relation": cmd_kt,
}


def build_parser():
    p = argparse.ArgumentParser(prog="folrho", description="Characteristic forms, eta and rho invariants on foliated tori.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scene_pos", nargs="?", metavar="scene", help="scene or spectrum file (JSON or TOML)")
    p.add_argument("--scene", help="scene file (alternative to the positional argument)")
    p.add_argument("--r", type=float, help="holonomy parameter in [0, 1)")
    p.add_argument("--q", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--max-degree", type=int, dest="max_degree")
    p.add_argument("--p", type=int, help="odd index for kt-relation")
    p.add_argument("--n", type=int, help="even GV exponent")
    p.add_argument("--method", choices=("closed-form", "zeta-numeric"))
    p.add_argument("--constant", choices=("literal", "derived"), help="GV constant with n! or (n+1)!")
    p.add_argument("--strict", action="store_true", help="strict truncation (< 2q) in WO_q")
    p.add_argument("--tolerance", type=float, help="rescale all verification thresholds")
    p.add_argument("--json-out", dest="json_out", help="also write the result envelope to this path")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--waive", action="append", choices=("integrability", "flatness", "extension"),
                   help="skip a load-time verification (recorded in the report)")
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
    return p


def _emit(envelope, args, stream):
    text = json.dumps(envelope, indent=2, sort_keys=True, allow_nan=True)
    stream.write(text + "\n")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    if args.tolerance is not None:
        try:
            _tol.set_scale(args.tolerance)
        except ValueError as exc:
            stderr.write(f"error: {exc}\n")
            return EXIT_VALIDATION
    start = time.perf_counter()
    envelope = {"task": args.command, "flags": _flags(args), "inputs_digest": inputs_digest(args)}
    code = EXIT_OK
    try:
        scene, result, prov = HANDLERS[args.command](args)
        envelope["result"] = result
        envelope["provenance"] = prov
        envelope["verification"] = [c.to_json() for c in scene.checks] if scene else []
        envelope["status"] = "ok"
    except Failure as exc:
        code = exc.code
        envelope.update(status="verification-failed", error=str(exc), result=exc.payload)
    except (ValidationError, DimensionError) as exc:
        code = EXIT_VALIDATION
        envelope.update(status="invalid", error=str(exc), residual=getattr(exc, "residual", None))
    except (VerificationError, QuadratureError, ConvergenceError) as exc:
        code = EXIT_VERIFICATION
        envelope.update(status="verification-failed", error=str(exc), residual=getattr(exc, "residual", None))
    except FolrhoError as exc:
        code = EXIT_VALIDATION
        envelope.update(status="invalid", error=str(exc))
    envelope["wall_time"] = round(time.perf_counter() - start, 6) if args.timing else None
    _emit(envelope, args, stdout)
    if code:
        stderr.write(f"error: {envelope.get('error')}\n")
    _tol.set_scale(1.0)
    return code


def inputs_digest(args):
    """SHA-256 over the task, the effective flags and the raw input file bytes."""
    h = hashlib.sha256()
    h.update(json.dumps({"flags": _flags(args), "task": args.command}, sort_keys=True).encode())
    path = args.scene_pos or args.scene
    if path:
        try:
            with open(path, "rb") as fh:
                h.update(fh.read())
        except OSError:
            h.update(str(path).encode())
    return h.hexdigest()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
