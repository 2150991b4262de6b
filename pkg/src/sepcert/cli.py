"""Command-line interface: problem/certificate JSON schemas and the
``sepcert`` entry point.

Data format: rationals are encoded as strings "p/q" (or bare integers);
field elements as coefficient arrays ascending in the distinguished root;
matrices as row-major arrays whose entries are either rationals or
coefficient arrays.  Output files are byte-identical across repeated runs
with the same input and configuration.

Exit codes: 0 success, 1 mathematical failure (such as the element lying
inside the subgroup), 2 resource exhaustion (search limits), 3 parse
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .chevalley import chevalley_modulus
from .errors import ParseError, SepcertError
from .exact import IntPoly
from .nfield import GroupDescription, Matrix, NumberField, triangularize_abelian
from .separator import (
    Config,
    SeparationCertificate,
    bs12_odd_order,
    separate_abelian,
    verify_certificate,
)
from .units import UnitList, free_basis

_EXIT = {"math": 1, "resource": 2, "parse": 3}


# ---------------------------------------------------------------------------
# JSON parsing
# ---------------------------------------------------------------------------

def _parse_fraction(v) -> Fraction:
    if isinstance(v, bool):
        raise ParseError(f"not a rational: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational {v!r}: {exc}") from None
    raise ParseError(f"not a rational: {v!r}")


def _parse_field(data) -> NumberField:
    if data is None:
        return NumberField.rationals()
    try:
        coeffs = [int(c) for c in data["minimal_poly"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad field description: {exc}") from None
    try:
        return NumberField(IntPoly(coeffs))
    except SepcertError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _parse_entry(field: NumberField, v):
    if isinstance(v, list):
        return field.element([_parse_fraction(c) for c in v])
    return field.from_rational(_parse_fraction(v))


def _parse_matrix(field: NumberField, rows, n: int) -> Matrix:
    if not isinstance(rows, list) or len(rows) != n \
            or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise ParseError(f"matrix must be {n}x{n} row-major")
    return Matrix(field, [[_parse_entry(field, v) for v in row] for row in rows])


def _parse_generators(field, data, n, what) -> list:
    if not isinstance(data, list):
        raise ParseError(f"{what} must be a list of labeled matrices")
    out = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or "matrix" not in item:
            raise ParseError(f"{what}[{i}] must carry a 'matrix'")
        label = str(item.get("label", f"{what}{i}"))
        out.append((label, _parse_matrix(field, item["matrix"], n)))
    return out


def _parse_config(data, args=None) -> Config:
    cfg = Config()
    data = data or {}
    for key in ("relation_bound", "search_limit", "closure_cap", "jobs"):
        if key in data:
            setattr(cfg, key, int(data[key]))
    if "fast_path" in data:
        cfg.fast_path = bool(data["fast_path"])
    if args is not None:
        if args.relation_bound is not None:
            cfg.relation_bound = args.relation_bound
        if args.search_limit is not None:
            cfg.search_limit = args.search_limit
        if args.closure_cap is not None:
            cfg.closure_cap = args.closure_cap
        if args.fast_path:
            cfg.fast_path = True
        if getattr(args, "jobs", None):
            cfg.jobs = args.jobs
    return cfg


class Problem:
    """Parsed problem file: the group, the subgroup, and the target."""

    def __init__(self, field, n, gamma, subgroup, h, config):
        self.field = field
        self.n = n
        self.gamma = gamma
        self.subgroup = subgroup
        self.h = h
        self.config = config


def load_problem(path, args=None) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read problem file: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("problem file must be a JSON object")
    field = _parse_field(data.get("field"))
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("problem file needs an integer dimension 'n'") from None
    gamma = _parse_generators(field, data.get("gamma", []), n, "gamma")
    sub = _parse_generators(field, data.get("subgroup", []), n, "subgroup")
    if "h" not in data:
        raise ParseError("problem file needs the target matrix 'h'")
    h = _parse_matrix(field, data["h"], n)
    config = _parse_config(data.get("config"), args)
    try:
        gamma_g = GroupDescription(field, n, gamma)
        sub_g = GroupDescription(field, n, sub)
    except SepcertError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return Problem(field, n, gamma_g, sub_g, h, config)


def _dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _matrix_to_json(M: Matrix):
    return [[[str(c) for c in e.coords] for e in row] for row in M.entries]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_separate(args) -> int:
    problem = load_problem(args.problem, args)
    cert = separate_abelian(problem.gamma, problem.subgroup, problem.h,
                            problem.config)
    out = args.output or (args.problem.rsplit(".", 1)[0] + ".cert.json")
    text = _dump_json(cert.to_dict(), out)
    print(f"certificate written to {out} "
          f"(components: {[m.target.modulus for m in cert.maps]}, "
          f"closure order {cert.closure_order})")
    if args.print_json:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    problem = load_problem(args.problem)
    try:
        with open(args.certificate, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        cert = SeparationCertificate.from_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"cannot read certificate: {exc}") from None
    res = verify_certificate(cert, problem.gamma, problem.subgroup, problem.h,
                             problem.config)
    if res:
        print("certificate verified")
        return 0
    print(f"verification failed: {res.reason}")
    return 1


def _parse_units(field, text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part.startswith("[") or part.startswith("("):
            raise ParseError("field-element units belong in a JSON file")
        out.append(field.from_rational(_parse_fraction(part)))
    return out


def cmd_chevalley(args) -> int:
    field = _parse_field({"minimal_poly": [int(c) for c in
                                           args.field.split(",")]}
                         if args.field else None)
    units = _parse_units(field, args.units)
    avoid = {int(a) for a in args.avoid.split(",") if a.strip()} \
        if args.avoid else set()
    cfg = _parse_config(None, args)
    ul = UnitList(field, units, cfg.relation_bound)
    cm = chevalley_modulus(ul, args.r, avoid=avoid,
                           search_limit=cfg.search_limit)
    print(f"q={cm.q}")
    payload = {
        "q": cm.q,
        "r": cm.r,
        "image_order_data": cm.image_order_data,
        "kernel_rows": cm.kernel_rows,
    }
    if args.output:
        _dump_json(payload, args.output)
    else:
        sys.stdout.write(_dump_json(payload))
    return 0


def cmd_units_basis(args) -> int:
    field = _parse_field({"minimal_poly": [int(c) for c in
                                           args.field.split(",")]}
                         if args.field else None)
    units = _parse_units(field, args.units)
    cfg = _parse_config(None, args)
    basis = free_basis(UnitList(field, units, cfg.relation_bound))
    payload = {
        "torsion_order": basis.torsion_order,
        "torsion_generator": ([str(c) for c in basis.torsion_generator.coords]
                              if basis.torsion_generator else None),
        "basis_indices": list(basis.basis_indices),
        "index_D": basis.index_D,
        "exponent_lattice": basis.exponent_lattice,
    }
    print(f"p={basis.torsion_order} I={list(basis.basis_indices)} "
          f"D={basis.index_D}")
    if args.output:
        _dump_json(payload, args.output)
    else:
        sys.stdout.write(_dump_json(payload))
    return 0


def cmd_triangularize(args) -> int:
    try:
        with open(args.problem, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read file: {exc}") from None
    field = _parse_field(data.get("field"))
    n = int(data.get("n", 0))
    gens = _parse_generators(field, data.get("generators",
                                             data.get("subgroup", [])), n,
                             "generators")
    G = GroupDescription(field, n, gens)
    P, GT = triangularize_abelian(G)
    payload = {
        "conjugator": _matrix_to_json(P),
        "generators": [{"label": l, "matrix": _matrix_to_json(m)}
                       for l, m in GT.generators],
    }
    text = _dump_json(payload, args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def cmd_demo_bs12(args) -> int:
    lo, hi = args.min, args.max
    primes = [p for p in range(max(3, lo), hi + 1)
              if all(p % d for d in range(2, p)) and p > 2]
    rows = bs12_odd_order(primes)
    for row in rows:
        print(f"p={row['p']:>3}  order={row['order']:>3}  odd={row['odd']}  "
              f"relation={row['relation']}")
    if not all(r["odd"] and r["relation"] for r in rows):
        return 1
    print("every image of the unitriangular generator has odd order; "
          "the subgroup it generates cannot be separated")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p, jobs=False):
    p.add_argument("--relation-bound", type=int, default=None)
    p.add_argument("--search-limit", type=int, default=None)
    p.add_argument("--closure-cap", type=int, default=None)
    p.add_argument("--fast-path", action="store_true")
    if jobs:
        p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sepcert",
        description="construct and verify finite-quotient separability "
                    "certificates for abelian unipotent-free subgroups")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("separate", help="produce a certificate for a problem file")
    p.add_argument("problem")
    p.add_argument("--print-json", action="store_true")
    _add_common(p, jobs=True)
    p.set_defaults(fn=cmd_separate)

    p = sub.add_parser("verify", help="check a certificate against a problem file")
    p.add_argument("certificate")
    p.add_argument("problem")
    _add_common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("chevalley", help="power-residue modulus for a unit list")
    p.add_argument("--units", required=True,
                   help="comma-separated rationals, e.g. '-1,2'")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--avoid", default="",
                   help="comma-separated integers to keep invertible")
    p.add_argument("--field", default=None,
                   help="comma-separated minimal-polynomial coefficients")
    _add_common(p)
    p.set_defaults(fn=cmd_chevalley)

    p = sub.add_parser("units-basis", help="torsion and free basis of a unit list")
    p.add_argument("--units", required=True)
    p.add_argument("--field", default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_units_basis)

    p = sub.add_parser("triangularize", help="triangularize commuting generators")
    p.add_argument("problem")
    _add_common(p)
    p.set_defaults(fn=cmd_triangularize)

    p = sub.add_parser("demo-bs12", help="odd orders of the BS(1,2) generator image")
    p.add_argument("--min", type=int, default=3)
    p.add_argument("--max", type=int, default=97)
    p.set_defaults(fn=cmd_demo_bs12)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except SepcertError as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return _EXIT.get(exc.category, 1)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
