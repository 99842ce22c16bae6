"""Command-line front end: ``conekit <lattice|enum|orbits|chambers|hyp|period> ...``.

Exit codes: 0 success, 1 domain error (wrong signature, point on a wall,
...), 2 configuration error (unknown preset, malformed input).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import chambers as ch
from . import hyperbolic as hyp
from . import period
from .enumeration import EnumWindow, enum_isotropic_primitive, enum_negative_primitive
from .errors import ConfigError, DomainError
from .io import (dumps, load_group_file, load_lattice, parse_ints, parse_vec, parse_vecs,
                 preset_names, report)
from .orbits import ClosurePolicy, GroupSpec, default_anchor, orbit_decompose, reflection_group
from .parallel import set_default_workers

# resolved-config keys that never influence output bytes
_NOT_CONFIG = {"func", "threads", "out"}


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _anchor(L, args):
    return parse_vec(args.anchor) if getattr(args, "anchor", None) else default_anchor(L)


def _group(L, args, anchor, squares, height) -> GroupSpec:
    spec = getattr(args, "group", None) or "reflections"
    word_cap = getattr(args, "word_cap", 4)
    if spec == "reflections":
        gh = getattr(args, "group_height", None)
        gh = height if gh is None else gh
        return reflection_group(L, squares, EnumWindow(anchor, gh), word_cap=word_cap,
                                height_cap=height)
    if spec == "none":
        return GroupSpec((), "trivial", ClosurePolicy(word_cap, height, anchor=anchor))
    name, gens = load_group_file(spec)
    return GroupSpec.from_matrices(L, gens, name, ClosurePolicy(word_cap, height, anchor=anchor))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_lattice(args) -> int:
    if args.action == "list":
        _emit(args, dumps(report("lattice list", _config(args), {"presets": preset_names()})))
        return 0
    if not args.lattice:
        raise ConfigError("lattice info needs --lattice or --preset")
    L = load_lattice(args.lattice)
    res = {"lattice": L.to_dict(), "rank": L.rank, "signature": list(L.signature),
           "determinant": L.determinant}
    _emit(args, dumps(report("lattice info", _config(args), res)))
    return 0


def cmd_enum(args) -> int:
    L = load_lattice(args.lattice)
    if args.square > 0:
        raise ConfigError("--square must be negative (walls) or 0 (cusps)")
    anchor = _anchor(L, args)
    w = EnumWindow(anchor, args.height, -args.square)
    vecs = enum_negative_primitive(L, w) if args.square else enum_isotropic_primitive(L, w)
    lines = "".join(",".join(map(str, v)) + "\n" for v in vecs)
    summary = report("enum", _config(args),
                     {"lattice": L.to_dict(), "count": len(vecs), "window": w.to_dict(),
                      "wall_squares": [args.square], "vectors": [list(v) for v in vecs]})
    _emit(args, lines + dumps(summary))
    return 0


def cmd_orbits(args) -> int:
    L = load_lattice(args.lattice)
    anchor = _anchor(L, args)
    squares = parse_ints(args.squares)
    vecs = []
    for d in squares:
        vecs += enum_negative_primitive(L, EnumWindow(anchor, args.height, d))
    G = _group(L, args, anchor, squares, args.height)
    rep = orbit_decompose(L, vecs, G)
    res = {"lattice": L.to_dict(), **rep.to_dict(), "group": G.name,
           "generator_count": len(G.generators)}
    _emit(args, dumps(report("orbits", _config(args), res)))
    return 0


def cmd_chambers(args) -> int:
    L = load_lattice(args.lattice)
    anchor = _anchor(L, args)
    squares = parse_ints(args.squares)
    window = EnumWindow(anchor, args.height)
    A = ch.build_arrangement(L, squares, window)
    point = parse_vec(args.point, rational=True) if args.point else A.anchor
    C = ch.locate_chamber(A, point)
    res = {"lattice": L.to_dict(), "arrangement": A.to_dict(), "chamber": C.to_dict(A)}
    if args.action == "faces":
        res["faces"] = [f.to_dict() for f in ch.faces(A, C)]
    elif args.action == "cross":
        if not args.wall:
            raise ConfigError("chambers cross needs --wall")
        res["result_chamber"] = ch.cross_wall(A, C, parse_vec(args.wall)).to_dict(A)
    elif args.action == "aut-orbits":
        G = _group(L, args, anchor, squares, args.height)
        rep = ch.face_orbit_count(A, C, G)
        d = rep.to_dict()
        res["faces"] = d.pop("faces")
        res.update(d)
    _emit(args, dumps(report(f"chambers {args.action}", _config(args), res)))
    return 0


def cmd_hyp(args) -> int:
    L = load_lattice(args.lattice)
    tol = {"normalization": hyp.NORM_TOL, "geodesic": hyp.GEODESIC_TOL}
    if args.action == "density":
        anchor = parse_vec(args.anchor) if args.anchor else None
        schedule = hyp.linear_schedule(args.slope, args.offset)
        rep = hyp.density_probe(L, range(args.d_min, args.d_max + 1), schedule, anchor,
                                args.radius, args.samples, args.seed)
        meta = report("hyp density", _config(args), rep.to_dict(),
                      {**tol, "window_schedule": schedule.description})
        if args.out:
            Path(args.out + ".csv").write_text(rep.csv())
            Path(args.out + ".json").write_text(dumps(meta))
        sys.stdout.write(rep.csv())
        return 0
    if args.action == "geodesic":
        if not args.wall:
            raise ConfigError("hyp geodesic needs --wall")
        rep = hyp.closed_geodesic_length(L, parse_vec(args.wall))
        _emit(args, dumps(report("hyp geodesic", _config(args), rep.to_dict(), tol)))
        return 0
    # cusps
    anchor = _anchor(L, args)
    if args.walls:
        walls = parse_vecs(args.walls)
    else:
        walls = []
        for d in range(1, args.max_square + 1):
            walls += enum_negative_primitive(L, EnumWindow(anchor, args.wall_height, d))
    geos = []
    for z in walls:
        try:
            geos.append(hyp.closed_geodesic_length(L, z))
        except DomainError:
            if args.walls:
                raise
    geos = geos[: args.count] if args.count else geos
    rep = hyp.cusp_clearance(L, geos, EnumWindow(anchor, args.cusp_height), args.samples)
    res = {"lattice": L.to_dict(), **rep.to_dict(), "geodesic_count": len(geos)}
    _emit(args, dumps(report("hyp cusps", _config(args), res, tol)))
    return 0


def cmd_period(args) -> int:
    L = load_lattice(args.lattice)
    if not args.classes:
        raise ConfigError("period commands need --classes")
    N = period.picard_closure(L, parse_vecs(args.classes))
    res = {"lattice": L.to_dict(), "picard": N.to_dict()}
    if args.action == "projective":
        res["projective"] = period.is_projective_type(N)
    elif args.action == "deform":
        res["target"] = period.deformation_target(L, N, args.search_bound).to_dict()
    _emit(args, dumps(report(f"period {args.action}", _config(args), res)))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker count (does not change output)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="conekit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    lat = sub.add_parser("lattice", parents=[common], help="lattice presets and invariants")
    lat.add_argument("action", choices=["info", "list"])
    lat.add_argument("--lattice", "--preset", dest="lattice")
    lat.set_defaults(func=cmd_lattice)

    en = sub.add_parser("enum", parents=[common], help="enumerate wall or cusp vectors")
    en.add_argument("--lattice", required=True)
    en.add_argument("--square", type=int, required=True, help="-d for walls, 0 for cusps")
    en.add_argument("--anchor")
    en.add_argument("--height", type=int, required=True)
    en.set_defaults(func=cmd_enum)

    orb = sub.add_parser("orbits", parents=[common], help="orbit decomposition of walls")
    orb.add_argument("--lattice", required=True)
    orb.add_argument("--squares", required=True)
    orb.add_argument("--height", type=int, required=True)
    orb.add_argument("--anchor")
    orb.add_argument("--group", default="reflections", help="reflections, none, or a JSON file")
    orb.add_argument("--group-height", type=int, default=None)
    orb.add_argument("--word-cap", type=int, default=4)
    orb.set_defaults(func=cmd_orbits)

    cham = sub.add_parser("chambers", parents=[common], help="wall-and-chamber engine")
    cham.add_argument("action", choices=["locate", "faces", "cross", "aut-orbits"])
    cham.add_argument("--lattice", required=True)
    cham.add_argument("--squares", required=True)
    cham.add_argument("--height", type=int, required=True)
    cham.add_argument("--anchor")
    cham.add_argument("--point")
    cham.add_argument("--wall")
    cham.add_argument("--group", default="reflections")
    cham.add_argument("--group-height", type=int, default=None)
    cham.add_argument("--word-cap", type=int, default=2)
    cham.set_defaults(func=cmd_chambers)

    hp = sub.add_parser("hyp", parents=[common], help="hyperbolic geometry probes")
    hp.add_argument("action", choices=["density", "geodesic", "cusps"])
    hp.add_argument("--lattice", required=True)
    hp.add_argument("--anchor")
    hp.add_argument("--d-min", type=int, default=1)
    hp.add_argument("--d-max", type=int, default=20)
    hp.add_argument("--slope", type=int, default=1, help="window height H(D) = slope*D + offset")
    hp.add_argument("--offset", type=int, default=0)
    hp.add_argument("--radius", type=float, default=1.5)
    hp.add_argument("--samples", type=int, default=2000)
    hp.add_argument("--seed", type=int, default=7)
    hp.add_argument("--wall")
    hp.add_argument("--walls", help="semicolon-separated wall vectors for cusps")
    hp.add_argument("--max-square", type=int, default=10)
    hp.add_argument("--wall-height", type=int, default=3)
    hp.add_argument("--count", type=int, default=5)
    hp.add_argument("--cusp-height", type=int, default=4)
    hp.set_defaults(func=cmd_hyp)

    per = sub.add_parser("period", parents=[common], help="Picard sublattice operations")
    per.add_argument("action", choices=["picard", "projective", "deform"])
    per.add_argument("--lattice", required=True)
    per.add_argument("--classes")
    per.add_argument("--search-bound", type=int, default=1)
    per.set_defaults(func=cmd_period)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    set_default_workers(args.threads)
    try:
        return args.func(args)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    finally:
        set_default_workers(None)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
