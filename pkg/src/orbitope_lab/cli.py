"""Batch front-end: ``orbitope-lab run|validate <config.json>``.

A config is one JSON document::

    {"group": "SL_R(3)", "representation": "standard", "command": "polytope",
     "params": {}, "seed": 0, "tolerances": {}, "output_dir": "out"}

Results go to ``output_dir`` and a summary JSON is printed to stdout. Errors
print ``{code, module, message, context}`` and exit with the error's code.
Set ORBITOPE_LAB_THREADS to cap BLAS threads.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

COMMANDS = ("polytope", "faces", "flow", "satake-ray", "boundary", "bly", "bly-inverse",
            "furstenberg", "eigenbound")
STOCHASTIC = {"bly", "bly-inverse", "furstenberg", "flow"}


def _limit_threads() -> None:
    n = os.environ.get("ORBITOPE_LAB_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


@dataclass
class RunConfig:
    group: Any
    representation: str
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    tolerances: Any = None
    output_dir: Path = Path("orbitope_out")

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "RunConfig":
        from .errors import ConfigError
        from .numeric import ToleranceProfile

        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        missing = [k for k in ("group", "representation", "command") if k not in data]
        if missing:
            raise ConfigError("config is missing required keys", missing=missing)
        unknown = set(data) - {"group", "representation", "command", "params", "seed", "tolerances", "output_dir"}
        if unknown:
            raise ConfigError("config has unknown keys", unknown=sorted(unknown))
        command = data["command"]
        if command not in COMMANDS:
            raise ConfigError("unknown command", command=command, known=list(COMMANDS))
        seed = data.get("seed")
        if command in STOCHASTIC and not isinstance(seed, int):
            raise ConfigError("stochastic command needs an integer seed", command=command)
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object")
        try:
            tol = ToleranceProfile.from_dict(data.get("tolerances"))
        except (TypeError, ValueError) as exc:
            raise ConfigError("invalid tolerances", detail=str(exc)) from exc
        out = Path(data.get("output_dir", "orbitope_out"))
        if base is not None and not out.is_absolute():
            out = base / out
        return cls(data["group"], str(data["representation"]), command, params, seed, tol, out)


def _setup(cfg: RunConfig):
    from .groups import build_model, parse_family
    from .representation import build_representation

    family, n = parse_family(cfg.group)
    model = build_model(family, n, cfg.tolerances)
    return model, build_representation(model, cfg.representation)


def _beta(model, data):
    from .io import parse_matrix_or_coords

    return model.p_coords(parse_matrix_or_coords(data))


def _point(rep, params: dict):
    """A Satake point or group element from params["point"]."""
    from .errors import ParseError
    from .io import parse_matrix_or_coords
    from .satake import base_point, ray_limit

    entry = params.get("point", {"kind": "base"})
    kind = entry.get("kind")
    if kind == "base":
        return base_point(rep)
    if kind == "ray-limit":
        return ray_limit(rep, _beta(rep.model, entry["beta"]))
    if kind == "ray":
        return rep.model.exp_p(float(entry["t"]) * _beta(rep.model, entry["beta"]))
    if kind == "element":
        return rep.model.check_member(parse_matrix_or_coords(entry["g"]))
    raise ParseError("point kind must be base, ray, ray-limit or element", kind=kind)


def _point_dict(p) -> dict:
    from .satake import SatakePoint, satake_point_to_dict

    if isinstance(p, SatakePoint):
        return satake_point_to_dict(p)
    return {"element": p}


# ------------------------------------------------------------------ commands
def cmd_polytope(cfg, model, rep, out: Path) -> dict:
    from .faces import moment_polytope
    from .io import polytope_to_dict, polytope_vertices_csv, write_json

    P = moment_polytope(rep)
    write_json(out / "polytope.json", polytope_to_dict(P))
    (out / "vertices.csv").write_text(polytope_vertices_csv(P))
    return {"vertices": P.vertices, "n_facets": len(P.facets), "highest_weight": rep.weights.mu}


def cmd_faces(cfg, model, rep, out: Path) -> dict:
    from .faces import face_classes_containing, face_correspondence, face_lattice, moment_polytope
    from .io import write_json

    P = moment_polytope(rep)
    lattice = face_lattice(P, model)
    corr = face_correspondence(rep, P)
    result = {
        "count_by_dim": lattice.count_by_dim(),
        "faces": [{"vertices": list(f), "dim": d, "orbit": o}
                  for f, d, o in zip(lattice.faces, lattice.dims, lattice.orbit_of)],
        "classes_containing_highest_weight": len(face_classes_containing(P, lattice, rep.weights.mu)),
        "correspondence": [{"I": list(f.I), "J": list(f.J), "vertices": list(f.vertex_subset),
                            "dim": f.dim_face, "beta": f.defining_beta} for f in corr],
    }
    write_json(out / "faces.json", result)
    return {"count_by_dim": result["count_by_dim"], "connected_subsets": len(corr),
            "classes_containing_highest_weight": result["classes_containing_highest_weight"]}


def cmd_flow(cfg, model, rep, out: Path) -> dict:
    import numpy as np

    from .gradient import flow, flow_limit, height_function, sample_projective_space
    from .io import parse_complex_vector, write_json

    p = cfg.params
    beta = _beta(model, p["beta"])
    x = (parse_complex_vector(p["x"]) if "x" in p
         else sample_projective_space(rep.dimV, 1, cfg.seed)[0])
    times = [float(t) for t in p.get("times", [0, 1, 2, 5, 10, 20, 40])]
    traj = [flow(rep, x, beta, t, model.tol).vector for t in times]
    heights = [height_function(rep, v, beta, model.tol) for v in traj]
    limit = flow_limit(rep, x, beta, model.tol).vector
    result = {"x": x / np.linalg.norm(x), "beta": beta, "times": times, "trajectory": traj,
              "heights": heights, "limit": limit}
    write_json(out / "flow.json", result)
    return {"limit": limit, "final_height": heights[-1]}


def cmd_satake_ray(cfg, model, rep, out: Path) -> dict:
    import numpy as np

    from .io import write_json
    from .satake import RAY_HORIZON, classify_limit, ray_limit, satake_embed, satake_point_to_dict

    p = cfg.params
    beta = _beta(model, p["beta"])
    limit = ray_limit(rep, beta)
    t = float(p.get("t", RAY_HORIZON))
    finite = satake_embed(rep, model.exp_p(t * beta))
    c = classify_limit(rep, limit, seed=cfg.seed or 0)
    result = {
        "limit": satake_point_to_dict(limit),
        "t": t,
        "distance_at_t": float(np.linalg.norm(finite.A - limit.A)),
        "classification": {"interior": c.interior, "I": list(c.I), "angle": c.angle},
    }
    write_json(out / "satake_ray.json", result)
    return {"rank": limit.rank, "distance_at_t": result["distance_at_t"], "I": list(c.I)}


def cmd_boundary(cfg, model, rep, out: Path) -> dict:
    from .io import write_json
    from .satake import enumerate_boundary_components

    comps = enumerate_boundary_components(rep)
    result = {"components": [{"I": list(c.I), "J": list(c.J), "dim_V_I": c.V_I.shape[1], "V_I": c.V_I}
                             for c in comps]}
    write_json(out / "boundary.json", result)
    return {"n_components": len(comps), "I": [list(c.I) for c in comps]}


def cmd_bly(cfg, model, rep, out: Path) -> dict:
    from .bly import admissible, bly_evaluate, haar_measure
    from .faces import moment_polytope, orbitope_slack
    from .io import write_json

    nu = haar_measure(rep, int(cfg.params.get("atoms", 10000)), cfg.seed)
    point = _point(rep, cfg.params)
    value = bly_evaluate(rep, nu, point)
    ok, _ = admissible(rep, nu)
    result = {"point": _point_dict(point), "value": value, "value_matrix": model.p_matrix(value),
              "facet_slack": orbitope_slack(rep, value, moment_polytope(rep)), "admissible": ok}
    write_json(out / "bly.json", result)
    return {"value": value, "facet_slack": result["facet_slack"]}


def cmd_bly_inverse(cfg, model, rep, out: Path) -> dict:
    from .bly import bly_inverse, haar_measure, psi_of_xi
    from .io import write_json

    nu = haar_measure(rep, int(cfg.params.get("atoms", 10000)), cfg.seed)
    target = _beta(model, cfg.params["target"])
    g, report = bly_inverse(rep, nu, target, tol=float(cfg.params.get("tol", 1e-6)))
    write_json(out / "bly_inverse.json", {"target": target, "g": g, "report": report.to_dict()})
    return {"residual": report.residuals[-1], "iterations": report.iterations}


def cmd_furstenberg(cfg, model, rep, out: Path) -> dict:
    from .bly import furstenberg_map, haar_measure, max_atom_spread, moment
    from .io import write_json

    nu = haar_measure(rep, int(cfg.params.get("atoms", 10000)), cfg.seed)
    point = _point(rep, cfg.params)
    gamma = furstenberg_map(rep, point, nu)
    (out / "measure.csv").write_text(gamma.to_csv())
    result = {"point": _point_dict(point), "moment": moment(rep, gamma),
              "atoms": len(gamma), "spread": max_atom_spread(gamma)}
    write_json(out / "furstenberg.json", result)
    return {"moment": result["moment"], "spread": result["spread"]}


def cmd_eigenbound(cfg, model, rep, out: Path) -> dict:
    from .eigen import balance, mesh_sphere, north_bias_factor, rayleigh_bound, squashed_factor
    from .errors import ParseError
    from .io import mesh_to_off, write_json

    p = cfg.params
    metric = p.get("metric", "round")
    strength = p.get("strength")
    if metric == "round":
        conformal = None
    elif metric == "squashed":
        conformal = squashed_factor(0.4 if strength is None else float(strength))
    elif metric == "north-bias":
        conformal = north_bias_factor(1.0 if strength is None else float(strength))
    else:
        raise ParseError("metric must be round, squashed or north-bias", metric=metric)
    mesh = mesh_sphere(int(p.get("level", 5)), conformal)
    a, _ = balance(rep, mesh)
    report = rayleigh_bound(rep, mesh, a)
    write_json(out / "eigenbound.json", {"a": a, "report": report.to_dict()})
    (out / "mesh.off").write_text(mesh_to_off(mesh))
    return report.to_dict()


DISPATCH: dict[str, Callable] = {
    "polytope": cmd_polytope, "faces": cmd_faces, "flow": cmd_flow, "satake-ray": cmd_satake_ray,
    "boundary": cmd_boundary, "bly": cmd_bly, "bly-inverse": cmd_bly_inverse,
    "furstenberg": cmd_furstenberg, "eigenbound": cmd_eigenbound,
}


def load_config(path: str | Path) -> RunConfig:
    from .io import read_json

    path = Path(path)
    return RunConfig.from_dict(read_json(path), base=path.parent)


def run(cfg: RunConfig) -> dict:
    model, rep = _setup(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    summary = DISPATCH[cfg.command](cfg, model, rep, cfg.output_dir)
    from .io import write_json

    result = {"command": cfg.command, "group": model.descriptor(), "representation": rep.expression,
              "seed": cfg.seed, "summary": summary}
    write_json(cfg.output_dir / "result.json", result)
    return result


def validate(cfg: RunConfig) -> dict:
    model, rep = _setup(cfg)
    return {"valid": True, "command": cfg.command, "group": model.descriptor(), "dimV": rep.dimV}


def _fail(err, out_dir: Path | None) -> int:
    from .io import dumps, write_json

    payload = err.to_dict()
    sys.stdout.write(dumps({"error": payload}))
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            write_json(out_dir / "error.json", payload)
        except OSError:
            pass
    return err.exit_code


def main(argv: list[str] | None = None) -> int:
    _limit_threads()
    from .errors import OrbitopeLabError, ParseError
    from .io import dumps

    parser = argparse.ArgumentParser(prog="orbitope-lab", description=__doc__.splitlines()[0])
    parser.add_argument("action", choices=["run", "validate"])
    parser.add_argument("config", help="path to a JSON config")
    args = parser.parse_args(argv)
    cfg = None
    try:
        cfg = load_config(args.config)
        result = run(cfg) if args.action == "run" else validate(cfg)
    except OrbitopeLabError as err:
        return _fail(err, cfg.output_dir if cfg else None)
    except (KeyError, TypeError, ValueError) as exc:
        err = ParseError("invalid command parameters", detail=f"{type(exc).__name__}: {exc}")
        return _fail(err, cfg.output_dir if cfg else None)
    except Exception as exc:  # last resort: still emit structured JSON
        err = OrbitopeLabError("internal error", detail=f"{type(exc).__name__}: {exc}")
        return _fail(err, cfg.output_dir if cfg else None)
    sys.stdout.write(dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
