"""Batch front-end: ``lyapmin {orbits,alpha,subaction,plan,perturb,verify,run}``.

Every command reads an optional JSON config (flags override its fields),
writes its reports into ``--out`` and, on a library error, writes
``error.json`` and exits with that error's status.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from . import io
from .circle_map import ExpandingMap, doubling_map, expansion_profile
from .conjugacy import conjugacy_map, continue_orbit
from .errors import ConfigError, LyapminError
from .orbits import enumerate_periodic_orbits
from .perturbation import assemble_plan, default_orbit_period
from .subaction import orbit_alpha, solve_subaction
from .verifier import (c11_distance, certify_unique_minimizer, sample_perturbation_ball,
                       verify)

COMMANDS = ("orbits", "alpha", "subaction", "plan", "perturb", "verify", "run")


@dataclass(frozen=True)
class ExperimentConfig:
    map: dict = field(default_factory=lambda: doubling_map().to_dict())
    epsilon: float = 0.1
    regime: str = "practical"
    max_period: int = 12
    grid_n: int = 2 ** 14
    samples: int = 20
    seed: int = 0
    out: str = "lyapmin-out"
    positivity_samples: int = 100
    birkhoff_starts: int = 32
    birkhoff_steps: int = 10 ** 5
    slack: float = 1e-6
    mollify: bool = False
    practical: dict = field(default_factory=dict)

    @property
    def expanding_map(self):
        return io.load_map(self.map)

    def to_dict(self):
        return dataclasses.asdict(self)


def load_config(path=None, **overrides):
    """Read and validate a config file, then apply non-None overrides."""
    data = {}
    if path is not None:
        try:
            data = io.read_json(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        io.validate(data, "config")
        if "map" in data:
            io.validate(data["map"], "map")
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}", path=list(exc.absolute_path)) from exc
    return ExperimentConfig(**data)


def _plan(cfg, m, sub=None):
    p = cfg.practical
    return assemble_plan(m, cfg.epsilon, cfg.regime, L=p.get("L"), rho=p.get("rho"),
                         C_big=p.get("C_big"), C_select=p.get("C_select"),
                         grid_n=cfg.grid_n, max_period=cfg.max_period, slack=cfg.slack,
                         mollify=cfg.mollify, subaction=sub)


def _samples(cfg, plan):
    return sample_perturbation_ball(plan.perturbed_map, plan.ledger.eps_tilde, cfg.samples,
                                    cfg.seed)


def cmd_orbits(cfg, out, state):
    m = state.setdefault("map", cfg.expanding_map)
    expansion_profile(m)
    cat = enumerate_periodic_orbits(m, cfg.max_period)
    io.write_catalog(out, cat)
    state["catalog"] = cat
    return 0


def _subaction(cfg, state):
    m = state.setdefault("map", cfg.expanding_map)
    if "subaction" not in state:
        state["subaction"] = solve_subaction(m, cfg.grid_n,
                                             orbit_period=default_orbit_period(m.degree))
    return state["subaction"]


def cmd_alpha(cfg, out, state):
    sub = _subaction(cfg, state)
    _, orbit = orbit_alpha(state["map"], default_orbit_period(state["map"].degree))
    payload = {"alpha": sub.alpha, "alpha_bracket": list(sub.alpha_bracket),
               "alpha_orbit": sub.alpha_orbit, "orbit": io.orbit_to_dict(orbit)}
    io.write_json(out / "alpha.json", payload)
    return 0


def cmd_subaction(cfg, out, state):
    sub = _subaction(cfg, state)
    io.write_subaction(out, state["map"], sub)
    return 0


def _get_plan(cfg, state):
    if "plan" not in state:
        sub = _subaction(cfg, state)
        state["plan"] = _plan(cfg, state["map"], sub)
    return state["plan"]


def cmd_plan(cfg, out, state):
    plan = _get_plan(cfg, state)
    io.write_json(out / "plan.json", io.plan_to_dict(plan))
    return 0


def cmd_perturb(cfg, out, state):
    plan = _get_plan(cfg, state)
    maps = []
    for S in _samples(cfg, plan):
        orbit = continue_orbit(plan.orbit, S, plan.perturbed_map,
                               eps0_tilde=plan.ledger.eps0_tilde)
        maps.append({
            "map_id": S.map_id, "map": S.to_dict(),
            "c11_distance": c11_distance(S, plan.perturbed_map),
            "min_deriv": expansion_profile(S).min_deriv,
            "conjugacy": conjugacy_map(plan.perturbed_map, S).to_dict(),
            "orbit": io.orbit_to_dict(orbit),
        })
    io.write_json(out / "perturbations.json",
                  {"plan_id": plan.plan_id, "eps_tilde": plan.ledger.eps_tilde,
                   "seed": cfg.seed, "maps": maps})
    return 0


def cmd_verify(cfg, out, state):
    plan = _get_plan(cfg, state)
    reports = [verify(plan, S, samples=cfg.positivity_samples, seed=cfg.seed,
                      max_period=cfg.max_period, n_starts=cfg.birkhoff_starts,
                      steps=cfg.birkhoff_steps)
               for S in _samples(cfg, plan)]
    control = certify_unique_minimizer(plan.base_map, plan.orbit, cfg.max_period)
    passed = all(r.passed for r in reports)
    payload = {"plan_id": plan.plan_id, "regime": plan.regime, "seed": cfg.seed,
               "pass": passed,
               "control": {"map_id": plan.base_map.map_id, "margin": control.margin,
                           "unique": control.unique},
               "samples": [r.to_dict() for r in reports]}
    io.write_json(out / "verification.json", payload)
    state["verification"] = payload
    return 0 if passed else 1


def _summary(cfg, state):
    m, sub, plan, ver = state["map"], state["subaction"], state["plan"], state["verification"]
    led = plan.ledger
    s = ver["samples"]
    lines = [
        f"map_id            {m.map_id}",
        f"degree            {m.degree}",
        f"alpha             {sub.alpha:.15g}",
        f"subaction defect  {sub.defect:.3e}  (n = {sub.n}, Lip f = {sub.lip_f:.6g})",
        f"regime            {plan.regime}",
        f"orbit             code {plan.orbit.code_str}, period {plan.orbit.period}",
        f"K, L, rho         {led.K:.6g}, {led.L}, {led.rho:.6e}",
        f"G*, d*            {led.G_star:.6g}, {led.d_star:.3e}",
        f"t = eps rho G*/K^4  {led.t:.6e}",
        f"eps0~, eps~       {led.eps0_tilde:.6e}, {led.eps_tilde:.6e}",
        f"relaxed           {', '.join(led.relaxed()) or 'none'}",
        f"samples           {len(s)} (seed {cfg.seed})",
        f"min margin        {min(r['minimality_margin'] for r in s):.6e}",
        f"min far region    {min(r['far_region_margin'] for r in s):.6e}",
        f"min partial sum   {min(r['min_partial_sum'] for r in s):.6e}",
        f"min Birkhoff avg  {min(r['birkhoff_min'] for r in s):.6e}",
        f"control margin    {ver['control']['margin']:.6e}",
        f"verification      {'PASS' if ver['pass'] else 'FAIL'}",
    ]
    return "\n".join(lines) + "\n"


def cmd_run(cfg, out, state):
    for step in (cmd_orbits, cmd_subaction, cmd_alpha, cmd_plan, cmd_perturb):
        step(cfg, out, state)
    status = cmd_verify(cfg, out, state)
    (out / "summary.txt").write_text(_summary(cfg, state), encoding="utf-8")
    return status


HANDLERS = {"orbits": cmd_orbits, "alpha": cmd_alpha, "subaction": cmd_subaction,
            "plan": cmd_plan, "perturb": cmd_perturb, "verify": cmd_verify, "run": cmd_run}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lyapmin",
        description="Perturb an expanding circle map so a periodic orbit becomes the unique "
                    "Lyapunov minimizer, and verify it numerically.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--regime", choices=("paper", "practical"))
        p.add_argument("--seed", type=int)
        p.add_argument("--max-period", type=int, dest="max_period")
        p.add_argument("--grid-n", type=int, dest="grid_n")
        p.add_argument("--out", help="output directory")
        p.add_argument("--samples", type=int, help="maps drawn from the perturbation ball")
        p.add_argument("--epsilon", type=float)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in
                 ("regime", "seed", "max_period", "grid_n", "out", "samples", "epsilon")}
    out = Path(args.out or "lyapmin-out")
    try:
        cfg = load_config(args.config, **overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[args.command](cfg, out, {})
    except LyapminError as err:
        out.mkdir(parents=True, exist_ok=True)
        io.write_json(out / "error.json", err.to_dict())
        print(f"lyapmin: {err.code}: {err}", file=sys.stderr)
        return err.exit_status


if __name__ == "__main__":
    sys.exit(main())
