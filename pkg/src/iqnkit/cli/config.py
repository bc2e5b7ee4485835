"""Experiment configuration files.

A configuration is an INI file::

    [problem]
    generator = added_mass      ; added_mass | pulse | explicit
    m = 200
    rho_spectral = 1.2
    n_steps = 40
    seed = 0

    [criteria]
    eps_abs = 1e-8
    eps_rel = 1e-3

    [accelerator relax]
    scheme = ConstRelax
    omega0 = 0.5

    [accelerator ils]
    scheme = ILS

Every section whose name starts with ``accelerator`` defines one scheme, in
file order.  ``run`` uses the first one; ``compare`` and ``scaling`` use all
of them.  Explicit problems give ``matrix`` (rows separated by ``;``) and
``forcing`` (one vector per time step, separated by ``;``).
"""

import configparser
from dataclasses import dataclass, field

from iqnkit.accelerators import AcceleratorConfig
from iqnkit.driver import ConvergenceCriteria
from iqnkit.problems import problem_from_params


class ConfigError(ValueError):
    pass


_INT_KEYS = {"m", "n_steps", "n_levels", "n_reflectors", "seed"}
_FLOAT_KEYS = {"rho_spectral", "epsilon_nl"}
_ACCEL_KEYS = {
    "scheme": str, "omega0": float, "q": str, "explicit_recent_step": "bool",
    "rank_tolerance": float, "pivot_tolerance": float, "aitken_omega_max": float,
    "aitken_carry_omega": "bool",
}


def _parse_rows(text):
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    return [[float(v) for v in r.replace(",", " ").split()] for r in rows]


def _format_rows(rows):
    return "; ".join(" ".join(repr(float(v)) for v in row) for row in rows)


@dataclass
class ExperimentConfig:
    problem: dict
    accelerators: list
    criteria: ConvergenceCriteria = field(default_factory=ConvergenceCriteria)
    repetitions: int = 1
    extrapolate: bool = False
    m_list: list = None

    def build_problem(self):
        return problem_from_params(self.problem)

    def to_text(self):
        """Serialize back to the INI format; parsing the result round-trips."""
        parser = configparser.ConfigParser()
        prob = {}
        for key, value in self.problem.items():
            if value is None:
                continue
            if key in ("matrix", "forcing"):
                prob[key] = _format_rows(value)
            else:
                prob[key] = str(value)
        parser["problem"] = prob
        c = self.criteria
        parser["criteria"] = {"eps_abs": repr(c.eps_abs), "eps_rel": repr(c.eps_rel),
                              "max_iterations": str(c.max_iterations), "combine": c.combine}
        run = {"repetitions": str(self.repetitions), "extrapolate": str(self.extrapolate).lower()}
        if self.m_list:
            run["m_list"] = ", ".join(str(m) for m in self.m_list)
        parser["run"] = run
        for i, acc in enumerate(self.accelerators):
            parser[f"accelerator {i}"] = {
                "scheme": acc.scheme.value, "omega0": repr(acc.omega0), "q": str(acc.q),
                "explicit_recent_step": str(acc.explicit_recent_step).lower(),
                "rank_tolerance": repr(acc.rank_tolerance),
                "pivot_tolerance": repr(acc.pivot_tolerance),
                "aitken_omega_max": repr(acc.aitken_omega_max),
                "aitken_carry_omega": str(acc.aitken_carry_omega).lower(),
            }
        lines = []
        for name in parser.sections():
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {v}" for k, v in parser[name].items())
            lines.append("")
        return "\n".join(lines)


def parse_config(text, seed=None):
    """Parse configuration text; raises ConfigError on any defect.

    ``seed`` overrides the problem seed when given.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable configuration: {exc}") from exc
    if not parser.has_section("problem"):
        raise ConfigError("missing [problem] section")
    try:
        problem = _parse_problem(parser["problem"])
        if seed is not None and problem["generator"] != "explicit":
            problem["seed"] = int(seed)
        accelerators = [
            _parse_accelerator(parser[name])
            for name in parser.sections()
            if name.split()[0] == "accelerator"
        ]
        if not accelerators:
            raise ConfigError("no [accelerator] section")
        crit = parser["criteria"] if parser.has_section("criteria") else {}
        criteria = ConvergenceCriteria(
            eps_abs=float(crit.get("eps_abs", 1e-8)),
            eps_rel=float(crit.get("eps_rel", 1e-3)),
            max_iterations=int(crit.get("max_iterations", 200)),
            combine=crit.get("combine", "or").strip(),
        )
        run = parser["run"] if parser.has_section("run") else {}
        repetitions = int(run.get("repetitions", 1))
        if repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        extrapolate = _bool(run.get("extrapolate", "false"))
        m_list = None
        if "m_list" in run:
            m_list = [int(v) for v in run["m_list"].replace(",", " ").split()]
        config = ExperimentConfig(problem, accelerators, criteria, repetitions, extrapolate, m_list)
        config.build_problem()
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return config


def load_config(path, seed=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, seed)


def _bool(value):
    value = str(value).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _parse_problem(section):
    generator = section.get("generator", "added_mass").strip()
    if generator == "explicit":
        params = {"generator": generator, "matrix": _parse_rows(section["matrix"]),
                  "forcing": _parse_rows(section["forcing"])}
        if "epsilon_nl" in section:
            params["epsilon_nl"] = float(section["epsilon_nl"])
        return params
    if generator not in ("added_mass", "pulse"):
        raise ConfigError(f"unknown generator {generator!r}")
    params = {"generator": generator}
    for key, value in section.items():
        if key == "generator":
            continue
        if key in _INT_KEYS:
            params[key] = None if value.strip().lower() == "none" else int(value)
        elif key in _FLOAT_KEYS:
            params[key] = float(value)
        else:
            raise ConfigError(f"unknown problem key {key!r}")
    for key in ("m", "rho_spectral") if generator == "added_mass" else ("m", "n_steps"):
        if key not in params:
            raise ConfigError(f"problem key {key!r} is required")
    return params


def _parse_accelerator(section):
    kwargs = {}
    for key, value in section.items():
        kind = _ACCEL_KEYS.get(key)
        if kind is None:
            raise ConfigError(f"unknown accelerator key {key!r} in [{section.name}]")
        kwargs[key] = _bool(value) if kind == "bool" else kind(value.strip() if kind is str else value)
    if "scheme" not in kwargs:
        raise ConfigError(f"[{section.name}] needs a scheme")
    return AcceleratorConfig(**kwargs)
