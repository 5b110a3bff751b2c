"""JSON run configuration."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import jsonschema

from .harness import DEFAULT_ALT_PROB, SCENARIO_DEFAULTS, SCENARIOS, Scenario, make_scenario
from .kernel import LINEAR, RBF, Kernel
from .teacher import GFT, RFT, AltTeaching, Assertions, TeacherPolicy, make_pool

BUNDLED_IMAGES = ("ring", "eight", "oval", "blank")

_POS = {"type": "number", "exclusiveMinimum": 0}
_RATIO = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario", "seed"],
    "properties": {
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": list(SCENARIOS)},
                "overrides": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "eta": _POS,
                        "epsilon": _POS,
                        "max_iters": {"type": "integer", "minimum": 0},
                        "aggregation": {"enum": ["mean", "sum"]},
                        "target_image": {"type": "string"},
                        "init_image": {"type": "string"},
                        "init_sign": {"enum": [-1, 1]},
                    },
                },
            },
        },
        "kernel": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": [RBF, LINEAR]},
                "rbf_scale": _POS,
                "linear_offset": {"type": "number"},
            },
        },
        "teacher": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": [RFT, GFT]},
                "k": {"anyOf": [{"type": "integer", "minimum": 1}, _RATIO]},
                "pool": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "ratio": _RATIO,
                        "indices": {"type": "array", "minItems": 1,
                                    "items": {"type": "integer", "minimum": 0}},
                    },
                },
                "alt": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["image"],
                    "properties": {
                        "prob": {"type": "number", "minimum": 0, "maximum": 1},
                        "image": {"type": "string"},
                    },
                },
            },
        },
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "assertions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lemma_descent": {"type": "boolean"},
                "theorem1": {"type": "boolean"},
            },
        },
    },
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seed: int
    eta: float
    epsilon: float
    max_iters: int
    aggregation: str = "mean"
    target_image: Optional[str] = None
    init_image: Optional[str] = None
    init_sign: Optional[int] = None
    kernel: Optional[Kernel] = None
    teacher: str = GFT
    k: Union[int, float] = 1
    pool_ratio: Optional[float] = None
    pool_indices: Optional[Tuple[int, ...]] = None
    alt_image: Optional[str] = None
    alt_prob: float = DEFAULT_ALT_PROB
    output_dir: str = "out"
    assertions: Assertions = field(default_factory=Assertions)

    def build(self) -> Tuple[Scenario, TeacherPolicy, Assertions]:
        scen = make_scenario(
            self.scenario,
            eta=self.eta,
            epsilon=self.epsilon,
            max_iters=self.max_iters,
            aggregation=self.aggregation,
            target_image=self.target_image,
            init_image=self.init_image,
            alt_image=self.alt_image,
            init_sign=self.init_sign,
            kernel=self.kernel,
        )
        n = scen.grid.shape[0]
        pool = self.pool_indices
        if pool is None and self.pool_ratio is not None:
            pool = make_pool(self.pool_ratio, n, self.seed)
        if pool is not None and max(pool) >= n:
            raise ConfigError(f"teacher.pool.indices: index {max(pool)} outside grid of {n} points")
        alt = AltTeaching(self.alt_prob, scen.alt) if scen.alt is not None else None
        policy = TeacherPolicy(self.teacher, self.k, pool, alt, self.seed)
        return scen, policy, self.assertions


def _path_of(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def _check_file(value: Optional[str], key: str, base_dir: Path) -> Optional[str]:
    if value is None or value in BUNDLED_IMAGES:
        return value
    p = Path(value)
    if not p.is_absolute():
        p = base_dir / p
    if not p.is_file():
        raise ConfigError(f"{key}: file not found: {p}")
    return str(p)


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Parse and validate JSON config text.

    Relative file paths resolve against ``base_dir`` (default: the working
    directory). Unspecified scenario settings take the scenario defaults.
    """
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"{_path_of(err)}: {err.message}")

    name = raw["scenario"]["name"]
    ov = dict(SCENARIO_DEFAULTS[name])
    ov.update(raw["scenario"].get("overrides", {}))
    if name != "image" and ({"target_image", "init_image"} & ov.keys()):
        raise ConfigError("scenario.overrides: image overrides require the image scenario")
    if name != "parametric3d" and "init_sign" in ov:
        raise ConfigError("scenario.overrides.init_sign: only valid for parametric3d")

    kernel = None
    if "kernel" in raw:
        kernel = Kernel(**raw["kernel"])

    t = raw.get("teacher", {})
    k = t.get("k", 1)
    if isinstance(k, float) and k > 1:
        k = int(k)
    pool_ratio = pool_indices = None
    if "pool" in t:
        pool = t["pool"]
        if "ratio" in pool and "indices" in pool:
            raise ConfigError("teacher.pool: give either ratio or indices, not both")
        if "indices" in pool:
            pool_indices = tuple(sorted(set(pool["indices"])))
        else:
            pool_ratio = pool.get("ratio", 0.8)
    alt_image = alt_prob = None
    if "alt" in t:
        if name != "image":
            raise ConfigError("teacher.alt: alternative teaching requires the image scenario")
        alt_image = _check_file(t["alt"]["image"], "teacher.alt.image", base_dir)
        alt_prob = t["alt"].get("prob", DEFAULT_ALT_PROB)

    return RunConfig(
        scenario=name,
        seed=raw["seed"],
        eta=float(ov["eta"]),
        epsilon=float(ov["epsilon"]),
        max_iters=int(ov["max_iters"]),
        aggregation=ov.get("aggregation", "mean"),
        target_image=_check_file(ov.get("target_image"), "scenario.overrides.target_image", base_dir),
        init_image=_check_file(ov.get("init_image"), "scenario.overrides.init_image", base_dir),
        init_sign=ov.get("init_sign"),
        kernel=kernel,
        teacher=t.get("kind", GFT),
        k=k,
        pool_ratio=pool_ratio,
        pool_indices=pool_indices,
        alt_image=alt_image,
        alt_prob=DEFAULT_ALT_PROB if alt_prob is None else float(alt_prob),
        output_dir=raw.get("output_dir", "out"),
        assertions=Assertions(**raw.get("assertions", {})),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)
