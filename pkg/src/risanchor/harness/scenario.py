"""Scenario description, JSON (de)serialization and seed derivation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from ..channel import NoiseModel, PilotGrid, BsLink, make_profile
from ..errors import ScenarioError
from ..estimation import PARALLEL_TOL
from ..geometry import MotionModel, RisSegment, Vec2

PRESETS = ("desk", "full")

# Spawn-key namespaces for derived seeds.
PROFILE_STREAM = 0
NOISE_STREAM = 1


def derive_seed(master: int, *key: int) -> int:
    """Deterministic 64-bit seed for the work unit named by ``key``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class PilotSpec:
    f_start_hz: float
    f_stop_hz: float
    f_count: int
    t_span_s: float
    t_count: int
    tx_power: float = 1.0

    def grid(self) -> PilotGrid:
        return PilotGrid.uniform(self.f_start_hz, self.f_stop_hz, self.f_count,
                                 self.t_span_s, self.t_count, self.tx_power)


@dataclass(frozen=True)
class GridSpec:
    x: tuple[float, float, int]
    y: tuple[float, float, int]

    def axes(self):
        return (np.linspace(self.x[0], self.x[1], int(self.x[2])),
                np.linspace(self.y[0], self.y[1], int(self.y[2])))


@dataclass(frozen=True)
class RisSpec:
    segment: RisSegment
    bs_position: Vec2
    profile: str = "mirror"
    pathloss: complex = 1.0
    first_pixel_delay: float | None = None
    seed: int | None = None
    active: bool = True

    def link(self) -> BsLink:
        return BsLink.from_geometry(self.bs_position, self.segment, self.pathloss,
                                    self.first_pixel_delay)


@dataclass(frozen=True)
class Scenario:
    ris: tuple[RisSpec, ...]
    pilots: PilotSpec
    speed_mps: float
    snr_db: float
    grid: GridSpec
    seed: int = 0
    ues: tuple[Vec2, ...] = field(default_factory=tuple)

    @property
    def motion(self) -> MotionModel:
        return MotionModel(self.speed_mps)

    @property
    def noise_var(self) -> float:
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return NoiseModel.from_snr_db(self.snr_db, self.pilots.tx_power).variance

    def active_indices(self) -> list[int]:
        return [r for r, spec in enumerate(self.ris) if spec.active]

    def resolve_subset(self, subset=None) -> list[int]:
        """0-based RIS indices: ``subset`` (0-based) or all active surfaces."""
        if subset is None:
            return self.active_indices()
        subset = list(subset)
        for r in subset:
            if not 0 <= r < len(self.ris):
                raise ScenarioError(f"RIS index {r + 1} out of range 1..{len(self.ris)}", "ris")
        if len(set(subset)) != len(subset):
            raise ScenarioError("duplicate RIS index in subset", "ris")
        return subset

    def check_positioning(self, subset=None) -> list[int]:
        """Validate that ``subset`` can support a position fix; returns it."""
        idx = self.resolve_subset(subset)
        if len(idx) < 2:
            raise ScenarioError(f"positioning needs at least 2 RISs, got {len(idx)}", "ris")
        return idx

    def is_parallel(self, subset) -> bool:
        slopes = [self.ris[r].segment.slope for r in subset]
        return float(np.ptp(slopes)) <= PARALLEL_TOL

    def profiles(self, subset=None, mode=None) -> dict:
        """Scattering profiles drawn once per run; keyed by 0-based RIS index."""
        out = {}
        for r in self.resolve_subset(subset):
            spec = self.ris[r]
            seed = spec.seed if spec.seed is not None else derive_seed(self.seed, PROFILE_STREAM, r)
            out[r] = make_profile(mode or spec.profile, spec.segment.pixel_count, seed)
        return out

    def with_grid(self, nx: int, ny: int) -> "Scenario":
        g = self.grid
        return replace(self, grid=GridSpec((g.x[0], g.x[1], nx), (g.y[0], g.y[1], ny)))


# ----------------------------------------------------------------- parsing

def _num(obj, key, path, positive=False, integer=False, default=None, allow_inf=False):
    if key not in obj:
        if default is not None:
            return default
        raise ScenarioError("missing required field", f"{path}.{key}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"expected a number, got {val!r}", f"{path}.{key}")
    if integer and int(val) != val:
        raise ScenarioError(f"expected an integer, got {val!r}", f"{path}.{key}")
    if not math.isfinite(val) and not (allow_inf and math.isinf(val) and val > 0):
        raise ScenarioError(f"expected a finite number, got {val!r}", f"{path}.{key}")
    if positive and not val > 0:
        raise ScenarioError(f"must be positive, got {val!r}", f"{path}.{key}")
    return int(val) if integer else float(val)


def _pair(val, path):
    if (not isinstance(val, (list, tuple)) or len(val) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)):
        raise ScenarioError(f"expected [x, y], got {val!r}", path)
    return Vec2(float(val[0]), float(val[1]))


def _complex(val, path):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    if isinstance(val, (list, tuple)) and len(val) == 2:
        return complex(float(val[0]), float(val[1]))
    raise ScenarioError(f"expected a number or [re, im], got {val!r}", path)


def _axis(val, path):
    if not isinstance(val, (list, tuple)) or len(val) != 3:
        raise ScenarioError(f"expected [min, max, count], got {val!r}", path)
    lo, hi, n = val
    if not (isinstance(n, int) and n >= 1):
        raise ScenarioError(f"count must be a positive integer, got {n!r}", path)
    if not float(hi) >= float(lo):
        raise ScenarioError("max must not be below min", path)
    return (float(lo), float(hi), n)


def _parse_ris(item, i) -> RisSpec:
    path = f"ris[{i}]"
    if not isinstance(item, dict):
        raise ScenarioError("expected an object", path)
    if "side" not in item:
        raise ScenarioError("side flag (+1 or -1) must be given explicitly", f"{path}.side")
    if item["side"] not in (1, -1):
        raise ScenarioError(f"side must be +1 or -1, got {item['side']!r}", f"{path}.side")
    origin = _pair(item.get("origin"), f"{path}.origin")
    profile = item.get("profile", "mirror")
    if profile not in ("mirror", "random"):
        raise ScenarioError(f"profile must be 'mirror' or 'random', got {profile!r}", f"{path}.profile")
    bs = item.get("bs")
    if not isinstance(bs, dict):
        raise ScenarioError("missing BS description", f"{path}.bs")
    seed = item.get("seed")
    if seed is not None and (not isinstance(seed, int) or seed < 0):
        raise ScenarioError("seed must be a non-negative integer", f"{path}.seed")
    active = item.get("active", True)
    if not isinstance(active, bool):
        raise ScenarioError("active must be true or false", f"{path}.active")
    fpd = bs.get("first_pixel_delay")
    if fpd is not None:
        fpd = _num(bs, "first_pixel_delay", f"{path}.bs")
        if fpd < 0:
            raise ScenarioError("must be non-negative", f"{path}.bs.first_pixel_delay")
    try:
        segment = RisSegment(
            origin,
            _num(item, "length_pixels", path, positive=True, integer=True),
            _num(item, "pixel_spacing", path, positive=True),
            _num(item, "slope", path),
            int(item["side"]),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc), path) from exc
    return RisSpec(
        segment=segment,
        bs_position=_pair(bs.get("position"), f"{path}.bs.position"),
        profile=profile,
        pathloss=_complex(bs.get("pathloss", 1.0), f"{path}.bs.pathloss"),
        first_pixel_delay=fpd,
        seed=seed,
        active=active,
    )


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object")
    ris_items = doc.get("ris")
    if not isinstance(ris_items, list) or not ris_items:
        raise ScenarioError("expected a non-empty array", "ris")
    ris = tuple(_parse_ris(item, i) for i, item in enumerate(ris_items))
    if not any(spec.active for spec in ris):
        raise ScenarioError("at least one RIS must be active", "ris")

    p = doc.get("pilots")
    if not isinstance(p, dict):
        raise ScenarioError("missing pilot description", "pilots")
    pilots = PilotSpec(
        _num(p, "f_start_hz", "pilots", positive=True),
        _num(p, "f_stop_hz", "pilots", positive=True),
        _num(p, "f_count", "pilots", positive=True, integer=True),
        _num(p, "t_span_s", "pilots", positive=True),
        _num(p, "t_count", "pilots", positive=True, integer=True),
        _num(p, "tx_power", "pilots", positive=True, default=1.0),
    )
    if pilots.f_stop_hz < pilots.f_start_hz or (pilots.f_count > 1 and pilots.f_stop_hz == pilots.f_start_hz):
        raise ScenarioError("f_stop_hz must exceed f_start_hz", "pilots.f_stop_hz")

    motion = doc.get("motion")
    if not isinstance(motion, dict):
        raise ScenarioError("missing motion description", "motion")
    speed = _num(motion, "speed_mps", "motion", positive=True)

    snr_db = _num(doc, "snr_db", "$", allow_inf=True)

    g = doc.get("grid")
    if not isinstance(g, dict):
        raise ScenarioError("missing grid description", "grid")
    grid = GridSpec(_axis(g.get("x"), "grid.x"), _axis(g.get("y"), "grid.y"))

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioError("seed must be a non-negative integer", "seed")

    ues = doc.get("ues", [])
    if not isinstance(ues, list):
        raise ScenarioError("expected an array of [x, y]", "ues")
    ues = tuple(_pair(u, f"ues[{i}]") for i, u in enumerate(ues))

    return Scenario(ris, pilots, speed, snr_db, grid, seed, ues)


def scenario_to_dict(sc: Scenario) -> dict:
    items = []
    for spec in sc.ris:
        seg = spec.segment
        pl = complex(spec.pathloss)
        bs = {"position": [spec.bs_position.x, spec.bs_position.y],
              "pathloss": pl.real if pl.imag == 0 else [pl.real, pl.imag]}
        if spec.first_pixel_delay is not None:
            bs["first_pixel_delay"] = spec.first_pixel_delay
        item = {
            "origin": [seg.origin.x, seg.origin.y],
            "slope": seg.slope,
            "length_pixels": seg.pixel_count,
            "pixel_spacing": seg.pixel_spacing,
            "side": seg.side,
            "profile": spec.profile,
            "active": spec.active,
            "bs": bs,
        }
        if spec.seed is not None:
            item["seed"] = spec.seed
        items.append(item)
    p = sc.pilots
    doc = {
        "ris": items,
        "pilots": {"f_start_hz": p.f_start_hz, "f_stop_hz": p.f_stop_hz, "f_count": p.f_count,
                   "t_span_s": p.t_span_s, "t_count": p.t_count, "tx_power": p.tx_power},
        "motion": {"speed_mps": sc.speed_mps},
        "snr_db": sc.snr_db,
        "grid": {"x": list(sc.grid.x), "y": list(sc.grid.y)},
        "seed": sc.seed,
    }
    if sc.ues:
        doc["ues"] = [[u.x, u.y] for u in sc.ues]
    return doc


def _loads(text: str, source: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    path = Path(path)
    return _loads(path.read_text(encoding="utf-8"), str(path))


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(sc), encoding="utf-8")


def load_preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("risanchor.presets").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return _loads(text, f"preset {name}")
