"""Three-tier topology: tasks, stations, wired graph and latency primitives.

A scenario bundles everything the solvers need to price an allocation:
the task set, one macro station (MBS) plus small-cell stations (SBS),
per-pair channel gains, and a wired forwarding graph used by the
SBS-to-MBS relay paths.  Scenarios are immutable after generation and
serialize to a JSON document so that solver and oracle consume
byte-identical inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

MBS = "MBS"
SBS = "SBS"

#: terminal marker appended to every path
VIRTUAL_DESTINATION = "virtual"


@dataclass(frozen=True)
class Task:
    """A unit of work: `c` data bits, deadline `t_max` seconds, `u` cycles/bit."""

    id: int
    c: float
    t_max: float
    u: float

    def __post_init__(self):
        if self.c <= 0 or self.t_max <= 0 or self.u <= 0:
            raise ConfigurationError(
                f"task {self.id}: c, t_max, u must be positive "
                f"(got {self.c}, {self.t_max}, {self.u})"
            )


@dataclass(frozen=True)
class Station:
    """A base station hosting an edge server.

    `f` is compute capacity in cycles/s, `tx_power_density` the downlink
    power entering the SNR numerator, `e_cycle` the energy drawn per CPU
    cycle of its server.
    """

    id: int
    kind: str
    f: float
    bandwidth: float
    tx_power_density: float
    e_cycle: float
    position: tuple[float, float]

    def __post_init__(self):
        if self.kind not in (MBS, SBS):
            raise ConfigurationError(f"station {self.id}: unknown kind {self.kind!r}")
        if self.f <= 0 or self.bandwidth <= 0:
            raise ConfigurationError(f"station {self.id}: f and bandwidth must be positive")


@dataclass(frozen=True)
class LocalDevice:
    """The terminal tier: compute rate, energy per cycle, uplink power."""

    f_local: float
    e_local: float
    tx_power: float

    def __post_init__(self):
        if self.f_local <= 0 or self.e_local < 0 or self.tx_power <= 0:
            raise ConfigurationError("local device: f_local > 0, e_local >= 0, tx_power > 0")


@dataclass(frozen=True)
class ForwardingUnit:
    """Wired hop with latency (o1 * load + o2) * load."""

    id: str
    o1: float
    o2: float


@dataclass(frozen=True)
class Link:
    """Wired link with latency load / capacity."""

    id: str
    endpoints: tuple[str, str]
    capacity: float

    def __post_init__(self):
        if self.capacity <= 0:
            raise ConfigurationError(f"link {self.id}: capacity must be positive")


@dataclass(frozen=True)
class Path:
    """Alternating wired elements ending at the virtual destination.

    `elements` is a sequence of ("link"|"unit", element_id) pairs; wireless
    segments carry no elements.  `kind` is one of local, mbs_direct,
    sbs_access, sbs_relay.
    """

    id: str
    task_id: int
    kind: str
    station_id: int | None
    elements: tuple[tuple[str, str], ...]
    terminal: str = VIRTUAL_DESTINATION


@dataclass(frozen=True)
class NetworkGraph:
    forwarding_units: dict[str, ForwardingUnit]
    links: dict[str, Link]
    paths: dict[str, Path]

    def relay_path(self, task_id: int, sbs_id: int) -> Path:
        return self.paths[f"t{task_id}:relay{sbs_id}"]

    def access_path(self, task_id: int, station_id: int) -> Path:
        return self.paths[f"t{task_id}:sta{station_id}"]

    def local_path(self, task_id: int) -> Path:
        return self.paths[f"t{task_id}:local"]


@dataclass(frozen=True)
class ChannelMatrix:
    """Station-by-task gains plus the noise floor."""

    gain: np.ndarray
    noise_power: float
    offload_power_sbs_mbs: float

    def __post_init__(self):
        if np.any(self.gain <= 0) or self.noise_power <= 0:
            raise ConfigurationError("channel: gains and noise power must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Generator knobs; defaults follow the simulation constants.

    The per-cycle energies default to values under which the delay term
    dominates the weighted objective and small tasks price out cheapest on
    the terminal tier; they can be overridden freely.  `bs_tx_power` is
    dimensionally ambiguous in its source and therefore exposed raw.
    """

    n_tasks: int = 100
    n_sbs: int = 5
    seed: int = 0
    c_range: tuple[float, float] = (5e3, 1e4)
    t_max_range: tuple[float, float] = (15.0, 30.0)
    u: float = 18000.0
    bandwidth: float = 20e6
    noise_dbm_per_hz: float = -172.0
    pathloss_exponent: float = 4.0
    area: float = 200.0
    user_tx_power: float = 0.1
    bs_tx_power: float = 40.0
    f_local: float = 5e9
    f_sbs: float = 2e10
    f_mbs: float = 1e11
    e_local: float = 1e-10
    e_sbs: float = 1.5e-9
    e_mbs: float = 1.2e-9
    o1: float = 1e-9
    o2: float = 1e-6
    link_capacity: float = 1e8
    sbs_mbs_tx_power: float = 1.0
    h_min: float = 0.05

    def __post_init__(self):
        if self.n_tasks < 1 or self.n_sbs < 0:
            raise ConfigurationError("need n_tasks >= 1 and n_sbs >= 0")
        for name in ("c_range", "t_max_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ConfigurationError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        for name in ("u", "bandwidth", "area", "user_tx_power", "bs_tx_power",
                     "f_local", "f_sbs", "f_mbs", "link_capacity", "sbs_mbs_tx_power"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if not (0 < self.h_min <= 1):
            raise ConfigurationError("h_min must lie in (0, 1]")

    @property
    def noise_power(self) -> float:
        """Noise in watts over the configured bandwidth (input is dBm/Hz)."""
        return 10 ** ((self.noise_dbm_per_hz - 30.0) / 10.0) * self.bandwidth


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    tasks: tuple[Task, ...]
    stations: tuple[Station, ...]
    device: LocalDevice
    channel: ChannelMatrix
    graph: NetworkGraph
    task_positions: np.ndarray = field(repr=False, default=None)

    # -- convenience views -------------------------------------------------

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_sbs(self) -> int:
        return len(self.stations) - 1

    @property
    def mbs(self) -> Station:
        return self.stations[0]

    @property
    def sbs_list(self) -> tuple[Station, ...]:
        return self.stations[1:]

    def c_array(self) -> np.ndarray:
        return np.array([t.c for t in self.tasks])

    def t_max_array(self) -> np.ndarray:
        return np.array([t.t_max for t in self.tasks])

    def u_array(self) -> np.ndarray:
        return np.array([t.u for t in self.tasks])

    # -- JSON round trip ---------------------------------------------------

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "config": {
                "n_tasks": cfg.n_tasks, "n_sbs": cfg.n_sbs, "seed": cfg.seed,
                "c_range": list(cfg.c_range), "t_max_range": list(cfg.t_max_range),
                "u": cfg.u, "bandwidth": cfg.bandwidth,
                "noise_dbm_per_hz": cfg.noise_dbm_per_hz,
                "pathloss_exponent": cfg.pathloss_exponent, "area": cfg.area,
                "user_tx_power": cfg.user_tx_power, "bs_tx_power": cfg.bs_tx_power,
                "f_local": cfg.f_local, "f_sbs": cfg.f_sbs, "f_mbs": cfg.f_mbs,
                "e_local": cfg.e_local, "e_sbs": cfg.e_sbs, "e_mbs": cfg.e_mbs,
                "o1": cfg.o1, "o2": cfg.o2, "link_capacity": cfg.link_capacity,
                "sbs_mbs_tx_power": cfg.sbs_mbs_tx_power, "h_min": cfg.h_min,
            },
            "tasks": [
                {"id": t.id, "c": t.c, "t_max": t.t_max, "u": t.u} for t in self.tasks
            ],
            "stations": [
                {"id": s.id, "kind": s.kind, "f": s.f, "bandwidth": s.bandwidth,
                 "tx_power_density": s.tx_power_density, "e_cycle": s.e_cycle,
                 "position": list(s.position)}
                for s in self.stations
            ],
            "device": {"f_local": self.device.f_local, "e_local": self.device.e_local,
                       "tx_power": self.device.tx_power},
            "channel": {"gain": self.channel.gain.tolist(),
                        "noise_power": self.channel.noise_power,
                        "offload_power_sbs_mbs": self.channel.offload_power_sbs_mbs},
            "graph": {
                "forwarding_units": [
                    {"id": u.id, "o1": u.o1, "o2": u.o2}
                    for u in self.graph.forwarding_units.values()
                ],
                "links": [
                    {"id": l.id, "endpoints": list(l.endpoints), "capacity": l.capacity}
                    for l in self.graph.links.values()
                ],
                "paths": [
                    {"id": p.id, "task_id": p.task_id, "kind": p.kind,
                     "station_id": p.station_id,
                     "elements": [list(e) for e in p.elements],
                     "terminal": p.terminal}
                    for p in self.graph.paths.values()
                ],
            },
            "task_positions": self.task_positions.tolist(),
        }

    def to_json(self, path=None) -> str:
        doc = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(doc)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        cfg = doc["config"]
        config = ScenarioConfig(
            n_tasks=cfg["n_tasks"], n_sbs=cfg["n_sbs"], seed=cfg["seed"],
            c_range=tuple(cfg["c_range"]), t_max_range=tuple(cfg["t_max_range"]),
            u=cfg["u"], bandwidth=cfg["bandwidth"],
            noise_dbm_per_hz=cfg["noise_dbm_per_hz"],
            pathloss_exponent=cfg["pathloss_exponent"], area=cfg["area"],
            user_tx_power=cfg["user_tx_power"], bs_tx_power=cfg["bs_tx_power"],
            f_local=cfg["f_local"], f_sbs=cfg["f_sbs"], f_mbs=cfg["f_mbs"],
            e_local=cfg["e_local"], e_sbs=cfg["e_sbs"], e_mbs=cfg["e_mbs"],
            o1=cfg["o1"], o2=cfg["o2"], link_capacity=cfg["link_capacity"],
            sbs_mbs_tx_power=cfg["sbs_mbs_tx_power"], h_min=cfg["h_min"],
        )
        tasks = tuple(Task(**t) for t in doc["tasks"])
        stations = tuple(
            Station(id=s["id"], kind=s["kind"], f=s["f"], bandwidth=s["bandwidth"],
                    tx_power_density=s["tx_power_density"], e_cycle=s["e_cycle"],
                    position=tuple(s["position"]))
            for s in doc["stations"]
        )
        device = LocalDevice(**doc["device"])
        channel = ChannelMatrix(
            gain=np.asarray(doc["channel"]["gain"], dtype=float),
            noise_power=doc["channel"]["noise_power"],
            offload_power_sbs_mbs=doc["channel"]["offload_power_sbs_mbs"],
        )
        graph = NetworkGraph(
            forwarding_units={u["id"]: ForwardingUnit(**u)
                              for u in doc["graph"]["forwarding_units"]},
            links={l["id"]: Link(id=l["id"], endpoints=tuple(l["endpoints"]),
                                 capacity=l["capacity"])
                   for l in doc["graph"]["links"]},
            paths={p["id"]: Path(id=p["id"], task_id=p["task_id"], kind=p["kind"],
                                 station_id=p["station_id"],
                                 elements=tuple(tuple(e) for e in p["elements"]),
                                 terminal=p["terminal"])
                   for p in doc["graph"]["paths"]},
        )
        return cls(config=config, tasks=tasks, stations=stations, device=device,
                   channel=channel, graph=graph,
                   task_positions=np.asarray(doc["task_positions"], dtype=float))

    @classmethod
    def from_json(cls, src) -> "Scenario":
        if isinstance(src, str) and src.lstrip().startswith("{"):
            return cls.from_dict(json.loads(src))
        with open(src) as fh:
            return cls.from_dict(json.load(fh))


def generate_scenario(config: ScenarioConfig) -> Scenario:
    """Draw a reproducible scenario: stations and terminals uniform in the
    coverage square, the MBS pinned at the center, gains from the path-loss
    law max(d, 1m)^-exponent, and one wired relay route per SBS."""
    rng = np.random.default_rng(config.seed)
    n, s = config.n_tasks, config.n_sbs

    task_pos = rng.uniform(0.0, config.area, size=(n, 2))
    sbs_pos = rng.uniform(0.0, config.area, size=(s, 2))
    center = config.area / 2.0

    stations = [Station(id=0, kind=MBS, f=config.f_mbs, bandwidth=config.bandwidth,
                        tx_power_density=config.bs_tx_power, e_cycle=config.e_mbs,
                        position=(center, center))]
    for i in range(s):
        stations.append(Station(id=i + 1, kind=SBS, f=config.f_sbs,
                                bandwidth=config.bandwidth,
                                tx_power_density=config.bs_tx_power,
                                e_cycle=config.e_sbs,
                                position=(float(sbs_pos[i, 0]), float(sbs_pos[i, 1]))))

    c = rng.uniform(*config.c_range, size=n)
    t_max = rng.uniform(*config.t_max_range, size=n)
    tasks = tuple(Task(id=j, c=float(c[j]), t_max=float(t_max[j]), u=config.u)
                  for j in range(n))

    device = LocalDevice(f_local=config.f_local, e_local=config.e_local,
                         tx_power=config.user_tx_power)

    sta_pos = np.array([st.position for st in stations])
    d = np.linalg.norm(sta_pos[:, None, :] - task_pos[None, :, :], axis=-1)
    gain = np.maximum(d, 1.0) ** (-config.pathloss_exponent)
    channel = ChannelMatrix(gain=gain, noise_power=config.noise_power,
                            offload_power_sbs_mbs=config.sbs_mbs_tx_power)

    # Wired relay route per SBS: its egress switch, the backhaul link, and a
    # shared aggregation switch at the MBS.  Shortest-hop by construction.
    units = {"fu:mbs": ForwardingUnit(id="fu:mbs", o1=config.o1, o2=config.o2)}
    links = {}
    for st in stations[1:]:
        units[f"fu:sbs{st.id}"] = ForwardingUnit(id=f"fu:sbs{st.id}",
                                                 o1=config.o1, o2=config.o2)
        links[f"ln:sbs{st.id}-mbs"] = Link(id=f"ln:sbs{st.id}-mbs",
                                           endpoints=(f"sbs{st.id}", "mbs"),
                                           capacity=config.link_capacity)

    paths = {}
    for j in range(n):
        paths[f"t{j}:local"] = Path(id=f"t{j}:local", task_id=j, kind="local",
                                    station_id=None, elements=())
        paths[f"t{j}:sta0"] = Path(id=f"t{j}:sta0", task_id=j, kind="mbs_direct",
                                   station_id=0, elements=())
        for st in stations[1:]:
            paths[f"t{j}:sta{st.id}"] = Path(
                id=f"t{j}:sta{st.id}", task_id=j, kind="sbs_access",
                station_id=st.id, elements=())
            paths[f"t{j}:relay{st.id}"] = Path(
                id=f"t{j}:relay{st.id}", task_id=j, kind="sbs_relay",
                station_id=st.id,
                elements=(("unit", f"fu:sbs{st.id}"),
                          ("link", f"ln:sbs{st.id}-mbs"),
                          ("unit", "fu:mbs")))

    graph = NetworkGraph(forwarding_units=units, links=links, paths=paths)
    return Scenario(config=config, tasks=tasks, stations=tuple(stations),
                    device=device, channel=channel, graph=graph,
                    task_positions=task_pos)


# -- load and latency primitives -------------------------------------------

def forwarding_load(assignment, unit_id: str, scenario: Scenario) -> float:
    """Aggregate bits crossing a forwarding unit: sum of y * c over every
    path that contains the unit.  `assignment` maps path id -> usage y."""
    if unit_id not in scenario.graph.forwarding_units:
        raise KeyError(f"unknown forwarding unit {unit_id!r}")
    total = 0.0
    for path_id, y in assignment.items():
        path = scenario.graph.paths[path_id]
        if ("unit", unit_id) in path.elements:
            total += y * scenario.tasks[path.task_id].c
    return total


def link_load(assignment, link_id: str, scenario: Scenario) -> float:
    """Aggregate bits crossing a link, same convention as forwarding_load."""
    if link_id not in scenario.graph.links:
        raise KeyError(f"unknown link {link_id!r}")
    total = 0.0
    for path_id, y in assignment.items():
        path = scenario.graph.paths[path_id]
        if ("link", link_id) in path.elements:
            total += y * scenario.tasks[path.task_id].c
    return total


def forwarding_delay(load: float, unit: ForwardingUnit) -> float:
    """(o1 * load + o2) * load seconds; load must be nonnegative."""
    if load < 0:
        raise ValueError(f"load must be nonnegative, got {load}")
    return (unit.o1 * load + unit.o2) * load


def link_delay(load: float, link: Link) -> float:
    """load / capacity seconds; load must be nonnegative."""
    if load < 0:
        raise ValueError(f"load must be nonnegative, got {load}")
    if link.capacity <= 0:
        raise ConfigurationError(f"link {link.id}: nonpositive capacity")
    return load / link.capacity


def path_delay(path: Path, assignment, scenario: Scenario) -> float:
    """Sum of link and forwarding delays along a path under current loads.

    The virtual destination terminates every path and contributes nothing.
    """
    total = 0.0
    for kind, elem_id in path.elements:
        if kind == "unit":
            unit = scenario.graph.forwarding_units.get(elem_id)
            if unit is None:
                raise KeyError(f"path {path.id}: dangling unit {elem_id!r}")
            total += forwarding_delay(forwarding_load(assignment, elem_id, scenario), unit)
        elif kind == "link":
            link = scenario.graph.links.get(elem_id)
            if link is None:
                raise KeyError(f"path {path.id}: dangling link {elem_id!r}")
            total += link_delay(link_load(assignment, elem_id, scenario), link)
        else:
            raise KeyError(f"path {path.id}: unknown element kind {kind!r}")
    return total
