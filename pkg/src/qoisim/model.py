"""Scenario description, per-slot randomness and queue state.

Devices are identified by 1-based ``index`` in configs and messages; every
array and tuple in this package is indexed 0-based by position (device
``index`` 1 lives at position 0).
"""
from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

PROB_TOL = 1e-12


class ScenarioError(ValueError):
    """Raised for malformed scenario documents or violated invariants."""


@dataclass(frozen=True)
class FormatOption:
    reward: float
    data: int


BLANK = FormatOption(0.0, 0)


@dataclass(frozen=True)
class DeviceSpec:
    index: int
    formats: tuple[FormatOption, ...]
    s_q_max: int
    s_j_max: int
    observe_prob: float = 1.0

    @property
    def r_max(self) -> float:
        return max(f.reward for f in self.formats)

    @property
    def d_max(self) -> int:
        return max(f.data for f in self.formats)


@dataclass(frozen=True)
class ChannelSpec:
    """Distribution of the best achievable rate on one link.

    ``dst`` is ``None`` for the uplink of device ``src`` to the receiver
    station, otherwise the relay link ``src -> dst``.  The feasible rate set in
    a slot is ``{0, ..., best}``.
    """

    src: int
    dst: int | None
    rates: tuple[int, ...]
    probs: tuple[float, ...]
    max_rate: int | None = None

    @property
    def kind(self) -> str:
        return "uplink" if self.dst is None else "relay"

    @property
    def rate_max(self) -> int:
        return self.max_rate if self.max_rate is not None else max(self.rates)

    @property
    def name(self) -> str:
        return f"uplink {self.src}" if self.dst is None else f"relay {self.src}->{self.dst}"

    def sort_key(self) -> tuple[int, int, int]:
        # uplinks first, then relays, each ascending by endpoints
        return (0, self.src, 0) if self.dst is None else (1, self.src, self.dst)


@dataclass(frozen=True)
class Scenario:
    devices: tuple[DeviceSpec, ...]
    channels: tuple[ChannelSpec, ...]
    event_prob: float
    V: float
    horizon: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple(sorted(self.devices, key=lambda d: d.index)))
        object.__setattr__(self, "channels", tuple(sorted(self.channels, key=ChannelSpec.sort_key)))
        validate(self)

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @cached_property
    def s_q_max(self) -> np.ndarray:
        return np.array([d.s_q_max for d in self.devices], dtype=np.int64)

    @cached_property
    def s_j_max(self) -> np.ndarray:
        return np.array([d.s_j_max for d in self.devices], dtype=np.int64)

    @cached_property
    def observe_prob(self) -> np.ndarray:
        return np.array([d.observe_prob for d in self.devices], dtype=np.float64)

    @cached_property
    def n_formats(self) -> int:
        return max(len(d.formats) for d in self.devices)

    @cached_property
    def format_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(rewards, data) arrays of shape (N, F), padded with blank formats."""
        n, F = self.n_devices, self.n_formats
        rewards = np.zeros((n, F), dtype=np.float64)
        data = np.zeros((n, F), dtype=np.int64)
        for i, dev in enumerate(self.devices):
            for f, opt in enumerate(dev.formats):
                rewards[i, f] = opt.reward
                data[i, f] = opt.data
        return rewards, data

    @cached_property
    def u_max(self) -> np.ndarray:
        out = np.zeros(self.n_devices, dtype=np.int64)
        for ch in self.channels:
            if ch.dst is None:
                out[ch.src - 1] = ch.rate_max
        return out

    @cached_property
    def a_max(self) -> np.ndarray:
        """Maximum relay rates, ``a_max[n, m]`` for link n -> m (0 if absent)."""
        out = np.zeros((self.n_devices, self.n_devices), dtype=np.int64)
        for ch in self.channels:
            if ch.dst is not None:
                out[ch.src - 1, ch.dst - 1] = ch.rate_max
        return out

    @cached_property
    def y0_max(self) -> float:
        return float(sum(d.r_max for d in self.devices))

    @cached_property
    def link_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Padded per-link (src, dst, rates, cumulative probs) in canonical order.

        ``dst`` is -1 for uplinks; src/dst are 0-based positions.
        """
        L = len(self.channels)
        R = max((len(ch.rates) for ch in self.channels), default=1)
        src = np.zeros(L, dtype=np.int64)
        dst = np.full(L, -1, dtype=np.int64)
        rates = np.zeros((L, R), dtype=np.int64)
        cum = np.ones((L, R), dtype=np.float64)
        for k, ch in enumerate(self.channels):
            src[k] = ch.src - 1
            if ch.dst is not None:
                dst[k] = ch.dst - 1
            r = len(ch.rates)
            rates[k, :r] = ch.rates
            rates[k, r:] = ch.rates[-1]
            c = np.cumsum(ch.probs)
            c[-1] = 1.0
            cum[k, :r] = c
        return src, dst, rates, cum


def validate(sc: Scenario) -> None:
    n = len(sc.devices)
    if n == 0:
        raise ScenarioError("scenario has no devices")
    indices = [d.index for d in sc.devices]
    if len(set(indices)) != n:
        raise ScenarioError(f"duplicate device indices: {indices}")
    if indices != list(range(1, n + 1)):
        raise ScenarioError(f"device indices must be 1..{n}, got {indices}")
    if not 0.0 <= sc.event_prob <= 1.0:
        raise ScenarioError(f"event_prob must lie in [0, 1], got {sc.event_prob}")
    if sc.V < 0:
        raise ScenarioError(f"V must be non-negative, got {sc.V}")
    if sc.horizon < 0:
        raise ScenarioError(f"horizon must be non-negative, got {sc.horizon}")

    for d in sc.devices:
        if not d.formats or d.formats[0] != BLANK:
            raise ScenarioError(f"device {d.index}: format 0 must be the blank format (0, 0)")
        for f, opt in enumerate(d.formats):
            if opt.reward < 0 or opt.data < 0:
                raise ScenarioError(f"device {d.index}: format {f} has negative reward or data")
            if f > 0 and opt.data == 0:
                raise ScenarioError(f"device {d.index}: non-blank format {f} has zero data")
        if d.s_q_max < 1 or d.s_j_max < 1:
            raise ScenarioError(f"device {d.index}: s_q_max and s_j_max must be positive integers")
        if not 0.0 <= d.observe_prob <= 1.0:
            raise ScenarioError(f"device {d.index}: observe_prob must lie in [0, 1]")

    seen = set()
    for ch in sc.channels:
        key = (ch.src, ch.dst)
        if key in seen:
            raise ScenarioError(f"duplicate channel {ch.name}")
        seen.add(key)
        if ch.src not in indices or (ch.dst is not None and ch.dst not in indices):
            raise ScenarioError(f"{ch.name}: unknown device")
        if ch.dst == ch.src:
            raise ScenarioError(f"{ch.name}: self-relay forbidden")
        if not ch.rates or len(ch.rates) != len(ch.probs):
            raise ScenarioError(f"{ch.name}: empty or mismatched distribution")
        if any(r < 0 for r in ch.rates) or any(p < 0 for p in ch.probs):
            raise ScenarioError(f"{ch.name}: negative rate or probability")
        if abs(sum(ch.probs) - 1.0) > PROB_TOL:
            raise ScenarioError(f"{ch.name}: probabilities sum to {sum(ch.probs)!r}, not 1")
        if ch.max_rate is not None and max(ch.rates) > ch.max_rate:
            raise ScenarioError(f"{ch.name}: best rate {max(ch.rates)} exceeds declared max_rate {ch.max_rate}")

    u_max = {ch.src: ch.rate_max for ch in sc.channels if ch.dst is None}
    relay_out: dict[int, int] = {}
    for ch in sc.channels:
        if ch.dst is not None:
            relay_out[ch.src] = relay_out.get(ch.src, 0) + ch.rate_max
    for d in sc.devices:
        if d.s_q_max < u_max.get(d.index, 0):
            raise ScenarioError(
                f"s_q_max < u_max on device {d.index} ({d.s_q_max} < {u_max[d.index]}): "
                "internal shift must cover the uplink rate")
        if d.s_j_max < relay_out.get(d.index, 0):
            raise ScenarioError(
                f"s_j_max < sum of outgoing a_max on device {d.index} "
                f"({d.s_j_max} < {relay_out[d.index]}): internal shift must cover relay rates")


# ---------------------------------------------------------------------------
# Config documents
# ---------------------------------------------------------------------------

_PAIR = re.compile(r"^\s*([^:\s]+)\s*:\s*([^:\s]+)\s*$")
_DEVICE = re.compile(r"^device\s+(\d+)$")
_UPLINK = re.compile(r"^uplink\s+(\d+)$")
_RELAY = re.compile(r"^relay\s+(\d+)\s*->\s*(\d+)$")


def _pairs(text: str, where: str) -> list[tuple[str, str]]:
    out = []
    for tok in text.replace("\n", ",").split(","):
        if not tok.strip():
            continue
        m = _PAIR.match(tok)
        if m is None:
            raise ScenarioError(f"{where}: expected 'a:b' pair, got {tok.strip()!r}")
        out.append((m.group(1), m.group(2)))
    return out


def _num(text: str, kind, where: str):
    try:
        if kind is int:
            v = float(text)
            if not v.is_integer():
                raise ValueError
            return int(v)
        return float(text)
    except ValueError:
        raise ScenarioError(f"{where}: expected {kind.__name__}, got {text!r}") from None


def _get(section: configparser.SectionProxy, key: str, kind, default=None):
    where = f"[{section.name}].{key}"
    if key not in section:
        if default is None:
            raise ScenarioError(f"{where}: missing required key")
        return default
    return _num(section[key], kind, where)


def loads_scenario(text: str) -> Scenario:
    """Parse a scenario document (INI-style sections, see scenarios/README.md)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"parse error: {exc}") from None

    if not cp.has_section("scenario"):
        raise ScenarioError("missing [scenario] section")
    top = cp["scenario"]
    devices, channels = [], []
    for name in cp.sections():
        where = f"[{name}]"
        sec = cp[name]
        if name == "scenario":
            continue
        if m := _DEVICE.match(name):
            if "formats" not in sec:
                raise ScenarioError(f"{where}.formats: missing required key")
            opts = [FormatOption(_num(r, float, f"{where}.formats"), _num(d, int, f"{where}.formats"))
                    for d, r in _pairs(sec["formats"], f"{where}.formats")]
            if not opts or opts[0] != BLANK:
                opts.insert(0, BLANK)
            devices.append(DeviceSpec(
                index=int(m.group(1)),
                formats=tuple(opts),
                s_q_max=_get(sec, "s_q_max", int),
                s_j_max=_get(sec, "s_j_max", int),
                observe_prob=_get(sec, "observe_prob", float, 1.0),
            ))
        elif (m := _UPLINK.match(name)) or (m := _RELAY.match(name)):
            if "distribution" not in sec:
                raise ScenarioError(f"{where}.distribution: missing required key")
            pairs = _pairs(sec["distribution"], f"{where}.distribution")
            rates = [_num(r, int, f"{where}.distribution") for r, _ in pairs]
            probs = [_num(p, float, f"{where}.distribution") for _, p in pairs]
            dst = int(m.group(2)) if m.re is _RELAY else None
            max_rate = _get(sec, "max_rate", int, -1)
            channels.append(ChannelSpec(int(m.group(1)), dst, tuple(rates), tuple(probs),
                                        None if max_rate < 0 else max_rate))
        else:
            raise ScenarioError(f"{where}: unknown section")

    return Scenario(
        devices=tuple(devices),
        channels=tuple(channels),
        event_prob=_get(top, "event_prob", float),
        V=_get(top, "V", float),
        horizon=_get(top, "horizon", int, 1000),
        seed=_get(top, "seed", int, 0),
    )


def load_scenario(path: str | Path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def dumps_scenario(sc: Scenario) -> str:
    lines = ["[scenario]", f"event_prob = {sc.event_prob!r}", f"V = {sc.V!r}",
             f"horizon = {sc.horizon}", f"seed = {sc.seed}", ""]
    for d in sc.devices:
        fmts = ", ".join(f"{f.data}:{f.reward!r}" for f in d.formats[1:])
        lines += [f"[device {d.index}]", f"formats = {fmts}", f"s_q_max = {d.s_q_max}",
                  f"s_j_max = {d.s_j_max}", f"observe_prob = {d.observe_prob!r}", ""]
    for ch in sc.channels:
        head = f"[uplink {ch.src}]" if ch.dst is None else f"[relay {ch.src}->{ch.dst}]"
        dist = ", ".join(f"{r}:{p!r}" for r, p in zip(ch.rates, ch.probs))
        lines += [head, f"distribution = {dist}"]
        if ch.max_rate is not None:
            lines.append(f"max_rate = {ch.max_rate}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Randomness and state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotRealization:
    event_occurred: bool
    options: tuple[tuple[FormatOption, ...], ...]
    uplink_best: tuple[int, ...]
    relay_best: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SlotBlock:
    """Consecutive slot realizations in columnar form."""

    event: np.ndarray       # (T,) bool
    observed: np.ndarray    # (T, N) bool, already masked by ``event``
    link_best: np.ndarray   # (T, L) int64, canonical link order

    def __len__(self):
        return len(self.event)


def draws_per_slot(sc: Scenario) -> int:
    return 1 + sc.n_devices + len(sc.channels)


def sample_block(sc: Scenario, rng: np.random.Generator, count: int) -> SlotBlock:
    """Draw ``count`` slots.

    Each slot consumes exactly ``1 + N + L`` uniforms in the order: event,
    per-device observation (ascending index), channels (canonical order).
    Drawing a block therefore leaves ``rng`` exactly where ``count``
    successive :func:`sample_slot` calls would.
    """
    n = sc.n_devices
    u = rng.random((count, draws_per_slot(sc)))
    event = u[:, 0] < sc.event_prob
    observed = (u[:, 1:1 + n] < sc.observe_prob) & event[:, None]
    _, _, rates, cum = sc.link_tables
    L = len(sc.channels)
    best = np.zeros((count, L), dtype=np.int64)
    for k in range(L):
        idx = np.searchsorted(cum[k, :-1], u[:, 1 + n + k], side="right")
        best[:, k] = rates[k, idx]
    return SlotBlock(event, observed, best)


def realization(sc: Scenario, block: SlotBlock, t: int) -> SlotRealization:
    n = sc.n_devices
    blank_row = (BLANK,) * sc.n_formats
    options = []
    for i, dev in enumerate(sc.devices):
        if block.observed[t, i]:
            options.append(tuple(dev.formats) + (BLANK,) * (sc.n_formats - len(dev.formats)))
        else:
            options.append(blank_row)
    uplink = [0] * n
    relay = [[0] * n for _ in range(n)]
    for k, ch in enumerate(sc.channels):
        b = int(block.link_best[t, k])
        if ch.dst is None:
            uplink[ch.src - 1] = b
        else:
            relay[ch.src - 1][ch.dst - 1] = b
    return SlotRealization(bool(block.event[t]), tuple(options), tuple(uplink),
                           tuple(tuple(r) for r in relay))


def sample_slot(sc: Scenario, rng: np.random.Generator) -> SlotRealization:
    return realization(sc, sample_block(sc, rng, 1), 0)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class QueueVector:
    K: tuple[int, ...]
    Q: tuple[int, ...]
    J: tuple[int, ...]

    def __post_init__(self):
        for name in ("K", "Q", "J"):
            vals = tuple(int(v) for v in getattr(self, name))
            if any(v < 0 for v in vals):
                raise ValueError(f"negative backlog in {name}: {vals}")
            object.__setattr__(self, name, vals)

    @classmethod
    def zeros(cls, n: int) -> "QueueVector":
        z = (0,) * n
        return cls(z, z, z)

    @property
    def total(self) -> int:
        return sum(self.K) + sum(self.Q) + sum(self.J)


@dataclass(frozen=True)
class DecisionVector:
    format: tuple[int, ...]
    s_q: tuple[int, ...]
    s_j: tuple[int, ...]
    u: tuple[int, ...]
    a: tuple[tuple[int, ...], ...] = field(default=())

    @classmethod
    def zeros(cls, n: int) -> "DecisionVector":
        z = (0,) * n
        return cls(z, z, z, z, tuple(z for _ in range(n)))


def is_feasible(sc: Scenario, slot: SlotRealization, dec: DecisionVector) -> bool:
    n = sc.n_devices
    for i in range(n):
        if not 0 <= dec.format[i] < len(slot.options[i]):
            return False
        if not (0 <= dec.s_q[i] <= sc.s_q_max[i] and 0 <= dec.s_j[i] <= sc.s_j_max[i]):
            return False
        if not 0 <= dec.u[i] <= slot.uplink_best[i]:
            return False
        for m in range(n):
            if not 0 <= dec.a[i][m] <= slot.relay_best[i][m]:
                return False
    return True


def reference_formats() -> tuple[FormatOption, ...]:
    """The four-format table used in the two-device simulations."""
    return (BLANK, FormatOption(20.0, 100), FormatOption(15.0, 50), FormatOption(10.0, 10))

