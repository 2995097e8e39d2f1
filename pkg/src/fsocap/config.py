"""Scenario files: flat ``key = value`` text with dotted keys.

Grammar (one statement per line)::

    # comment                      (also after a value: ``x = 1  # note``)
    [section]                      prefixes later keys with ``section.``
    key.sub = value                numbers, words, or comma-separated lists

Unknown keys, duplicates and malformed lines raise ParseError with the
offending line number.  See README for the full key reference.
"""

import hashlib
import math
import re
from dataclasses import dataclass, field

from fsocap.channel import AtmosphericLink
from fsocap.errors import ConfigurationError
from fsocap.montecarlo import McConfig

SWEEP_AXES = ("rho_db", "gamma_bar_db", "cn2", "D", "L", "beta")
SNR_AXES = ("rho_db", "gamma_bar_db")
METHOD_ORDER = ("closed_form", "quadrature", "high_snr", "monte_carlo", "awgn")

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_SECTION = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_.]*)\]$")

# key -> (converter, default); None default means required
_SCHEMA = {
    "name": (str, "scenario"),
    "link.cn2": (float, 3e-14),
    "link.wavelength": (float, 850e-9),
    "link.distance": (float, 4000.0),
    "link.aperture": (float, 0.01),
    "M": (int, None),
    "N": (int, None),
    "eta": (float, 1.0),
    "mode": (str, "iid"),
    "inid.beta": (float, None),
    "inid.omega": ("floats", None),
    "inid.spread": (float, None),
    "inid.integer_shape": (str, "auto"),
    "sweep.axis": (str, "rho_db"),
    "sweep.start": (float, None),
    "sweep.stop": (float, None),
    "sweep.steps": (int, None),
    "sweep.scale": (str, "linear"),
    "snr.axis": (str, "gamma_bar_db"),
    "snr.value": (float, None),
    "methods": ("words", ("closed_form", "high_snr", "monte_carlo", "awgn")),
    "tolerance": (float, 1e-9),
    "mc.samples": (int, 10**7),
    "mc.seed": (int, 0),
    "mc.batch": (int, 1 << 20),
    "mc.workers": (int, 1),
}


class ParseError(ConfigurationError):
    """Malformed or invalid scenario text; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message, line=0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _convert(kind, raw, line, key):
    try:
        if kind == "floats":
            vals = [float(v) for v in raw.split(",") if v.strip()]
            if not vals:
                raise ValueError("empty list")
            return tuple(vals)
        if kind == "words":
            return tuple(w.strip() for w in raw.split(",") if w.strip())
        if kind is int:
            val = float(raw)
            if val != int(val):
                raise ValueError("not an integer")
            return int(val)
        return kind(raw)
    except ValueError as exc:
        raise ParseError(f"bad value for {key!r}: {raw!r} ({exc})", line) from None


def parse_text(text):
    """Parse scenario text into {key: value}, keeping line numbers for later checks."""
    values, lines = {}, {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _SECTION.match(stripped)
        if m:
            section = m.group(1) + "."
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}", lineno)
        key, val = (part.strip() for part in stripped.split("=", 1))
        key = section + key
        if not _KEY.match(key):
            raise ParseError(f"invalid key {key!r}", lineno)
        if key not in _SCHEMA:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        if not val:
            raise ParseError(f"missing value for {key!r}", lineno)
        values[key] = _convert(_SCHEMA[key][0], val, lineno, key)
        lines[key] = lineno
    return values, lines


@dataclass(frozen=True)
class Scenario:
    name: str
    link: AtmosphericLink
    M: int
    N: int
    eta: float
    mode: str
    sweep_axis: str
    sweep_values: tuple
    methods: tuple
    mc: McConfig
    tolerance: float = 1e-9
    inid_beta: float | None = None
    inid_omega: tuple | None = None
    inid_spread: float | None = None
    integer_shape: str = "auto"
    snr_axis: str = "gamma_bar_db"
    snr_value: float | None = None
    digest: str = ""
    source: dict = field(default_factory=dict, compare=False)

    @property
    def L(self):
        return self.M * self.N


def _sweep_values(start, stop, steps, scale, line):
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ParseError("sweep bounds must be finite", line)
    if steps < 2:
        raise ParseError("sweep.steps must be at least 2", line)
    if scale == "linear":
        return tuple(start + (stop - start) * i / (steps - 1) for i in range(steps))
    if scale == "log":
        if not (start > 0 and stop > 0):
            raise ParseError("log sweep needs positive bounds", line)
        a, b = math.log10(start), math.log10(stop)
        return tuple(10.0 ** (a + (b - a) * i / (steps - 1)) for i in range(steps))
    raise ParseError(f"sweep.scale must be 'linear' or 'log', got {scale!r}", line)


# execution-only keys: they never change a result, so they stay out of the digest
_EXECUTION_KEYS = ("mc.batch", "mc.workers")


def canonical_text(values):
    return "\n".join(f"{k} = {values[k]!r}" for k in sorted(values) if k not in _EXECUTION_KEYS)


def build_scenario(values, lines=None, overrides=None):
    """Validate parsed values (plus CLI overrides) and build a Scenario."""
    lines = lines or {}
    values = dict(values)
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v

    def get(key):
        if key in values:
            return values[key]
        return _SCHEMA[key][1]

    def need(key):
        v = get(key)
        if v is None:
            raise ParseError(f"missing required key {key!r}")
        return v

    line = lines.get
    M, N = need("M"), need("N")
    if M < 1 or N < 1:
        raise ParseError("M and N must be positive", line("M", 0) or line("N", 0))
    mode = get("mode")
    if mode not in ("iid", "inid"):
        raise ParseError(f"mode must be 'iid' or 'inid', got {mode!r}", line("mode", 0))
    axis = get("sweep.axis")
    if axis not in SWEEP_AXES:
        raise ParseError(f"sweep.axis must be one of {SWEEP_AXES}", line("sweep.axis", 0))
    sweep = _sweep_values(
        need("sweep.start"), need("sweep.stop"), need("sweep.steps"), get("sweep.scale"), line("sweep.steps", 0)
    )
    methods = get("methods")
    bad = [m for m in methods if m not in METHOD_ORDER]
    if bad or not methods:
        raise ParseError(f"unknown method(s) {bad}; choose from {METHOD_ORDER}", line("methods", 0))
    methods = tuple(m for m in METHOD_ORDER if m in methods)
    snr_axis, snr_value = get("snr.axis"), get("snr.value")
    if axis not in SNR_AXES:
        if snr_axis not in SNR_AXES:
            raise ParseError(f"snr.axis must be one of {SNR_AXES}", line("snr.axis", 0))
        if snr_value is None:
            raise ParseError(f"sweeping {axis} needs a fixed snr.value")
    beta, omega, spread = get("inid.beta"), get("inid.omega"), get("inid.spread")
    if mode == "inid":
        given = sum(x is not None for x in (beta, omega, spread))
        if axis == "beta":
            if omega is not None or spread is not None:
                raise ParseError("a beta sweep cannot also fix inid.omega or inid.spread")
            if min(sweep) < 1:
                raise ParseError("beta values must be >= 1", line("sweep.start", 0))
        elif given != 1:
            raise ParseError("inid mode needs exactly one of inid.beta, inid.omega, inid.spread")
        if beta is not None and beta < 1:
            raise ParseError("inid.beta must be >= 1", line("inid.beta", 0))
        if omega is not None and len(omega) != M * N:
            raise ParseError(f"inid.omega needs {M * N} entries", line("inid.omega", 0))
    elif axis == "beta":
        raise ParseError("a beta sweep requires mode = inid", line("sweep.axis", 0))
    try:
        link = AtmosphericLink(
            get("link.cn2"), get("link.wavelength"), get("link.distance"), get("link.aperture")
        )
        mc = McConfig(get("mc.samples"), get("mc.seed"), get("mc.batch"), get("mc.workers"))
    except ConfigurationError as exc:
        raise ParseError(str(exc)) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    tol = get("tolerance")
    if not tol > 0:
        raise ParseError("tolerance must be positive", line("tolerance", 0))
    canon = canonical_text(values)
    return Scenario(
        name=get("name"),
        link=link,
        M=M,
        N=N,
        eta=get("eta"),
        mode=mode,
        sweep_axis=axis,
        sweep_values=sweep,
        methods=methods,
        mc=mc,
        tolerance=tol,
        inid_beta=beta,
        inid_omega=omega,
        inid_spread=spread,
        integer_shape=get("inid.integer_shape"),
        snr_axis=snr_axis,
        snr_value=snr_value,
        digest=hashlib.sha256(canon.encode()).hexdigest()[:16],
        source=values,
    )


def load_scenario(path, overrides=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    values, lines = parse_text(text)
    return build_scenario(values, lines, overrides)
