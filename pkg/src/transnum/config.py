"""INI run configurations: strict parsing and object builders.

The schema is deliberately small (see README for the full reference):

    [class]     kind = integer|real ; entries = 1 0
    [map]       family = rigid|affine|arnold|sinshear|skew + family params,
                optional shift = <int | p/q | real>
    [map.NAME]  additional maps (second operand, generating sets)
    [point]     x = 0.0 0.25 ; fiber = 0
    [measure]   kind = lebesgue|dirac-orbit|empirical (+ point/period/samples)
    [isotopy]   kind = straight|shear|skew + params
    [affine.NAME] matrix / translation / shift with exact rational entries
    [generators] maps = NAME... ; affine = NAME... ; target = NAME ; powers = N
    [seminorm]  mode = auto|estimate|certified
    [seifert]   genus = 0 ; pairs = (2,1) (2,-1) ; convention = h-positive
    [check]     count = 100 ; dimensions = 1 2
    [options]   seed / tolerance / max-iterations / grid (CLI flags win)
    [sweep]     command = ... ; parameter = map.omega ; values = linspace:0:1:101

Unknown sections and unknown keys are rejected outright rather than ignored:
a typo that silently falls back to a default is worse than an error.
"""

from __future__ import annotations

import configparser
import re
from fractions import Fraction
from typing import Optional

import numpy as np

from .distortion import ExactAffineAutomorphism
from .dynamics import BundleAutomorphism, InvariantMeasure
from .errors import ValidationError
from .families import TrigPolynomial, make_family
from .isotopy import Isotopy, shear_isotopy, skew_isotopy, straight_isotopy
from .seifert import RelationConvention, SeifertData
from .torus import BundlePoint, CohomologyClass, Coefficients, LiftedMap

_SECTION_KEYS = {
    "class": {"kind", "entries"},
    "map": {"family", "vector", "matrix", "omega", "k", "epsilon", "coeffs", "shift"},
    "point": {"x", "fiber"},
    "measure": {"kind", "point", "period", "samples", "weights"},
    "isotopy": {"kind", "vector", "epsilon", "omega", "coeffs"},
    "affine": {"matrix", "translation", "shift"},
    "generators": {"maps", "affine", "target", "powers"},
    "seminorm": {"mode"},
    "seifert": {"genus", "pairs", "convention"},
    "check": {"count", "dimensions"},
    "options": {"seed", "tolerance", "max-iterations", "grid"},
    "sweep": {
        "command",
        "parameter",
        "values",
        "parameter2",
        "values2",
        "parameter3",
        "values3",
    },
}

_FAMILY_KEYS = {
    "rigid": {"vector"},
    "affine": {"matrix", "vector"},
    "arnold": {"omega", "k"},
    "sinshear": {"epsilon"},
    "skew": {"omega", "coeffs"},
}

SWEEP_ROW_CAP = 100_000


def _base_section(name: str) -> str:
    return name.split(".", 1)[0]


class RunConfig:
    """A validated INI file plus override helpers."""

    def __init__(self, parser: configparser.ConfigParser, source: str = "<config>"):
        self.parser = parser
        self.source = source
        self._validate()

    def _validate(self) -> None:
        if self.parser.defaults():
            raise ValidationError(
                "[DEFAULT] is not supported; put keys in their own sections"
            )
        for section in self.parser.sections():
            base = _base_section(section)
            if base not in _SECTION_KEYS:
                raise ValidationError(f"unknown config section [{section}]")
            if base != section and base not in ("map", "affine"):
                raise ValidationError(
                    f"section [{section}] cannot be qualified; only map.* and affine.*"
                )
            allowed = _SECTION_KEYS[base]
            for key in self.parser[section]:
                if key not in allowed:
                    raise ValidationError(
                        f"unknown key {key!r} in [{section}] "
                        f"(allowed: {', '.join(sorted(allowed))})"
                    )

    # -- plumbing ----------------------------------------------------------

    def has(self, section: str) -> bool:
        return self.parser.has_section(section)

    def get(self, section: str, key: str, default: Optional[str] = None) -> Optional[str]:
        if self.parser.has_section(section) and key in self.parser[section]:
            return self.parser[section][key].strip()
        return default

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ValidationError(f"missing key {key!r} in section [{section}]")
        return value

    def set_override(self, section: str, key: str, value: str) -> None:
        if not self.parser.has_section(section):
            raise ValidationError(f"sweep targets missing section [{section}]")
        if key not in _SECTION_KEYS[_base_section(section)]:
            raise ValidationError(f"sweep targets unknown key {key!r} in [{section}]")
        self.parser[section][key] = value

    def clone(self) -> "RunConfig":
        fresh = _new_parser()
        fresh.read_dict({s: dict(self.parser[s]) for s in self.parser.sections()})
        return RunConfig(fresh, self.source)

    def echo(self) -> dict:
        """The raw key/value content, for report payloads and digests."""
        return {s: dict(self.parser[s]) for s in sorted(self.parser.sections())}


def _new_parser() -> configparser.ConfigParser:
    # '#' only: ';' separates matrix rows and sample points inside values
    return configparser.ConfigParser(
        interpolation=None,
        delimiters=("=",),
        inline_comment_prefixes=("#",),
        empty_lines_in_values=False,
    )


def load_config(path: str) -> RunConfig:
    parser = _new_parser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ValidationError(f"malformed config {path}: {exc}") from exc
    return RunConfig(parser, source=path)


def config_from_text(text: str, source: str = "<inline>") -> RunConfig:
    parser = _new_parser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"malformed config: {exc}") from exc
    return RunConfig(parser, source=source)


# -- scalar parsers ----------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")
_RATIONAL_RE = re.compile(r"^[+-]?\d+/\d+$")


def _tokens(text: str) -> list:
    return [t for t in re.split(r"[,\s]+", text.strip()) if t]


def parse_float(text: str, what: str) -> float:
    try:
        return float(Fraction(text)) if _RATIONAL_RE.match(text) else float(text)
    except ValueError as exc:
        raise ValidationError(f"{what}: not a number: {text!r}") from exc


def parse_int(text: str, what: str) -> int:
    if not _INT_RE.match(text.strip()):
        raise ValidationError(f"{what}: not an integer: {text!r}")
    return int(text)


def parse_shift(text: str, what: str = "shift"):
    """Fiber shifts keep exact integer / rational values when written so."""
    text = text.strip()
    if _INT_RE.match(text):
        return int(text)
    if _RATIONAL_RE.match(text):
        return Fraction(text)
    return parse_float(text, what)


def _exact_rational(text: str, what: str) -> Fraction:
    """Exact entries only: integers, p/q, or finite decimals."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(
            f"{what}: exact rational required (like 2, 1/3 or 0.25), got {text!r}"
        ) from exc


def _float_list(text: str, what: str) -> list:
    return [parse_float(t, what) for t in _tokens(text)]


def _int_list(text: str, what: str) -> list:
    return [parse_int(t, what) for t in _tokens(text)]


def _matrix_rows(text: str, what: str, parse) -> list:
    rows = [r for r in text.split(";") if r.strip()]
    parsed = [[parse(t, what) for t in _tokens(r)] for r in rows]
    if not parsed or any(len(r) != len(parsed[0]) for r in parsed):
        raise ValidationError(f"{what}: ragged or empty matrix")
    return parsed


# -- object builders ---------------------------------------------------------


def build_class(cfg: RunConfig) -> CohomologyClass:
    if not cfg.has("class"):
        raise ValidationError("config needs a [class] section")
    kind = cfg.get("class", "kind", "integer").lower()
    if kind not in ("integer", "real"):
        raise ValidationError(f"[class] kind must be integer or real, got {kind!r}")
    entries_text = cfg.require("class", "entries")
    if kind == "integer":
        entries = tuple(_int_list(entries_text, "[class] entries"))
        return CohomologyClass(entries, Coefficients.INTEGER)
    entries = tuple(_float_list(entries_text, "[class] entries"))
    return CohomologyClass(entries, Coefficients.REAL)


def build_lifted_map(cfg: RunConfig, section: str) -> LiftedMap:
    if not cfg.has(section):
        raise ValidationError(f"config needs a [{section}] section")
    family = cfg.require(section, "family").lower()
    if family not in _FAMILY_KEYS:
        raise ValidationError(
            f"[{section}] family must be one of {', '.join(sorted(_FAMILY_KEYS))}"
        )
    present = {k for k in cfg.parser[section] if k not in ("family", "shift")}
    stray = present - _FAMILY_KEYS[family]
    if stray:
        raise ValidationError(
            f"[{section}] keys {sorted(stray)} do not belong to family {family!r}"
        )
    where = f"[{section}]"
    if family == "rigid":
        return make_family("rigid", vector=_float_list(cfg.require(section, "vector"), where))
    if family == "affine":
        return make_family(
            "affine",
            matrix=_matrix_rows(cfg.require(section, "matrix"), where, parse_int),
            vector=_float_list(cfg.require(section, "vector"), where),
        )
    if family == "arnold":
        return make_family(
            "arnold",
            omega=parse_float(cfg.require(section, "omega"), where),
            k=parse_float(cfg.require(section, "k"), where),
        )
    if family == "sinshear":
        return make_family("sinshear", epsilon=parse_float(cfg.require(section, "epsilon"), where))
    coeffs = _float_list(cfg.require(section, "coeffs"), where)
    if not coeffs:
        raise ValidationError(f"{where} coeffs must be nonempty (constant first)")
    return make_family(
        "skew", omega=parse_float(cfg.require(section, "omega"), where), coeffs=coeffs
    )


def build_bundle_map(cfg: RunConfig, section: str = "map") -> BundleAutomorphism:
    lift = build_lifted_map(cfg, section)
    shift_text = cfg.get(section, "shift")
    shift = parse_shift(shift_text, f"[{section}] shift") if shift_text else 0
    return BundleAutomorphism(lift, shift)


def build_point(cfg: RunConfig, dimension: int):
    if not cfg.has("point"):
        return np.zeros(dimension)
    x = np.asarray(_float_list(cfg.require("point", "x"), "[point] x"), dtype=float)
    if x.shape != (dimension,):
        raise ValidationError(
            f"[point] x has {x.shape[0]} coordinates; the class lives on T^{dimension}"
        )
    fiber_text = cfg.get("point", "fiber")
    if fiber_text is None:
        return x
    return BundlePoint(x, parse_shift(fiber_text, "[point] fiber"))


def build_measure(cfg: RunConfig) -> InvariantMeasure:
    if not cfg.has("measure"):
        return InvariantMeasure.lebesgue()
    kind = cfg.get("measure", "kind", "lebesgue").lower().replace("-", "_")
    if kind == "lebesgue":
        return InvariantMeasure.lebesgue()
    if kind == "dirac_orbit":
        point = _float_list(cfg.require("measure", "point"), "[measure] point")
        period = parse_int(cfg.require("measure", "period"), "[measure] period")
        return InvariantMeasure.dirac_orbit(point, period)
    if kind == "empirical":
        samples = _matrix_rows(cfg.require("measure", "samples"), "[measure] samples", parse_float)
        weights_text = cfg.get("measure", "weights")
        weights = _float_list(weights_text, "[measure] weights") if weights_text else None
        return InvariantMeasure.empirical(samples, weights)
    raise ValidationError(
        f"[measure] kind must be lebesgue, dirac-orbit or empirical, got {kind!r}"
    )


def build_isotopy(cfg: RunConfig) -> Isotopy:
    if not cfg.has("isotopy"):
        raise ValidationError("config needs an [isotopy] section")
    kind = cfg.get("isotopy", "kind", "straight").lower()
    where = "[isotopy]"
    if kind == "straight":
        return straight_isotopy(_float_list(cfg.require("isotopy", "vector"), where))
    if kind == "shear":
        return shear_isotopy(parse_float(cfg.require("isotopy", "epsilon"), where))
    if kind == "skew":
        coeffs = _float_list(cfg.require("isotopy", "coeffs"), where)
        poly = TrigPolynomial(coeffs[0], tuple(coeffs[1::2]), tuple(coeffs[2::2]))
        return skew_isotopy(parse_float(cfg.require("isotopy", "omega"), where), poly)
    raise ValidationError(f"{where} kind must be straight, shear or skew, got {kind!r}")


def build_affine(cfg: RunConfig, name: str) -> ExactAffineAutomorphism:
    section = f"affine.{name}"
    if not cfg.has(section):
        raise ValidationError(f"config needs a [{section}] section")
    where = f"[{section}]"
    matrix = _matrix_rows(cfg.require(section, "matrix"), where, parse_int)
    translation = [
        _exact_rational(t, where) for t in _tokens(cfg.require(section, "translation"))
    ]
    shift_text = cfg.get(section, "shift")
    shift = _exact_rational(shift_text, where) if shift_text else Fraction(0)
    return ExactAffineAutomorphism(
        tuple(tuple(r) for r in matrix), tuple(translation), shift
    )


def generator_names(cfg: RunConfig, key: str) -> list:
    text = cfg.get("generators", key)
    return _tokens(text) if text else []


def build_bundle_generators(cfg: RunConfig) -> list:
    names = generator_names(cfg, "maps")
    if not names:
        raise ValidationError("[generators] maps must name at least one [map.NAME]")
    return [(name, build_bundle_map(cfg, f"map.{name}")) for name in names]


def build_affine_generators(cfg: RunConfig) -> list:
    names = generator_names(cfg, "affine")
    if not names:
        raise ValidationError("[generators] affine must name at least one [affine.NAME]")
    return [(name, build_affine(cfg, name)) for name in names]


_PAIR_TEXT_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def build_seifert(cfg: RunConfig):
    if not cfg.has("seifert"):
        raise ValidationError("config needs a [seifert] section")
    genus = parse_int(cfg.require("seifert", "genus"), "[seifert] genus")
    pairs_text = cfg.require("seifert", "pairs")
    pairs = [(int(a), int(b)) for a, b in _PAIR_TEXT_RE.findall(pairs_text)]
    leftover = _PAIR_TEXT_RE.sub("", pairs_text).strip(" \t,")
    if leftover or not pairs:
        raise ValidationError(
            f"[seifert] pairs must be a list like (2,1) (2,-1); got {pairs_text!r}"
        )
    data = SeifertData(genus, tuple(pairs))
    conv_text = cfg.get("seifert", "convention")
    convention = None
    if conv_text:
        try:
            convention = RelationConvention(conv_text.strip().lower())
        except ValueError as exc:
            raise ValidationError(
                f"[seifert] convention must be h-positive or h-negative, got {conv_text!r}"
            ) from exc
    return data, convention


# -- sweep expansion ---------------------------------------------------------

_LINSPACE_RE = re.compile(r"^linspace:([^:]+):([^:]+):(\d+)$")


def _expand_values(text: str, what: str) -> list:
    text = text.strip()
    m = _LINSPACE_RE.match(text)
    if m:
        lo = parse_float(m.group(1), what)
        hi = parse_float(m.group(2), what)
        count = int(m.group(3))
        if count < 1:
            raise ValidationError(f"{what}: linspace needs at least one point")
        return [repr(float(v)) for v in np.linspace(lo, hi, count)]
    values = _tokens(text)
    if not values:
        raise ValidationError(f"{what}: empty value list")
    return values


def parse_sweep(cfg: RunConfig):
    """-> (command, [(section, key, [value strings]), ...]) in declared order."""
    if not cfg.has("sweep"):
        raise ValidationError("config needs a [sweep] section")
    command = cfg.require("sweep", "command").strip()
    axes = []
    for suffix in ("", "2", "3"):
        param = cfg.get("sweep", f"parameter{suffix}")
        values = cfg.get("sweep", f"values{suffix}")
        if param is None and values is None:
            continue
        if param is None or values is None:
            raise ValidationError(
                f"[sweep] parameter{suffix} and values{suffix} must come together"
            )
        if "." not in param:
            raise ValidationError(
                f"[sweep] parameter must be section.key, got {param!r}"
            )
        section, key = param.rsplit(".", 1)
        axes.append((section, key, _expand_values(values, f"[sweep] values{suffix}")))
    if not axes:
        raise ValidationError("[sweep] needs at least parameter/values")
    rows = 1
    for _, _, vals in axes:
        rows *= len(vals)
    if rows > SWEEP_ROW_CAP:
        raise ValidationError(
            f"sweep would produce {rows} rows; the cap is {SWEEP_ROW_CAP}"
        )
    return command, axes
