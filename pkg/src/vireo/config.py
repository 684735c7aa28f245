"""One INI config file for the whole pipeline, plus client builders.

Sections mirror the subsystems: ``[verify] [track] [judge] [generator]
[embedder] [grounder] [eval] [tpo]``.  Keys are the corresponding dataclass
field names; unknown sections or keys are config errors so typos surface
immediately.  Command-line flags take precedence over file values.

Client sections select a backend via ``endpoint``: when present an HTTP
client is built, otherwise the built-in substitute is used (analytic
embedder, color grounder, ground-truth replay generator, no judge).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .core import ConfigError, Dataset
from .harness import EvalConfig, Strategy
from .modelio import (
    ColorGrounder,
    Embedder,
    GeneratorClient,
    Grounder,
    HttpEmbedder,
    HttpGenerator,
    HttpGrounder,
    HttpJudge,
    JudgeClient,
    OracleGenerator,
    PatchHistogramEmbedder,
)
from .track import TrackConfig
from .tpo import TpoConfig
from .verify import VerifyConfig

__all__ = [
    "AppConfig",
    "build_embedder",
    "build_generator",
    "build_grounder",
    "build_judge",
    "load_config",
]

_SECTIONS = (
    "verify",
    "track",
    "judge",
    "generator",
    "embedder",
    "grounder",
    "eval",
    "tpo",
)

# keys accepted in the client sections, beyond the shared HTTP ones
_HTTP_KEYS = {
    "endpoint": str,
    "model": str,
    "api_key_env": str,
    "timeout": float,
    "max_retries": int,
    "retry_base_delay": float,
    "max_in_flight": int,
}
_CLIENT_KEYS: dict[str, dict[str, type]] = {
    "judge": dict(_HTTP_KEYS),
    "generator": {**_HTTP_KEYS, "n_frames": int, "noise": str},
    "embedder": {**_HTTP_KEYS, "expected_dim": int},
    "grounder": {
        **_HTTP_KEYS,
        "min_area": int,
        "min_saturation": float,
        "min_value": float,
    },
}


@dataclass(frozen=True)
class AppConfig:
    """Everything the pipeline needs, parsed and validated."""

    verify: VerifyConfig = field(default_factory=VerifyConfig)
    track: TrackConfig = field(default_factory=TrackConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    tpo: TpoConfig = field(default_factory=TpoConfig)
    judge: Mapping[str, Any] = field(default_factory=dict)
    generator: Mapping[str, Any] = field(default_factory=dict)
    embedder: Mapping[str, Any] = field(default_factory=dict)
    grounder: Mapping[str, Any] = field(default_factory=dict)


def _parse_bands(text: str) -> tuple[tuple[float, float], ...]:
    """Hue bands like ``0-10, 350-360`` -> ((0.0, 10.0), (350.0, 360.0))."""
    bands = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if not sep:
            raise ConfigError(f"hue band {part!r} is not of the form lo-hi")
        bands.append((float(lo), float(hi)))
    if not bands:
        raise ConfigError("empty hue band list")
    return tuple(bands)


def _parse_resolution_policy(text: str) -> dict[str, tuple[int, int]]:
    """Policy like ``wan=832x480, sora=1280x720`` -> {model: (w, h)}."""
    policy = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        model, sep, size = part.partition("=")
        w, x, h = size.partition("x")
        if not sep or not x:
            raise ConfigError(
                f"resolution entry {part!r} is not of the form model=WxH"
            )
        policy[model.strip()] = (int(w), int(h))
    return policy


def _parse_seeds(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _coerce(section: str, key: str, raw: str, kind: Any) -> Any:
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"[{section}] {key} = {raw!r}: {exc}"
        ) from None


_SPECIAL_PARSERS = {
    ("verify", "red_hue_bands"): _parse_bands,
    ("verify", "blue_hue_bands"): _parse_bands,
    ("eval", "resolution_policy"): _parse_resolution_policy,
    ("eval", "strategy"): lambda raw: Strategy(raw.strip()),
    ("tpo", "seeds"): _parse_seeds,
}


def _section_kwargs(section: str, items: Mapping[str, str], cls) -> dict:
    """Coerce a config section's strings into the dataclass's field types."""
    types = {f.name: f.type for f in fields(cls)}
    kwargs: dict[str, Any] = {}
    for key, raw in items.items():
        if key not in types:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        special = _SPECIAL_PARSERS.get((section, key))
        if special is not None:
            try:
                kwargs[key] = special(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
            continue
        kind = {"int": int, "float": float, "str": str, "bool": bool}.get(
            str(types[key]).split(" ")[0], str
        )
        kwargs[key] = _coerce(section, key, raw, kind)
    return kwargs


def _client_kwargs(section: str, items: Mapping[str, str]) -> dict:
    allowed = _CLIENT_KEYS[section]
    kwargs: dict[str, Any] = {}
    for key, raw in items.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        kwargs[key] = _coerce(section, key, raw, allowed[key])
    return kwargs


def load_config(path: str | Path | None = None) -> AppConfig:
    """Parse the INI file (all-defaults when ``path`` is None)."""
    if path is None:
        return AppConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}] in {path}")

    def items(section: str) -> dict[str, str]:
        return dict(parser[section]) if parser.has_section(section) else {}

    try:
        return AppConfig(
            verify=VerifyConfig(**_section_kwargs("verify", items("verify"), VerifyConfig)),
            track=TrackConfig(**_section_kwargs("track", items("track"), TrackConfig)),
            eval=EvalConfig(**_section_kwargs("eval", items("eval"), EvalConfig)),
            tpo=TpoConfig(**_section_kwargs("tpo", items("tpo"), TpoConfig)),
            judge=_client_kwargs("judge", items("judge")),
            generator=_client_kwargs("generator", items("generator")),
            embedder=_client_kwargs("embedder", items("embedder")),
            grounder=_client_kwargs("grounder", items("grounder")),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# client builders
# ---------------------------------------------------------------------------


def build_judge(cfg: Mapping[str, Any]) -> JudgeClient | None:
    """HTTP judge when an endpoint is configured, else None."""
    if not cfg.get("endpoint"):
        return None
    return HttpJudge(**cfg)


def build_generator(
    cfg: Mapping[str, Any], dataset: Dataset | None = None
) -> GeneratorClient:
    """HTTP generator when an endpoint is configured, else ground-truth replay.

    The replay generator answers every request with the dataset's own
    ground-truth clip (optionally corrupted via ``noise``), which makes the
    full pipeline runnable — and testable end to end — without a video model.
    """
    cfg = dict(cfg)
    noise = cfg.pop("noise", None)
    if cfg.get("endpoint"):
        return HttpGenerator(**cfg)
    if dataset is None:
        raise ConfigError(
            "no generator endpoint configured and no dataset for replay"
        )
    return OracleGenerator(dataset, noise=noise)


def build_embedder(cfg: Mapping[str, Any]) -> Embedder:
    if cfg.get("endpoint"):
        return HttpEmbedder(**cfg)
    if cfg:
        raise ConfigError(
            "[embedder] keys require an endpoint; the built-in embedder "
            "takes no options"
        )
    return PatchHistogramEmbedder()


def build_grounder(cfg: Mapping[str, Any]) -> Grounder:
    cfg = dict(cfg)
    if cfg.get("endpoint"):
        for key in ("min_area", "min_saturation", "min_value"):
            cfg.pop(key, None)
        return HttpGrounder(**cfg)
    return ColorGrounder(**cfg)
