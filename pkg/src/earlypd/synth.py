"""Deterministic synthetic cohort generation.

Raw features are drawn per class from truncated normals whose parameters come
from a versioned JSON config (the packaged default holds invented, plausible
values; nothing is estimated from real subjects). The three CSF ratios are
derived from the sampled concentrations, never sampled directly, so every
generated record satisfies the schema's ratio-consistency invariant.

``separation`` interpolates both class means and class sds toward their
shared midpoint: 1.0 keeps the configured gap, 0.0 makes the two class
distributions identical, so a zero-separation cohort carries no label signal
at all.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .data import (
    FEATURE_NAMES,
    HEALTHY,
    PD,
    SubjectRecord,
    Dataset,
    compute_ratios,
    dataset_from_records,
    nine_digit,
)
from .errors import ConfigError, EmptyCohort
from .rng import derive_stream

# raw (sampled) features; ratios are derived afterwards
RAW_FEATURES = tuple(n for n in FEATURE_NAMES if not n.startswith("ratio_"))


@dataclass(frozen=True)
class FeatureParams:
    mean_healthy: float
    sd_healthy: float
    mean_pd: float
    sd_pd: float
    min: float
    max: float
    integer_flag: bool

    def at_separation(self, label: int, separation: float):
        """(mean, sd) for one class with the class gap scaled by separation."""
        mid_mean = (self.mean_healthy + self.mean_pd) / 2.0
        mid_sd = (self.sd_healthy + self.sd_pd) / 2.0
        mean = self.mean_pd if label == PD else self.mean_healthy
        sd = self.sd_pd if label == PD else self.sd_healthy
        return (mid_mean + separation * (mean - mid_mean),
                mid_sd + separation * (sd - mid_sd))


@dataclass(frozen=True)
class GeneratorParams:
    version: int
    features: dict
    # optional extension, off by default: [(feature_a, feature_b, rho), ...]
    # mixes the pre-truncation z-scores of feature_b with feature_a's
    correlation_pairs: tuple = ()

    @classmethod
    def from_json_dict(cls, obj: dict) -> "GeneratorParams":
        feats = {}
        for name in RAW_FEATURES:
            if name not in obj.get("features", {}):
                raise ConfigError(f"generator config is missing feature {name!r}")
            raw = dict(obj["features"][name])
            raw.pop("comment", None)
            try:
                feats[name] = FeatureParams(**raw)
            except TypeError as err:
                raise ConfigError(f"bad parameters for {name!r}: {err}") from None
        pairs = []
        for p in obj.get("correlation_pairs", []):
            if isinstance(p, dict):
                try:
                    a, b, rho = p["a"], p["b"], float(p["rho"])
                except KeyError as err:
                    raise ConfigError(f"correlation pair missing key {err}") from None
            else:
                a, b, rho = p
            if a not in RAW_FEATURES or b not in RAW_FEATURES:
                raise ConfigError(f"correlation pair ({a}, {b}) names unknown features")
            if RAW_FEATURES.index(a) >= RAW_FEATURES.index(b):
                raise ConfigError("correlation pair must list the earlier feature first")
            if not -1.0 <= rho <= 1.0:
                raise ConfigError(f"correlation {rho} outside [-1, 1]")
            pairs.append((a, b, rho))
        return cls(int(obj.get("version", 1)), feats, tuple(pairs))

    def to_json_dict(self) -> dict:
        return {
            "version": self.version,
            "features": {
                name: {
                    "mean_healthy": fp.mean_healthy, "sd_healthy": fp.sd_healthy,
                    "mean_pd": fp.mean_pd, "sd_pd": fp.sd_pd,
                    "min": fp.min, "max": fp.max, "integer_flag": fp.integer_flag,
                }
                for name, fp in self.features.items()
            },
            "correlation_pairs": [{"a": a, "b": b, "rho": rho}
                                  for a, b, rho in self.correlation_pairs],
        }


def load_params(path=None) -> GeneratorParams:
    """Generator parameters from a JSON file, or the packaged defaults."""
    if path is None:
        text = resources.files("earlypd").joinpath("default_cohort.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return GeneratorParams.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class CohortSpec:
    n_healthy: int = 184
    n_pd: int = 402
    separation: float = 1.0
    seed: int = 42
    params: GeneratorParams | None = None

    def __post_init__(self):
        if self.n_healthy < 0 or self.n_pd < 0:
            raise ConfigError("cohort sizes cannot be negative")
        if self.separation < 0:
            raise ConfigError("separation cannot be negative")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def generate(spec: CohortSpec) -> Dataset:
    """Sample a labeled cohort. Identical specs give identical datasets.

    Healthy records come first, then PD; ids run SYN00001 upward. One stream
    derived from (seed, "generate") drives all draws, record by record and
    feature by feature in schema order. Float features are snapped to their
    9-significant-digit CSV rendering so export / ingest round-trips exactly.
    """
    if spec.n_healthy + spec.n_pd == 0:
        raise EmptyCohort("asked to generate zero records")
    params = spec.params if spec.params is not None else load_params()
    mixers = {b: (a, rho) for a, b, rho in params.correlation_pairs}
    stream = derive_stream(spec.seed, "generate")
    records = []
    counter = 0
    for label, count in ((HEALTHY, spec.n_healthy), (PD, spec.n_pd)):
        for _ in range(count):
            counter += 1
            values = {}
            zscores = {}
            for name in RAW_FEATURES:
                p = params.features[name]
                mean, sd = p.at_separation(label, spec.separation)
                if name in mixers:
                    # correlated path: mix z-scores, clamp instead of rejecting
                    partner, rho = mixers[name]
                    z = rho * zscores[partner] + (1 - rho ** 2) ** 0.5 * stream.normal()
                    x = min(max(mean + sd * z, p.min), p.max)
                else:
                    x = stream.truncated_normal(mean, sd, p.min, p.max)
                    zscores[name] = (x - mean) / sd if sd else 0.0
                if p.integer_flag:
                    x = float(min(max(_round_half_up(x), int(p.min)), int(p.max)))
                else:
                    x = nine_digit(x)
                values[name] = x
            ratios = compute_ratios(values["csf_abeta42"], values["csf_ttau"],
                                    values["csf_ptau181"])
            rec = SubjectRecord(
                subject_id=f"SYN{counter:05d}",
                upsit_total=int(values["upsit_total"]),
                rbdsq_total=int(values["rbdsq_total"]),
                csf_abeta42=values["csf_abeta42"],
                csf_alpha_syn=values["csf_alpha_syn"],
                csf_ptau181=values["csf_ptau181"],
                csf_ttau=values["csf_ttau"],
                ratio_ttau_abeta=nine_digit(ratios[0]),
                ratio_ptau_abeta=nine_digit(ratios[1]),
                ratio_ptau_ttau=nine_digit(ratios[2]),
                sbr_caudate_left=values["sbr_caudate_left"],
                sbr_caudate_right=values["sbr_caudate_right"],
                sbr_putamen_left=values["sbr_putamen_left"],
                sbr_putamen_right=values["sbr_putamen_right"],
                label=label,
            )
            records.append(rec)
    return dataset_from_records(records)
