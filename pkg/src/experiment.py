# src/experiment.py
"""재현 가능한 공간 민감도 실험 실행기

실험점(파라미터 그리드의 완전 요인 조합) x 반복마다 seed = mix(baseSeed, 점 번호, 반복)
으로 생성 -> 교란 -> (선택) Schelling -> 지표 파이프라인을 돌리고 한 행씩 기록한다.
"""
import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.config import RuntimeConfig
from src.exceptions import ConfigError, SpatialGenError
from src.gridgen import (
    BlocksParams,
    KernelMixtureParams,
    PercolationParams,
    ReactionDiffusionParams,
    generate_blocks,
    generate_kernel_mixture,
    generate_percolation,
    generate_reaction_diffusion,
)
from src.indicators import (
    GRID_INDICATORS,
    NETWORK_INDICATORS,
    POINT_INDICATORS,
    building_morphology,
    network_summary,
    point_moments,
)
from src.models import Grid, IndicatorRecord, Node, PointSet, SpatialNetwork
from src.netgen import (
    CitySystemParams,
    CostBenefitParams,
    GravityParams,
    city_nodes,
    generate_city_system,
    generate_cost_benefit_network,
    generate_gravity_network,
    generate_random_planar,
    generate_tree_network,
    substrate_network,
)
from src.perturb import delete_links, delete_nodes, jitter_nodes, perturb_grid_noise, perturb_grid_poisson
from src.pointgen import sample_homogeneous_poisson, sample_inhomogeneous_poisson
from src.renderers import write_csv
from src.rng import MASK64, RngStream, mix_seed
from src.schelling import init_schelling, run_schelling, segregation_index
from src.slime_mould import SlimeMouldParams, generate_slime_mould

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = [0.0, 0.0, 1.0, 1.0]
MODEL_INDICATORS = ["segregationInitial", "segregationFinal", "schellingSteps"]
MODEL_SUBSTREAM = 1000

Data = Union[Grid, SpatialNetwork, PointSet]

# 도시 체계 기반 생성기들이 공유하는 파라미터
CITY_DEFAULTS: Dict[str, Any] = {
    "nCities": 20,
    "largestPopulation": 1000.0,
    "zipfExponent": 1.0,
    "minSeparation": 0.0,
    "window": DEFAULT_WINDOW,
}


@dataclass(frozen=True)
class GeneratorKind:
    """생성기 종류: 데이터 유형, 기본 파라미터, 생성 함수"""

    data_type: str
    defaults: Dict[str, Any]
    build: Callable[[Dict[str, Any], RngStream], Data]


def _cities(p: Dict[str, Any], rng: RngStream) -> List[Node]:
    params = CitySystemParams(int(p["nCities"]), p["largestPopulation"], p["zipfExponent"], p["minSeparation"])
    return city_nodes(params, tuple(p["window"]), rng)


def _slime_mould(p: Dict[str, Any], rng: RngStream) -> SpatialNetwork:
    """도시 노드의 Delaunay 기질 위 점균류; 터미널은 인구 상위 nTerminals 도시"""
    substrate = substrate_network(_cities(p, rng.substream(0)))
    params = SlimeMouldParams(
        terminals=tuple(range(min(int(p["nTerminals"]), len(substrate.nodes)))),
        iterations=int(p["iterations"]),
        flow_amplification=p["flowAmplification"],
        decay=p["decay"],
        time_step=p["timeStep"],
        input_flow=p["inputFlow"],
        keep_threshold=p["keepThreshold"],
        weighted_terminals=bool(p["weightedTerminals"]),
    )
    return generate_slime_mould(substrate, params, rng.substream(1))


GENERATORS: Dict[str, GeneratorKind] = {
    "reaction_diffusion": GeneratorKind(
        "grid",
        {"size": 50, "totalPopulation": 10000.0, "growthRate": 100.0, "alpha": 1.5, "beta": 0.1, "diffusionSteps": 2},
        lambda p, rng: generate_reaction_diffusion(
            ReactionDiffusionParams(
                int(p["size"]), p["totalPopulation"], p["growthRate"], p["alpha"], p["beta"], int(p["diffusionSteps"])
            ),
            rng,
        ),
    ),
    "kernel_mixture": GeneratorKind(
        "grid",
        {"size": 50, "nCenters": 3, "maxValue": 100.0, "radius": 5.0, "kernel": "exponential"},
        lambda p, rng: generate_kernel_mixture(
            KernelMixtureParams(int(p["size"]), int(p["nCenters"]), p["maxValue"], p["radius"], p["kernel"]), rng
        ),
    ),
    "percolation": GeneratorKind(
        "grid",
        {"size": 50, "occupationProbability": 0.6, "keepLargestClusterOnly": False},
        lambda p, rng: generate_percolation(
            PercolationParams(int(p["size"]), p["occupationProbability"], bool(p["keepLargestClusterOnly"])), rng
        ),
    ),
    "blocks": GeneratorKind(
        "grid",
        {"size": 50, "nBlocks": 10, "minBlockSide": 2, "maxBlockSide": 8, "allowOverlap": True},
        lambda p, rng: generate_blocks(
            BlocksParams(
                int(p["size"]), int(p["nBlocks"]), int(p["minBlockSide"]), int(p["maxBlockSide"]), bool(p["allowOverlap"])
            ),
            rng,
        ),
    ),
    "tree": GeneratorKind(
        "network",
        {"n": 30, "window": DEFAULT_WINDOW},
        lambda p, rng: generate_tree_network(int(p["n"]), tuple(p["window"]), rng),
    ),
    "random_planar": GeneratorKind(
        "network",
        {"n": 30, "keepProbability": 0.5, "window": DEFAULT_WINDOW},
        lambda p, rng: generate_random_planar(int(p["n"]), p["keepProbability"], tuple(p["window"]), rng),
    ),
    "city_system": GeneratorKind(
        "network",
        {**CITY_DEFAULTS, "networkKind": "tree"},
        lambda p, rng: generate_city_system(
            CitySystemParams(
                int(p["nCities"]), p["largestPopulation"], p["zipfExponent"], p["minSeparation"], p["networkKind"]
            ),
            tuple(p["window"]),
            rng,
        ),
    ),
    "gravity": GeneratorKind(
        "network",
        {**CITY_DEFAULTS, "gamma": 1.0, "interactionRange": 0.35, "extraEdges": 20},
        lambda p, rng: generate_gravity_network(
            _cities(p, rng), GravityParams(p["gamma"], p["interactionRange"], int(p["extraEdges"]))
        ),
    ),
    "cost_benefit": GeneratorKind(
        "network",
        {**CITY_DEFAULTS, "costPerLength": 1000.0, "gamma": 0.5},
        lambda p, rng: generate_cost_benefit_network(
            _cities(p, rng), CostBenefitParams(p["costPerLength"], p["gamma"])
        ),
    ),
    "slime_mould": GeneratorKind(
        "network",
        {
            **CITY_DEFAULTS,
            "nTerminals": 5,
            "iterations": 100,
            "flowAmplification": 1.8,
            "decay": 1.0,
            "timeStep": 0.1,
            "inputFlow": 1.0,
            "keepThreshold": 0.01,
            "weightedTerminals": False,
        },
        _slime_mould,
    ),
    "poisson": GeneratorKind(
        "points",
        {"intensity": 100.0, "window": DEFAULT_WINDOW},
        lambda p, rng: sample_homogeneous_poisson(p["intensity"], tuple(p["window"]), rng),
    ),
    "inhomogeneous_poisson": GeneratorKind(
        "points",
        {"size": 20, "nCenters": 3, "maxValue": 50.0, "radius": 3.0, "kernel": "exponential"},
        lambda p, rng: sample_inhomogeneous_poisson(
            generate_kernel_mixture(
                KernelMixtureParams(int(p["size"]), int(p["nCenters"]), p["maxValue"], p["radius"], p["kernel"]),
                rng.substream(0),
            ),
            rng.substream(1),
        ),
    ),
}

# 교란 종류 -> (적용 가능한 데이터 유형, 필수 필드)
PERTURBATIONS: Dict[str, Tuple[str, Tuple[str, ...]]] = {
    "grid_noise": ("grid", ("sigma",)),
    "grid_poisson": ("grid", ("lambda", "delta")),
    "delete_nodes": ("network", ("k", "strategy")),
    "delete_links": ("network", ("k", "strategy")),
    "jitter": ("network", ("sigma",)),
}

# 교란 필드별 값의 종류 (기본값으로 표시)
PERTURBATION_FIELD_KINDS: Dict[str, Any] = {"sigma": 0.0, "lambda": 0.0, "delta": 0.0, "k": 0, "strategy": ""}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_kind(label: str, value: Any, like: Any) -> None:
    """설정 값이 기본값과 같은 종류의 JSON 값인지 검사"""
    if isinstance(like, bool):
        ok = isinstance(value, bool)
    elif _is_number(like):
        ok = _is_number(value)
    elif isinstance(like, str):
        ok = isinstance(value, str)
    else:
        ok = isinstance(value, (list, tuple)) and len(value) == len(like) and all(map(_is_number, value))
    if not ok:
        raise ConfigError(f"{label} has the wrong type: {value!r}")


@dataclass(frozen=True)
class GeneratorSpec:
    """생성기 하나와 파라미터 (직렬화 가능)"""

    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def definition(self) -> GeneratorKind:
        return GENERATORS[self.kind]

    def resolved(self, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        return {**self.definition.defaults, **self.params, **(overrides or {})}

    def build(self, overrides: Dict[str, Any], rng: RngStream) -> Data:
        return self.definition.build(self.resolved(overrides), rng)


@dataclass(frozen=True)
class ModelSpec:
    """Schelling 모델 설정"""

    tolerance: float = 0.5
    occupiedFraction: float = 0.8
    mixRatio: float = 0.5
    maxSteps: int = 10000


MODEL_FIELDS = tuple(ModelSpec.__dataclass_fields__)


@dataclass(frozen=True)
class ExperimentConfig:
    """실험 설정 (JSON 문서 하나가 실험 하나)"""

    generator: GeneratorSpec
    indicators: Tuple[str, ...]
    perturbations: Tuple[Dict[str, Any], ...] = ()
    model: Optional[ModelSpec] = None
    replications: int = 1
    base_seed: int = 0
    parameter_grid: Dict[str, List[Any]] = field(default_factory=dict)
    job_cap: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """JSON 객체에서 설정 로드 및 검증 (실행 전 모든 설정 에러를 잡음)"""
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        generator = data.get("generator")
        if not isinstance(generator, dict) or "kind" not in generator:
            raise ConfigError("generator must be an object with a 'kind'")

        model = data.get("model")
        try:
            model_spec = None if model is None else ModelSpec(**model)
        except TypeError as e:
            raise ConfigError(f"invalid model settings: {e}")

        config = cls(
            generator=GeneratorSpec(str(generator["kind"]), dict(generator.get("params", {}))),
            indicators=tuple(data.get("indicators", ())),
            perturbations=tuple(dict(p) for p in data.get("perturbations", ())),
            model=model_spec,
            replications=data.get("replications", 1),
            base_seed=data.get("baseSeed", 0),
            parameter_grid={str(k): list(v) for k, v in data.get("parameterGrid", {}).items()},
            job_cap=data.get("jobCap"),
        )
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError(f"{path}: cannot read config: {e.strerror}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e.msg}")
        return cls.from_dict(data)

    def with_overrides(
        self, replications: Optional[int] = None, base_seed: Optional[int] = None
    ) -> "ExperimentConfig":
        """CLI 플래그로 필드 덮어쓰기"""
        config = replace(
            self,
            replications=self.replications if replications is None else replications,
            base_seed=self.base_seed if base_seed is None else base_seed,
        )
        config.validate()
        return config

    # ========== Validation ==========

    @property
    def data_type(self) -> str:
        return GENERATORS[self.generator.kind].data_type

    def available_indicators(self) -> List[str]:
        names = {"grid": GRID_INDICATORS, "network": NETWORK_INDICATORS, "points": POINT_INDICATORS}
        available = list(names[self.data_type])
        if self.model is not None:
            available += MODEL_INDICATORS
        return available

    def validate(self, job_cap: Optional[int] = None) -> None:
        if self.generator.kind not in GENERATORS:
            raise ConfigError(
                f"unknown generator kind {self.generator.kind!r}; expected one of {sorted(GENERATORS)}"
            )
        defaults = self.generator.definition.defaults
        known_params = set(defaults)
        for name in self.generator.params:
            if name not in known_params:
                raise ConfigError(f"unknown parameter {name!r} for generator {self.generator.kind!r}")
            _check_kind(f"generator parameter {name!r}", self.generator.params[name], defaults[name])

        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications must be an integer >= 1")
        if not isinstance(self.base_seed, int) or not 0 <= self.base_seed <= MASK64:
            raise ConfigError("baseSeed must be a 64-bit unsigned integer")

        if self.model is not None and self.data_type != "grid":
            raise ConfigError("the Schelling model needs a grid generator")
        model_defaults = ModelSpec()
        if self.model is not None:
            for name in MODEL_FIELDS:
                _check_kind(f"model field {name!r}", getattr(self.model, name), getattr(model_defaults, name))

        for perturbation in self.perturbations:
            kind = perturbation.get("kind")
            if kind not in PERTURBATIONS:
                raise ConfigError(f"unknown perturbation {kind!r}")
            data_type, required = PERTURBATIONS[kind]
            if data_type != self.data_type:
                raise ConfigError(f"perturbation {kind!r} does not apply to {self.data_type} data")
            missing = [name for name in required if name not in perturbation]
            if missing:
                raise ConfigError(f"perturbation {kind!r} is missing {missing}")
            for name in required:
                _check_kind(f"perturbation {kind!r} field {name!r}", perturbation[name], PERTURBATION_FIELD_KINDS[name])

        if not self.indicators:
            raise ConfigError("at least one indicator is required")
        available = self.available_indicators()
        for name in self.indicators:
            if name not in available:
                raise ConfigError(f"unknown indicator {name!r}; available: {available}")

        model_fields = MODEL_FIELDS if self.model is not None else ()
        for name, values in self.parameter_grid.items():
            if name not in known_params and name not in model_fields:
                raise ConfigError(f"unknown parameter {name!r} in parameterGrid")
            if not values:
                raise ConfigError(f"parameterGrid[{name!r}] is empty")
            like = defaults[name] if name in known_params else getattr(model_defaults, name)
            for value in values:
                _check_kind(f"parameterGrid[{name!r}] value", value, like)

        cap = job_cap or self.job_cap
        if cap is not None and self.n_jobs > cap:
            raise ConfigError(f"experiment has {self.n_jobs} jobs, above the cap of {cap}")

    # ========== Design ==========

    def points(self) -> List[Dict[str, Any]]:
        """완전 요인 실험점 (설정 순서, 마지막 파라미터가 가장 빨리 변함)"""
        names = list(self.parameter_grid)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.parameter_grid.values())]

    @property
    def n_jobs(self) -> int:
        return len(self.points()) * self.replications


def _apply_perturbation(data: Data, perturbation: Dict[str, Any], rng: RngStream) -> Data:
    kind = perturbation["kind"]
    if kind == "grid_noise":
        return perturb_grid_noise(data, perturbation["sigma"], rng)
    if kind == "grid_poisson":
        return perturb_grid_poisson(data, perturbation["lambda"], perturbation["delta"], rng)
    if kind == "delete_nodes":
        return delete_nodes(data, int(perturbation["k"]), perturbation["strategy"], rng)
    if kind == "delete_links":
        return delete_links(data, int(perturbation["k"]), perturbation["strategy"], rng)
    return jitter_nodes(data, perturbation["sigma"], rng)


def _measure(data: Data) -> IndicatorRecord:
    if isinstance(data, Grid):
        return building_morphology(data)
    if isinstance(data, SpatialNetwork):
        return network_summary(data).to_record()
    return point_moments(data)


def run_pipeline(config: ExperimentConfig, point: Dict[str, Any], seed: int) -> IndicatorRecord:
    """생성 -> 교란 -> (선택) 모델 -> 지표 (한 반복)"""
    stream = RngStream(seed)
    generator_overrides = {k: v for k, v in point.items() if k in config.generator.definition.defaults}
    data = config.generator.build(generator_overrides, stream.substream(0))

    for i, perturbation in enumerate(config.perturbations):
        data = _apply_perturbation(data, perturbation, stream.substream(i + 1))

    record = _measure(data)
    if config.model is not None:
        model = replace(config.model, **{k: v for k, v in point.items() if k in MODEL_FIELDS})
        model_rng = stream.substream(MODEL_SUBSTREAM)
        state = init_schelling(data, model.occupiedFraction, model.mixRatio, model_rng, model.tolerance)
        initial = segregation_index(state)
        final_state, _ = run_schelling(state, int(model.maxSteps), model_rng)
        record.add("segregationInitial", initial)
        record.add("segregationFinal", segregation_index(final_state))
        record.add("schellingSteps", final_state.step)
    return record


def _run_job(
    config: ExperimentConfig, point_index: int, point: Dict[str, Any], replication: int
) -> Dict[str, Any]:
    seed = mix_seed(config.base_seed, point_index, replication)
    row: Dict[str, Any] = {**point, "replication": replication, "seed": seed}
    try:
        record = run_pipeline(config, point, seed)
        row.update({name: record[name] for name in config.indicators})
        row["error"] = ""
    except (SpatialGenError, ValueError, TypeError, ArithmeticError, np.linalg.LinAlgError) as e:
        logger.warning("point %d replication %d failed: %s", point_index, replication, e)
        row.update({name: np.nan for name in config.indicators})
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def run_experiment(config: ExperimentConfig, runtime: Optional[RuntimeConfig] = None) -> pd.DataFrame:
    """실험 전체 실행 -> 결과 표 (실험점 우선, 반복 다음 순서)"""
    runtime = runtime or RuntimeConfig.from_env()
    config.validate(job_cap=config.job_cap or runtime.job_cap)

    jobs = [
        (index, point, replication)
        for index, point in enumerate(config.points())
        for replication in range(config.replications)
    ]
    logger.info("실험 시작: %d jobs, workers=%d", len(jobs), runtime.jobs)

    if runtime.jobs > 1:
        rows = Parallel(n_jobs=runtime.jobs)(
            delayed(_run_job)(config, index, point, replication) for index, point, replication in jobs
        )
    else:
        rows = [_run_job(config, index, point, replication) for index, point, replication in jobs]

    columns = list(config.parameter_grid) + ["replication", "seed"] + list(config.indicators) + ["error"]
    failures = sum(1 for row in rows if row["error"])
    logger.info("실험 완료: %d rows, %d failed", len(rows), failures)
    return pd.DataFrame(rows, columns=columns)


def write_results(results: pd.DataFrame, path: Union[str, Path]) -> None:
    write_csv(results, path)
