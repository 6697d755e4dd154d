from __future__ import annotations

"""RunConfig: the complete, serialisable description of one run.

Task-specific defaults are filled in for every key the caller did not set,
so ``RunConfig(task="reconstruct")`` already carries the reconstruction
hyperparameters.  The text form is a flat ``key=value`` file::

    # comments and blank lines are ignored
    task=classify
    pool=gmt
    sweep=1000,2000,4000
"""

from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from gmtpool.errors import ConfigError
from gmtpool.settings import settings

Task = Literal["classify", "reconstruct", "bench-memory", "bench-time"]

RECONSTRUCT_POOLS = ("gmpool", "topk", "cluster")

_TASK_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "classify": {
        "pool": "gmt",
        "hidden": 128,
        "heads": 4,
        "lr": 5e-4,
        "batch_size": 128,
        "weight_decay": 1e-4,
        "dropout": 0.5,
        "attention_dropout": 0.5,
        "max_epochs": 500,
        "patience": 50,
    },
    "reconstruct": {
        "pool": "gmpool",
        "hidden": 32,
        "heads": 1,
        "lr": 5e-3,
        "weight_decay": 0.0,
        "dropout": 0.0,
        "max_epochs": 10000,
        "patience": 1000,
    },
    "bench-memory": {
        "hidden": 32,
        "heads": 1,
        "sweep": [1000, 2000, 4000, 8000],
        "methods": ["gmt", "cluster"],
        "dropout": 0.0,
    },
    "bench-time": {
        "hidden": 32,
        "heads": 1,
        "sweep": [100, 200, 400, 800],
        "methods": ["gmt", "cluster"],
        "dropout": 0.0,
    },
}

_LIST_FIELDS = ("sweep", "methods")
_OPTIONAL_FIELDS = ("data_dir", "degree_cap", "out")


class RunConfig(BaseModel):
    """Hyperparameters and task description; ``(config, seed)`` reproduces a run."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    task: Task = Field("classify", description="Which harness to run")

    # data
    dataset: str = Field("MUTAG", description="TU dataset name (classify)")
    data_dir: Optional[str] = Field(None, description="Directory holding <dataset>/ folders; defaults to GMT_DATA_DIR")
    degree_cap: Optional[int] = Field(None, ge=0, description="Degree one-hot cap for datasets without node labels")
    graph: Literal["ring", "grid"] = Field("ring", description="Synthetic graph (reconstruct)")
    n: int = Field(64, ge=3, description="Ring size")
    rows: int = Field(8, ge=2, description="Grid rows")
    cols: int = Field(8, ge=2, description="Grid columns")

    # model
    pool: str = Field("gmt", description="READOUT / pooling method")
    ratio: float = Field(0.25, gt=0.0, le=1.0, description="Pooling ratio")
    hidden: int = Field(128, gt=0, description="Hidden width d")
    heads: int = Field(4, gt=0, description="Attention heads")
    num_layers: int = Field(3, gt=0, description="Encoder GCN layers")
    jk: Literal["concat", "last"] = Field("concat", description="Jumping-knowledge mode")
    gcn_bias: bool = Field(True, description="Bias terms in encoder GCN layers")
    message_passing: bool = Field(True, description="False swaps the GCN encoder for a row-wise linear map")
    scale_attention: bool = Field(True, description="Divide attention scores by sqrt(d)")
    attention_dropout: float = Field(0.0, ge=0.0, lt=1.0, description="Dropout on attention weights")
    assignment_mode: Literal["query", "key"] = Field("query", description="Softmax axis for assignment extraction")

    # optimisation
    lr: float = Field(5e-4, gt=0.0)
    batch_size: int = Field(128, gt=0)
    weight_decay: float = Field(1e-4, ge=0.0)
    decoupled_weight_decay: bool = Field(False, description="AdamW-style decay instead of coupled L2")
    dropout: float = Field(0.5, ge=0.0, lt=1.0, description="Dropout after encoder nonlinearities")
    max_epochs: int = Field(500, gt=0)
    patience: int = Field(50, gt=0)
    objective: Literal["x", "a", "both"] = Field("x", description="Reconstruction target")

    # protocol
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    seeds: int = Field(1, gt=0, description="Number of consecutive seeds starting at `seed`")
    folds: int = Field(10, ge=2)
    val_fraction: float = Field(0.1, ge=0.0, lt=1.0)

    # benchmarks
    sweep: List[int] = Field(default_factory=lambda: [1000, 2000, 4000, 8000])
    methods: List[str] = Field(default_factory=lambda: ["gmt", "cluster"])
    bench_k: int = Field(4, gt=0, description="Seed / cluster count in benchmarks")
    bench_batch: int = Field(50, gt=0, description="Graphs per batch in the time benchmark")
    repeats: int = Field(5, gt=0)

    jobs: int = Field(1, gt=0, description="Parallel worker processes")
    out: Optional[str] = Field(None, description="Run output directory")

    # ------------------------------------------------------------------
    # Validators
    # ------------------------------------------------------------------
    @model_validator(mode="before")
    @classmethod
    def _task_defaults(cls, data: Any) -> Any:  # noqa: D401 – pydantic hook
        if not isinstance(data, Mapping):
            return data
        merged = dict(_TASK_DEFAULTS.get(str(data.get("task", "classify")), {}))
        merged.update({k: v for k, v in data.items() if v is not None or k in _OPTIONAL_FIELDS})
        return merged

    @field_validator(*_LIST_FIELDS, mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator(*_OPTIONAL_FIELDS, mode="before")
    @classmethod
    def _blank_is_none(cls, value: Any) -> Any:
        return None if value == "" else value

    @field_validator("sweep")
    @classmethod
    def _positive_sweep(cls, value: List[int]) -> List[int]:
        if not value or any(n <= 0 for n in value):
            raise ValueError("sweep sizes must be positive")
        return value

    @model_validator(mode="after")
    def _check_pool(self):  # noqa: D401 – pydantic hook
        if self.task == "reconstruct" and self.pool not in RECONSTRUCT_POOLS:
            raise ValueError(f"reconstruct supports pool in {RECONSTRUCT_POOLS}, got {self.pool!r}")
        return self

    # ------------------------------------------------------------------
    # Construction / serialisation
    # ------------------------------------------------------------------
    @classmethod
    def build(cls, **values: Any) -> "RunConfig":
        """Validate *values*, turning pydantic errors into :class:`ConfigError`."""
        try:
            return cls(**values)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first.get("loc", ())) or "pool"
            raise ConfigError(f"invalid value for {field}: {first.get('msg')}", field=field) from None

    @classmethod
    def from_text(cls, text: str, **overrides: Any) -> "RunConfig":
        values: Dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}", field=line)
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.build(**values)

    def to_text(self) -> str:
        lines = []
        for key, value in self.model_dump().items():
            if value is None:
                rendered = ""
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, float):
                rendered = repr(value)
            elif isinstance(value, list):
                rendered = ",".join(str(v) for v in value)
            else:
                rendered = str(value)
            lines.append(f"{key}={rendered}")
        return "\n".join(lines) + "\n"

    # ------------------------------------------------------------------
    # Derived values
    # ------------------------------------------------------------------
    @property
    def seed_list(self) -> List[int]:
        return [self.seed + i for i in range(self.seeds)]

    def pooled_k(self, n_max: int) -> int:
        """``max(1, ceil(ratio * n_max))``: the fixed seed count of the first pool."""
        from gmtpool.pooling.baselines import keep_count

        return keep_count(self.ratio, max(1, n_max))
