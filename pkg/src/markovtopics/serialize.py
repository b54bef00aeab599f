"""File formats: model files, corpora, ground truth, scores and labels.

Model files are self-describing JSON: dimensions, hyperparameters, matrices
in row-major order with explicit shapes, a format-version field and the
matrix orientation ("column = conditioning variable") spelled out.  Corpus
files are plain text, one document per line of whitespace-separated integer
word ids; blank lines are forbidden.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gibbs import point_estimate
from .model import (
    Corpus,
    DataError,
    Document,
    Hyperparams,
    ModelParams,
    ModelSpec,
    SufficientCounts,
)
from .vb import PosteriorHyperparams

FORMAT_VERSION = 1
ORIENTATION = "column-conditional"


def _matrix_to_json(mat: np.ndarray) -> dict:
    mat = np.asarray(mat)
    return {"shape": list(mat.shape), "data": mat.ravel(order="C").tolist()}


def _matrix_from_json(obj: dict) -> np.ndarray:
    return np.asarray(obj["data"], dtype=float).reshape(obj["shape"])


def _params_to_json(params: ModelParams) -> dict:
    return {name: _matrix_to_json(getattr(params, name))
            for name in ("phi", "theta", "xi", "pi")}


def _params_from_json(obj: dict) -> ModelParams:
    return ModelParams(**{name: _matrix_from_json(obj[name])
                          for name in ("phi", "theta", "xi", "pi")})


def save_model(path, spec: ModelSpec, hyper: Hyperparams, params: ModelParams,
               algorithm: str, posterior: PosteriorHyperparams | None = None,
               samples: list[SufficientCounts] | None = None,
               metadata: dict | None = None) -> None:
    """Write a model file; the posterior section (VB) or count samples (GS)
    enable Monte Carlo scoring without refitting."""
    doc = {
        "format_version": FORMAT_VERSION,
        "orientation": ORIENTATION,
        "algorithm": algorithm,
        "spec": {
            "num_words": spec.num_words,
            "num_topics": spec.num_topics,
            "num_behaviours": spec.num_behaviours,
        },
        "hyperparams": {name: np.asarray(getattr(hyper, name)).tolist()
                        for name in ("alpha", "beta", "gamma", "eta")},
        "params": _params_to_json(params),
        "metadata": metadata or {},
    }
    if posterior is not None:
        doc["posterior"] = {name: _matrix_to_json(getattr(posterior, name))
                            for name in ("beta_t", "alpha_t", "eta_t", "gamma_t")}
    if samples is not None:
        doc["samples"] = [
            {name: _matrix_to_json(getattr(c, name))
             for name in ("n_xy", "n_yz", "n_zz", "n_z1")}
            for c in samples
        ]
    Path(path).write_text(json.dumps(doc))


class LoadedModel:
    """A parsed model file."""

    def __init__(self, doc: dict):
        if doc.get("format_version") != FORMAT_VERSION:
            raise DataError(f"unsupported model format version {doc.get('format_version')!r}")
        self.algorithm = doc["algorithm"]
        s = doc["spec"]
        self.spec = ModelSpec(s["num_words"], s["num_topics"], s["num_behaviours"])
        h = doc["hyperparams"]
        self.hyper = Hyperparams(**{k: np.asarray(v, dtype=float) for k, v in h.items()})
        self.params = _params_from_json(doc["params"])
        self.metadata = doc.get("metadata", {})
        self.posterior = None
        if "posterior" in doc:
            p = doc["posterior"]
            self.posterior = PosteriorHyperparams(
                **{name: _matrix_from_json(p[name])
                   for name in ("beta_t", "alpha_t", "eta_t", "gamma_t")})
        self.count_samples = None
        if "samples" in doc:
            self.count_samples = [
                SufficientCounts(
                    n_xy=_matrix_from_json(c["n_xy"]),
                    n_yz=_matrix_from_json(c["n_yz"]),
                    n_zz=_matrix_from_json(c["n_zz"]),
                    n_z1=_matrix_from_json(c["n_z1"]),
                    mode="integer",
                )
                for c in doc["samples"]
            ]

    def sample_params(self) -> list[ModelParams] | None:
        """Per-sample point estimates from stored GS count samples."""
        if self.count_samples is None:
            return None
        return [point_estimate(c, self.hyper) for c in self.count_samples]


def load_model(path) -> LoadedModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from exc
    return LoadedModel(doc)


def write_corpus(path, corpus: Corpus) -> None:
    lines = [" ".join(str(int(w)) for w in doc.words) for doc in corpus.documents]
    Path(path).write_text("\n".join(lines) + "\n")


def read_corpus(path, spec: ModelSpec) -> Corpus:
    text = Path(path).read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    docs = []
    for t, line in enumerate(lines, start=1):
        if line.strip() == "":
            raise DataError(f"blank line at document position {t} in {path}")
        try:
            words = np.asarray([int(tok) for tok in line.split()], dtype=np.int64)
        except ValueError as exc:
            raise DataError(f"non-integer word id at document {t} in {path}") from exc
        docs.append(Document(words=words, timestamp=t))
    return Corpus(documents=docs, spec=spec)


def write_ground_truth(path, dataset) -> None:
    """Sidecar file with the generator's parameters and hidden assignments."""
    doc = {
        "format_version": FORMAT_VERSION,
        "true_params": _params_to_json(dataset.true_params),
        "true_behaviours": np.asarray(dataset.true_behaviours).tolist(),
        "true_topics": [np.asarray(y).tolist() for y in dataset.true_topics],
    }
    Path(path).write_text(json.dumps(doc))


def read_ground_truth(path) -> dict:
    doc = json.loads(Path(path).read_text())
    return {
        "true_params": _params_from_json(doc["true_params"]),
        "true_behaviours": np.asarray(doc["true_behaviours"], dtype=np.int64),
        "true_topics": [np.asarray(y, dtype=np.int64) for y in doc["true_topics"]],
    }


def write_scores(path, scored, localisations=None) -> None:
    """Line-delimited score records: one JSON object per document."""
    lines = []
    for rec in scored:
        obj = {
            "index": rec.index,
            "length": rec.length,
            "log_lik": rec.log_lik,
            "score": rec.score,
            "evaluated": rec.evaluated,
        }
        if localisations is not None and rec.index in localisations:
            obj["localisation"] = localisations[rec.index]
        lines.append(json.dumps(obj))
    Path(path).write_text("\n".join(lines) + "\n")


def read_scores(path) -> list[dict]:
    records = []
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if line.strip() == "":
            raise DataError(f"blank line {i} in score file {path}")
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise DataError(f"bad score record on line {i} of {path}") from exc
    return records


def read_labels(path) -> np.ndarray:
    """One boolean (0/1) per line."""
    values = []
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        tok = line.strip()
        if tok not in ("0", "1"):
            raise DataError(f"label line {i} in {path} must be 0 or 1, got {tok!r}")
        values.append(tok == "1")
    return np.asarray(values, dtype=bool)


def write_pr_curve(path, curve: np.ndarray) -> None:
    lines = ["recall,precision"]
    lines += [f"{r},{p}" for r, p in np.asarray(curve)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_events(path):
    """Event CSV: frame,cell_x,cell_y,dir with a header row."""
    from .ingest import DIRECTIONS, MotionEvent

    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip().lower() != "frame,cell_x,cell_y,dir":
        raise DataError(f"event file {path} must start with header 'frame,cell_x,cell_y,dir'")
    events = []
    for i, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise DataError(f"line {i} of {path}: expected 4 comma-separated fields")
        try:
            frame, cx, cy = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise DataError(f"line {i} of {path}: non-integer field") from exc
        if parts[3] not in DIRECTIONS:
            raise DataError(f"line {i} of {path}: unknown direction {parts[3]!r}")
        events.append(MotionEvent(frame=frame, cell_x=cx, cell_y=cy, direction=parts[3]))
    return events
