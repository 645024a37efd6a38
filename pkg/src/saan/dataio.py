"""File formats: dataset exchange, checkpoints, and result records.

All formats are plain text. Floats are written with Python's shortest
round-trip repr, so every file reloads bit-exactly; rewriting the same
content produces byte-identical files (no timestamps, sorted JSON keys).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .centers import CenterBank
from .classifier import NormModel, Representative, RepresentativeSet
from .errors import InvalidConfigError, ManifestHashMismatchError
from .experiment import ExperimentResult, SessionRecord
from .model import LinearHead, TwoLayerExtractor
from .synthetic import FscilDataset, SessionData

DATASET_FORMAT = "saan-dataset v1"
CHECKPOINT_FORMAT = "saan-checkpoint v1"
RESULTS_FORMAT = "saan-results v1"
ABLATION_FORMAT = "saan-ablation v1"


# ---------------------------------------------------------------------------
# dataset exchange format: delimited text, one row per sample

def write_dataset(dataset: FscilDataset, path: str | Path) -> None:
    path = Path(path)
    cols = "\t".join(f"f{i}" for i in range(dataset.input_dim))
    lines = [
        f"# {DATASET_FORMAT}\tinput_dim={dataset.input_dim}",
        f"session\tlabel\tsplit\t{cols}",
    ]
    for session in dataset.sessions:
        for split, xs, ys in (("train", session.train_x, session.train_y),
                              ("test", session.test_x, session.test_y)):
            for row, label in zip(xs, ys):
                feats = "\t".join(repr(float(v)) for v in row)
                lines.append(f"{session.index}\t{int(label)}\t{split}\t{feats}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(path: str | Path) -> FscilDataset:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(f"# {DATASET_FORMAT}"):
        raise InvalidConfigError("dataset", f"not a {DATASET_FORMAT} file: {path}")
    input_dim = int(lines[0].rsplit("input_dim=", 1)[1])
    rows: dict[int, dict[str, list[tuple[int, list[float]]]]] = {}
    for line in lines[2:]:
        if not line:
            continue
        parts = line.split("\t")
        session, label, split = int(parts[0]), int(parts[1]), parts[2]
        feats = [float(v) for v in parts[3:]]
        if len(feats) != input_dim:
            raise InvalidConfigError("dataset", f"row has {len(feats)} features, header says {input_dim}")
        rows.setdefault(session, {"train": [], "test": []})[split].append((label, feats))

    sessions = []
    for index in sorted(rows):
        def unpack(pairs):
            if not pairs:
                return np.empty((0, input_dim)), np.empty(0, dtype=np.int64)
            ys = np.array([p[0] for p in pairs], dtype=np.int64)
            xs = np.array([p[1] for p in pairs], dtype=np.float64)
            return xs, ys

        train_x, train_y = unpack(rows[index]["train"])
        test_x, test_y = unpack(rows[index]["test"])
        sessions.append(SessionData(index, train_x, train_y, test_x, test_y))
    return FscilDataset(input_dim, sessions)


# ---------------------------------------------------------------------------
# checkpoint: model + bank + fitted classifier, JSON with exact floats

def _array(a: np.ndarray) -> list:
    return a.tolist()


def checkpoint_dict(result: ExperimentResult, manifest_hash: str) -> dict:
    state = result.state
    bank = None
    if state.bank is not None:
        bank = {
            "centers": _array(state.bank.centers),
            "assignment": {str(k): v for k, v in state.bank.assignment.items()},
            "free_indices": sorted(state.bank.free_indices),
        }
    norm_model = None
    if state.norm_model is not None:
        nm = state.norm_model
        norm_model = {
            "base_params": {str(k): list(v) for k, v in nm.base_params.items()},
            "shared_params": list(nm.shared_params) if nm.shared_params else None,
            "incremental_labels": sorted(nm.incremental_labels),
            "variance_floor": nm.variance_floor,
            "transform": nm.transform,
        }
    return {
        "format": CHECKPOINT_FORMAT,
        "manifest_hash": manifest_hash,
        "method": result.method,
        "seed": result.seed,
        "session_index": result.records[-1].session,
        "dims": {
            "input": state.extractor.input_dim,
            "hidden": state.extractor.w1.shape[1],
            "embedding": state.extractor.embedding_dim,
        },
        "extractor": {
            "w1": _array(state.extractor.w1),
            "b1": _array(state.extractor.b1),
            "w2": _array(state.extractor.w2),
            "b2": _array(state.extractor.b2),
            "layer1_trainable": state.extractor.layer1_trainable,
            "layer2_trainable": state.extractor.layer2_trainable,
        },
        "head": _array(state.head.weight),
        "bank": bank,
        "representatives": {
            str(label): {
                "vector": _array(np.asarray(rep.vector)),
                "session": rep.session,
                "count": rep.count,
            }
            for label, rep in result.state.reps.reps.items()
        },
        "norm_model": norm_model,
    }


def write_checkpoint(result: ExperimentResult, manifest_hash: str, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(checkpoint_dict(result, manifest_hash), sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )


def read_checkpoint(path: str | Path):
    """Rebuild (extractor, head, bank, reps, norm_model, meta) from a checkpoint."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format") != CHECKPOINT_FORMAT:
        raise InvalidConfigError("checkpoint", f"not a {CHECKPOINT_FORMAT} file: {path}")
    ext = data["extractor"]
    extractor = TwoLayerExtractor(
        np.array(ext["w1"]), np.array(ext["b1"]), np.array(ext["w2"]), np.array(ext["b2"]),
        ext["layer1_trainable"], ext["layer2_trainable"],
    )
    head = LinearHead(np.array(data["head"]))
    bank = None
    if data["bank"] is not None:
        b = data["bank"]
        bank = CenterBank(
            np.array(b["centers"]),
            {int(k): v for k, v in b["assignment"].items()},
            frozenset(b["free_indices"]),
        )
    reps = RepresentativeSet({
        int(label): Representative(np.array(rep["vector"]), rep["session"], rep["count"])
        for label, rep in data["representatives"].items()
    })
    norm_model = None
    if data["norm_model"] is not None:
        nm = data["norm_model"]
        norm_model = NormModel(
            {int(k): tuple(v) for k, v in nm["base_params"].items()},
            tuple(nm["shared_params"]) if nm["shared_params"] else None,
            frozenset(nm["incremental_labels"]),
            nm["variance_floor"],
            nm["transform"],
        )
    meta = {k: data[k] for k in ("manifest_hash", "method", "seed", "session_index", "dims")}
    return extractor, head, bank, reps, norm_model, meta


# ---------------------------------------------------------------------------
# results: line-delimited records plus a flat accuracy table

def _session_line(rec: SessionRecord) -> dict:
    return {
        "record": "session",
        "session": rec.session,
        "cumulative_classes": rec.cumulative_classes,
        "n_test": rec.n_test,
        "accuracy": rec.accuracy,
        "base_accuracy": rec.base_accuracy,
        "novel_accuracy": rec.novel_accuracy,
    }


def write_results(result: ExperimentResult, manifest_hash: str,
                  tool_version: str, path: str | Path) -> None:
    m = result.metrics
    lines = [{
        "record": "header",
        "format": RESULTS_FORMAT,
        "manifest_hash": manifest_hash,
        "method": result.method,
        "seed": result.seed,
        "tool_version": tool_version,
    }]
    lines += [_session_line(rec) for rec in result.records]
    lines.append({
        "record": "summary",
        "last_accuracy": m.per_session_accuracy[-1],
        "drop": m.drop,
        "base_accuracy": m.base_accuracy,
        "novel_accuracy": m.novel_accuracy,
        "harmonic_mean": m.harmonic_mean,
        "average_accuracy": m.average_accuracy,
    })
    text = "\n".join(json.dumps(line, sort_keys=True) for line in lines) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def read_results(path: str | Path, expected_hash: str | None = None) -> dict:
    """Parse a results file into {header, sessions, summary}.

    When an expected manifest hash is given, a mismatch is rejected.
    """
    records = [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
    if not records or records[0].get("format") != RESULTS_FORMAT:
        raise InvalidConfigError("results", f"not a {RESULTS_FORMAT} file: {path}")
    header = records[0]
    if expected_hash is not None and header["manifest_hash"] != expected_hash:
        raise ManifestHashMismatchError(
            f"results file {path} was produced by manifest {header['manifest_hash'][:12]}..., "
            f"expected {expected_hash[:12]}..."
        )
    return {
        "header": header,
        "sessions": [r for r in records if r["record"] == "session"],
        "summary": next(r for r in records if r["record"] == "summary"),
    }


def write_accuracy_table(records: list[SessionRecord], manifest_hash: str,
                         path: str | Path) -> None:
    lines = [
        f"# manifest_hash={manifest_hash}",
        "session\tcumulative_classes\tn_test\taccuracy\tbase_accuracy\tnovel_accuracy",
    ]
    for rec in records:
        lines.append(
            f"{rec.session}\t{rec.cumulative_classes}\t{rec.n_test}\t"
            f"{repr(rec.accuracy)}\t{repr(rec.base_accuracy)}\t{repr(rec.novel_accuracy)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ablation_results(rows: list[dict], manifest_hash: str,
                           tool_version: str, jsonl_path: str | Path,
                           table_path: str | Path) -> None:
    header = {
        "record": "header",
        "format": ABLATION_FORMAT,
        "manifest_hash": manifest_hash,
        "tool_version": tool_version,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps({"record": "row", **row}, sort_keys=True) for row in rows]
    Path(jsonl_path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    table = [
        f"# manifest_hash={manifest_hash}",
        "order\tmethod\tpull\tpush\ttwo_stage\tnorm_distribution\tlast_accuracy\tdelta_vs_baseline",
    ]
    for row in rows:
        table.append(
            f"{row['order']}\t{row['method']}\t{int(row['pull'])}\t{int(row['push'])}\t"
            f"{int(row['two_stage'])}\t{int(row['norm_distribution'])}\t"
            f"{repr(row['last_accuracy'])}\t{repr(row['delta_vs_baseline'])}"
        )
    Path(table_path).write_text("\n".join(table) + "\n", encoding="utf-8")


def read_ablation_results(path: str | Path, expected_hash: str | None = None) -> dict:
    records = [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
    if not records or records[0].get("format") != ABLATION_FORMAT:
        raise InvalidConfigError("results", f"not an {ABLATION_FORMAT} file: {path}")
    header = records[0]
    if expected_hash is not None and header["manifest_hash"] != expected_hash:
        raise ManifestHashMismatchError(
            f"ablation file {path} was produced by manifest {header['manifest_hash'][:12]}..., "
            f"expected {expected_hash[:12]}..."
        )
    return {"header": header, "rows": [r for r in records if r["record"] == "row"]}
