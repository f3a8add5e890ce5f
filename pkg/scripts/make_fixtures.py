"""Regenerate the noiseless fixtures under ``fixtures/``.

Run from the repository root: ``python3 scripts/make_fixtures.py``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ssvh.io import write_indexed_rows, write_matrix
from ssvh.network import expected_signal, random_dcmm_params
from ssvh.simlab import ExperimentConfig, synthesize_instance
from ssvh.topics import TopicLoadings, random_plsi_params

ROOT = Path(__file__).resolve().parents[1] / "fixtures"


def vh_fixture(out: Path) -> None:
    cfg = ExperimentConfig(id="vh-noiseless", n=200, K=3, sigma=0.0, label_ratio=None,
                           label_count=12, reps=1, base_seed=7)
    inst = synthesize_instance(cfg, 0)
    write_matrix(out / "X.csv", inst.X)
    write_indexed_rows(out / "labels.csv", inst.S, inst.PiS, header="index", prefix="pi")
    write_matrix(out / "V.csv", inst.V)


def mme_fixture(out: Path) -> None:
    rng = np.random.default_rng(11)
    n, K = 150, 3
    params = random_dcmm_params(n, K, rng)
    Omega = expected_signal(params)
    S = np.sort(rng.choice(n, 12, replace=False))
    with open(out / "omega_edges.txt", "w") as fh:
        fh.write("# noiseless signal matrix as a weighted edge list: i j Omega_ij (1-based, i <= j)\n")
        for i in range(n):
            for j in range(i, n):
                fh.write(f"{i + 1} {j + 1} {float(Omega[i, j])!r}\n")
    write_indexed_rows(out / "labels.csv", S, params.Pi[S], header="node", prefix="pi")
    write_indexed_rows(out / "memberships.csv", np.arange(n), params.Pi, header="node", prefix="pi")


def topics_fixture(out: Path) -> None:
    rng = np.random.default_rng(13)
    p, n, K = 120, 80, 3
    params = random_plsi_params(p, n, K, 100, rng)
    D0 = params.signal()
    S = np.sort(np.concatenate([np.arange(K), rng.choice(np.arange(K, p), 9, replace=False)]))
    with open(out / "counts.csv", "w") as fh:
        fh.write("word,doc,count\n")
        for j, i in zip(*np.nonzero(D0)):
            fh.write(f"{j + 1},{i + 1},{float(D0[j, i])!r}\n")
    loads = TopicLoadings.from_topic_matrix(params.A, S)
    write_indexed_rows(out / "loadings.csv", S, loads.AstarS, header="word", prefix="a")
    write_matrix(out / "A.csv", params.A)


def configs(out: Path) -> None:
    shipped = {
        "experiment1.json": dict(id="experiment1", n=1000, K=3, sigma=0.2, label_ratio=0.03,
                                 weight_scheme="balanced_dirichlet", methods=["ssvh", "sp"],
                                 reps=50, base_seed=0, timing=False),
        "experiment2.json": dict(id="experiment2", n=1000, K=3, sigma=0.2, label_ratio=0.03,
                                 weight_scheme="dirichlet_with_pure", methods=["ssvh", "sp"],
                                 reps=50, base_seed=0, timing=False),
        "experiment5_k10.json": dict(id="experiment5-k10", n=1000, K=10, sigma=0.2,
                                     label_ratio=None, weight_scheme="large_k_scheme",
                                     methods=["ssvh", "sp"], reps=20, base_seed=0, timing=True),
    }
    for name, cfg in shipped.items():
        ExperimentConfig.from_dict(cfg)
        (out / name).write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    for name, fn in [("vh_noiseless", vh_fixture), ("mme_noiseless", mme_fixture),
                     ("topics_noiseless", topics_fixture), ("configs", configs)]:
        d = ROOT / name
        d.mkdir(parents=True, exist_ok=True)
        fn(d)
