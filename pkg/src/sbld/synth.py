"""Synthetic CI log corpora with planted failure-exclusive events.

Each generated test has shared events present in every log, a pool of noise
events sampled independently per log, and a handful of planted events that
appear only in failing logs. A signature matching exactly the planted events
is emitted alongside, so the corpus can be fed straight to ``sbld evaluate``.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .abstraction import AbstractionConfig, format_timestamp

SEED_ENV = "SBLD_SEED"

_COMPONENTS = ("scheduler", "media-gw", "sip-proxy", "db-pool", "auth", "router", "codec", "watchdog",
               "provisioner", "license", "dns-cache", "metrics")
_VERBS = ("processed", "refreshed", "synchronised", "acknowledged", "rotated", "polled", "flushed", "probed")
# noise phrases that trip the grep-style baseline without being relevant
_NOISY = ("recovered from transient error", "failover check passed", "fault counter reset",
          "retrying after connection failure")


@dataclass(frozen=True)
class SynthParams:
    tests: int = 5
    failing: int = 10
    passing: int = 20
    shared: int = 20
    planted: int = 3
    noise: int = 220
    noise_rate: float = 0.35
    span_days: int = 38


def seed_from_env(default: int = 0) -> int:
    value = os.environ.get(SEED_ENV)
    return int(value) if value not in (None, "") else default


def _planted_texts(test: int, n: int) -> list[tuple[str, str]]:
    """(message, signature sub-pattern) for each planted event."""
    kinds = [
        (f"ERROR: link down on port {test + 7} of trunk {{hex}}", rf"link down on port {test + 7} of trunk"),
        (f"Assertion failed in call_flow_{test}: expected state ACTIVE, got IDLE",
         rf"call_flow_{test}: expected state ACTIVE"),
        (f"Timeout waiting for media session {{uuid}} (tc{test})\n"
         f"  at media.wait_for_session(session.py:{120 + test})\n  at tc{test}.run(testcase.py:88)",
         rf"Timeout waiting for media session .* \(tc{test}\)"),
    ]
    out = []
    for k in range(n):
        msg, pat = kinds[k % len(kinds)]
        if k >= len(kinds):
            msg, pat = f"{msg} [variant {k}]", rf"{pat}.*\[variant {k}\]"
        out.append((msg, pat))
    return out


def _noise_text(rng: np.random.Generator, test: int, idx: int) -> str:
    comp = _COMPONENTS[idx % len(_COMPONENTS)]
    if idx % 17 == 5:
        body = _NOISY[idx % len(_NOISY)]
    else:
        body = f"{_VERBS[idx % len(_VERBS)]} batch {idx} of job {{num}}"
    return f"[{comp}#{idx}] tc{test}: {body} from {{ip}}"


def _fill(template: str, rng: np.random.Generator) -> str:
    return template.format(
        hex=f"{int(rng.integers(0, 2**40)):010x}",
        uuid="-".join(f"{int(rng.integers(0, 16**w)):0{w}x}" for w in (8, 4, 4, 4, 12)),
        num=str(int(rng.integers(10**6, 10**8))),
        ip=".".join(str(int(rng.integers(1, 255))) for _ in range(4)),
    )


def generate(out_dir: str | Path, params: SynthParams = SynthParams(), seed: int | None = None) -> dict[str, Path]:
    """Write a corpus, manifest, signatures file and abstraction config."""
    seed = seed_from_env() if seed is None else seed
    rng = np.random.default_rng(seed)
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    base = datetime(2019, 4, 1, tzinfo=timezone.utc)
    manifest_rows = []
    signatures, assignment = [], {}

    for t in range(params.tests):
        test = f"test{t + 1:02d}"
        shared = [f"tc{t}: step {s:02d} setup on host {{ip}} ok" for s in range(params.shared)]
        noise = [_noise_text(rng, t, n) for n in range(params.noise)]
        planted = _planted_texts(t, params.planted)
        name = f"SIG{t + 1:02d}"
        signatures.append({"name": name, "sub_patterns": [p for _, p in planted]})
        assignment[test] = name

        verdicts = ["fail"] * params.failing + ["pass"] * params.passing
        offsets = np.sort(rng.uniform(0, params.span_days * 86400, size=len(verdicts)))
        order = rng.permutation(len(verdicts))
        counters = {"fail": 0, "pass": 0}
        for slot, v_idx in enumerate(order):
            verdict = verdicts[v_idx]
            counters[verdict] += 1
            produced = base + timedelta(seconds=int(offsets[slot]))
            msgs = list(shared[: params.shared // 2])
            body = [noise[n] for n in range(params.noise) if rng.random() < params.noise_rate]
            if verdict == "fail":
                body += [m for m, _ in planted]
            body = [body[i] for i in rng.permutation(len(body))]
            msgs += body + list(shared[params.shared // 2:])
            clock = produced
            lines = [f"== {test} run log ==\n"]
            for msg in msgs:
                clock += timedelta(milliseconds=int(rng.integers(1, 5000)))
                stamp = clock.strftime("%Y-%m-%d %H:%M:%S.") + f"{clock.microsecond // 1000:03d} UTC"
                lines.append(f"{stamp}: {_fill(msg, rng)}\n")
            rel = Path(test) / verdict / f"{verdict}_{counters[verdict]:03d}.log"
            (root / rel).parent.mkdir(parents=True, exist_ok=True)
            (root / rel).write_text("".join(lines), encoding="utf-8")
            manifest_rows.append((rel.as_posix(), verdict.upper(), format_timestamp(produced)))

    paths = {
        "manifest": root / "manifest.csv",
        "signatures": root / "signatures.json",
        "config": root / "config.json",
    }
    with open(paths["manifest"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source_id", "verdict", "produced_at"])
        writer.writerows(sorted(manifest_rows))
    paths["signatures"].write_text(
        json.dumps({"signatures": signatures, "tests": assignment}, indent=2) + "\n", encoding="utf-8")
    paths["config"].write_text(json.dumps(AbstractionConfig().to_dict(), indent=2) + "\n", encoding="utf-8")
    return paths
