"""Posterior snapshot files.

A snapshot is a key=value text block holding both posteriors plus
provenance (digest of the source data, tool version).  Numbers are written
in round-trip decimal form and keys in a canonical order, so
save -> load -> save is the identity on bytes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .delta_matrix import BasePmf, DeltaDirichletPosterior, parse_base
from .rate import GammaPosterior

TOOL_VERSION = "0.1.0"
FORMAT_VERSION = "1"


@dataclass(frozen=True)
class PosteriorSnapshot:
    gamma: GammaPosterior
    dp: DeltaDirichletPosterior
    source_sha256: str = "-"
    tool_version: str = TOOL_VERSION


def render(snap: PosteriorSnapshot) -> str:
    lines = [
        f"snapshot.version={FORMAT_VERSION}",
        f"tool.version={snap.tool_version}",
        f"source.sha256={snap.source_sha256}",
        f"gamma.a={float(snap.gamma.a)!r}",
        f"gamma.b={float(snap.gamma.b)!r}",
        f"dp.alpha={float(snap.dp.alpha)!r}",
        f"dp.base={snap.dp.base.spec()}",
        f"dp.n_obs={snap.dp.n_obs}",
    ]
    for k, c in snap.dp.counts:
        if c:
            lines.append(f"dp.count.{k}={c}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> PosteriorSnapshot:
    fields: dict[str, str] = {}
    counts: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed snapshot line {lineno}: {raw!r}")
        if key.startswith("dp.count."):
            counts[int(key.removeprefix("dp.count."))] = int(value)
        else:
            fields[key] = value
    try:
        if fields.get("snapshot.version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported snapshot version {fields.get('snapshot.version')!r}"
            )
        gamma = GammaPosterior(float(fields["gamma.a"]), float(fields["gamma.b"]))
        base: BasePmf = parse_base(fields["dp.base"])
        dp = DeltaDirichletPosterior(
            alpha=float(fields["dp.alpha"]),
            base=base,
            counts=tuple(sorted(counts.items())),
            n_obs=int(fields["dp.n_obs"]),
        )
    except KeyError as exc:
        raise ValueError(f"snapshot missing field {exc.args[0]!r}") from exc
    return PosteriorSnapshot(
        gamma=gamma,
        dp=dp,
        source_sha256=fields.get("source.sha256", "-"),
        tool_version=fields.get("tool.version", TOOL_VERSION),
    )


def sha256_of_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
