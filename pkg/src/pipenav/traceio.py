"""Trace persistence and plotting.

Traces are plain CSV with a pinned header. Floats are written with repr()
so a written trace reads back to the exact same binary values and two runs
with the same seed produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import SchemaError
from .simulate import RunSummary, TraceRecord, summary_to_dict

TRACE_HEADER = ("t,x,x_dot,phi,phi_dot,psi,psi_dot,mode,junction_index,sonar,"
                "pf_mean,pf_var,n_particles,f1,f2,f3,w1,w2,w3")


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _row(rec: TraceRecord) -> str:
    fields = [
        repr(rec.t), repr(rec.x), repr(rec.x_dot), repr(rec.phi), repr(rec.phi_dot),
        repr(rec.psi), repr(rec.psi_dot), rec.mode, str(rec.junction_index),
        repr(rec.sonar), repr(rec.pf_mean), repr(rec.pf_var), str(rec.n_particles),
        repr(rec.forces[0]), repr(rec.forces[1]), repr(rec.forces[2]),
        repr(rec.wheel_omega_revs[0]), repr(rec.wheel_omega_revs[1]),
        repr(rec.wheel_omega_revs[2]),
    ]
    return ",".join(fields)


def write_trace(records: list[TraceRecord], path) -> None:
    lines = [TRACE_HEADER]
    lines.extend(_row(rec) for rec in records)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_trace(path) -> list[TraceRecord]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != TRACE_HEADER:
        raise SchemaError(f"{path}: not a trace file (unexpected header)")
    records = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 19:
            raise SchemaError(f"{path}:{ln_no}: expected 19 fields, got {len(parts)}")
        try:
            records.append(TraceRecord(
                t=float(parts[0]), x=float(parts[1]), x_dot=float(parts[2]),
                phi=float(parts[3]), phi_dot=float(parts[4]), psi=float(parts[5]),
                psi_dot=float(parts[6]), mode=parts[7], junction_index=int(parts[8]),
                sonar=float(parts[9]), pf_mean=float(parts[10]), pf_var=float(parts[11]),
                n_particles=int(parts[12]),
                forces=(float(parts[13]), float(parts[14]), float(parts[15])),
                wheel_omega_revs=(float(parts[16]), float(parts[17]), float(parts[18])),
            ))
        except ValueError as exc:
            raise SchemaError(f"{path}:{ln_no}: {exc}") from exc
    return records


def write_summary(summary: RunSummary, path) -> None:
    Path(path).write_text(json.dumps(summary_to_dict(summary), indent=2) + "\n",
                          encoding="utf-8")


_MODE_LEVELS = {"cruise": 0, "junction": 1, "stop": 2}


def emit_plots(records: list[TraceRecord], out_dir) -> list[Path]:
    """Render the standard figure set (SVG) from a trace."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = ensure_dir(out_dir)
    t = [r.t for r in records]
    written: list[Path] = []

    def save(fig, name: str) -> None:
        path = out / name
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, [r.phi for r in records], label="pitch [rad]")
    ax.plot(t, [r.psi for r in records], label="yaw [rad]")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("attitude [rad]")
    ax.set_title("Attitude stabilization")
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "attitude.svg")

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, [r.x_dot for r in records], label="axial velocity [m/s]")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("velocity [m/s]")
    ax.set_title("Axial velocity")
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "velocity.svg")

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(3):
        ax.plot(t, [r.forces[i] for r in records], label=f"wheel {i + 1} force [N]")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("force [N]")
    ax.set_title("Commanded wheel forces")
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "forces.svg")

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(3):
        ax.plot(t, [r.wheel_omega_revs[i] for r in records],
                label=f"wheel {i + 1} [rev/s]")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("wheel rate [rev/s]")
    ax.set_title("Wheel rates")
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "wheels.svg")

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, [r.x for r in records], label="true route coordinate [m]")
    ax.plot(t, [r.pf_mean for r in records], "--", label="estimated [m]")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("route coordinate [m]")
    ax.set_title("Localization")
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "localization.svg")

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(t, [r.sonar for r in records], label="sonar range [m]")
    ax1.set_ylabel("range [m]")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.step(t, [_MODE_LEVELS.get(r.mode, -1) for r in records], where="post")
    ax2.set_yticks(sorted(_MODE_LEVELS.values()))
    ax2.set_yticklabels([m for m, _ in sorted(_MODE_LEVELS.items(), key=lambda kv: kv[1])])
    ax2.set_xlabel("time [s]")
    ax2.set_ylabel("mode")
    ax2.grid(True, alpha=0.3)
    fig.suptitle("Sonar and supervisor mode")
    save(fig, "sonar_mode.svg")

    return written
