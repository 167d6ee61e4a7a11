"""Result serialization: CSV series, YAML reports and static SVG plots."""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import yaml

from .errors import ConfigError, IoError
from .sweeps import UNITS, SweepResult

CSV_HEADER = ("frequency_hz", "path", "gain_db", "phase_deg", "param_name", "param_value")


def _fmt(x: float) -> str:
    # repr round-trips a float exactly and never uses locale separators
    return repr(float(x))


def csv_text(result: SweepResult) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    name = f"{result.param}_{UNITS[result.param]}"
    for rec in result.records:
        gp = rec.point
        w.writerow([_fmt(gp.frequency), rec.path, _fmt(gp.gain), _fmt(gp.phase), name, _fmt(rec.value)])
    return buf.getvalue()


def write_csv(result: SweepResult, path, allow_empty: bool = True) -> Path:
    """One row per record in result order.

    An empty result writes the header only, unless ``allow_empty`` is off.
    """
    if not result.records and not allow_empty:
        raise ConfigError("empty result and empty output not allowed")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(csv_text(result), newline="")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def write_yaml(data, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(data, sort_keys=False))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


_AXIS_LABEL = {
    "frequency": "Frequency (Hz)",
    "fat_thickness": "Fat thickness (mm)",
    "muscle_thickness": "Muscle thickness (mm)",
    "d": "Transmitter-receiver distance D (mm)",
    "e_s_both": "Electrode separation E_S (mm)",
    "delta_l": "Misalignment (mm)",
    "e_l": "Electrode side E_L (mm)",
}


def build_figure(result: SweepResult, style: dict | None = None):
    """Matplotlib figure and axes for ``result``; the caller closes the figure."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    style = dict(style or {})
    scale = 1.0 if result.param == "frequency" else 1e3
    fig, ax = plt.subplots(figsize=style.get("figsize", (6.0, 4.0)))
    for p in result.paths():
        x, y = result.series(p)
        ax.plot(x * scale, y, marker=style.get("marker", "o"), ms=3, label=p)
    if result.param == "frequency":
        ax.set_xscale("log")
    ax.set_xlabel(_AXIS_LABEL[result.param])
    ax.set_ylabel("Gain (dB)")
    ax.grid(True, which="both", alpha=0.3)
    if result.records:
        ax.legend()
    return fig, ax


def emit_plot(result: SweepResult, path, style: dict | None = None, strict: bool = False) -> Path:
    """Gain against the swept axis, one labelled line per path, as SVG.

    Frequency sweeps use a log x axis; lengths are shown in mm.
    """
    if not result.records and strict:
        raise ConfigError("nothing to plot: result is empty")
    import matplotlib
    import matplotlib.pyplot as plt

    path = Path(path)
    # fixed salt and metadata keep the SVG byte-stable between runs
    with matplotlib.rc_context({"svg.hashsalt": "galvanic-tec"}):
        fig, _ = build_figure(result, style)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from None
        finally:
            plt.close(fig)
    return path
