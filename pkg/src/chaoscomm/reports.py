"""Run reports and artifact emission.

All files are written atomically (temp file in the target directory, then
rename); numbers are printed with repr-faithful precision so identical
configs produce byte-identical artifacts.  Wall time goes to stderr only,
never into files.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


@dataclass
class RunReport:
    experiment: str
    inputs: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)   # criterion name -> bool
    wall_time_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def summary_text(self) -> str:
        lines = [f"experiment = {self.experiment}"]
        for k in sorted(self.inputs):
            lines.append(f"input.{k} = {_fmt(self.inputs[k])}")
        for k in sorted(self.metrics):
            lines.append(f"{k} = {_fmt(self.metrics[k])}")
        for k in sorted(self.verdicts):
            lines.append(f"verdict.{k} = {'pass' if self.verdicts[k] else 'fail'}")
        return "\n".join(lines) + "\n"


class ArtifactWriter:
    """Stages files for one run and commits them atomically; on failure the
    staged temp files are removed so no partial outputs survive."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self._staged: list[tuple[str, str]] = []

    def _stage(self, name: str, write_fn) -> None:
        os.makedirs(self.out_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                write_fn(fh)
        except Exception:
            os.unlink(tmp)
            raise
        self._staged.append((tmp, os.path.join(self.out_dir, name)))

    def add_text(self, name: str, text: str) -> None:
        self._stage(name, lambda fh: fh.write(text))

    def add_trajectory_csv(self, name: str, times: np.ndarray, states: np.ndarray) -> None:
        def write(fh):
            fh.write("t,x1,x2,x3\n")
            for t, row in zip(times, states):
                fh.write(f"{_fmt(t)},{_fmt(row[0])},{_fmt(row[1])},{_fmt(row[2])}\n")

        self._stage(name, write)

    def add_signal_csv(self, name: str, times: np.ndarray, values: np.ndarray) -> None:
        def write(fh):
            fh.write("t,value\n")
            for t, v in zip(times, values):
                fh.write(f"{_fmt(t)},{_fmt(v)}\n")

        self._stage(name, write)

    def add_bit_report_csv(self, name: str, truth, recovered, window_error) -> None:
        def write(fh):
            fh.write("bit_index,truth,recovered,window_error\n")
            for i, (tb, rb, we) in enumerate(zip(truth, recovered, window_error)):
                fh.write(f"{i},{int(tb)},{int(rb)},{_fmt(we)}\n")

        self._stage(name, write)

    def add_bits(self, name: str, bits) -> None:
        self._stage(name, lambda fh: fh.write("".join(str(int(b)) for b in bits) + "\n"))

    def commit(self) -> list[str]:
        paths = []
        for tmp, final in self._staged:
            os.replace(tmp, final)
            paths.append(final)
        self._staged.clear()
        return paths

    def abort(self) -> None:
        for tmp, _final in self._staged:
            try:
                os.unlink(tmp)
            except OSError:
                pass
        self._staged.clear()


def read_signal_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns t,value")
    return data[:, 0], data[:, 1]


def read_trajectory_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] != 4:
        raise ValueError(f"{path}: expected four columns t,x1,x2,x3")
    return data[:, 0], data[:, 1:]


def read_bits(path: str):
    with open(path) as fh:
        line = fh.read().strip()
    if not line or any(c not in "01" for c in line):
        raise ValueError(f"{path}: bit files hold a single line of 0/1 characters")
    return tuple(int(c) for c in line)
