"""Online one-step-ahead forecasting of the hidden target in a trace.

The model is a single-layer LSTM (hidden size 32) with a linear head,
trained incrementally: at each slot it predicts the next value from a
sliding window of the previous observations, then takes a single Adam step
on the revealed value.  Inputs and targets are standardized with running
(causal) statistics so early predictions sit near the running mean instead
of zero; a gradient-norm clip keeps the online updates stable.

File formats match the tracking harness:
  trace CSV        header ``slot,utilization``; hidden target u = 1 - utilization
  predictions CSV  header ``slot,uhat_0``; ``#`` lines are comments
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class LstmConfig:
    window: int = 10
    hidden_size: int = 32
    learning_rate: float = 1e-2
    layers: int = 1
    seed: int = 0
    clip_norm: float = 1.0
    replay: int = 48       # recent (window, target) pairs averaged in the update
    gate_window: int = 72  # rolling-error window for the warm-up gate

    def __post_init__(self):
        if self.window < 1 or self.hidden_size < 1:
            raise ValueError("window and hidden_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.layers != 1:
            raise ValueError("only the single-layer configuration is supported")
        if self.replay < 1 or self.gate_window < 1:
            raise ValueError("replay and gate_window must be at least 1")


def read_trace_csv(path) -> np.ndarray:
    """Utilization column of a trace CSV (validated lightly)."""
    path = Path(path)
    util = []
    with path.open(newline="") as fh:
        header = None
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if not raw or raw[0].startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in raw]
                if header != ["slot", "utilization"]:
                    raise ValueError(
                        f"{path}:{lineno}: expected header 'slot,utilization'")
                continue
            try:
                value = float(raw[1])
            except (IndexError, ValueError):
                raise ValueError(f"{path}:{lineno}: malformed row") from None
            if not 0.0 <= value <= 1.0:
                raise ValueError(
                    f"{path}:{lineno}: utilization {value} outside [0, 1]")
            util.append(value)
    if not util:
        raise ValueError(f"{path}: no trace rows")
    return np.asarray(util)


def write_predictions_csv(preds: np.ndarray, path,
                          comments: list[str] | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["slot", "uhat_0"])
        for t, v in enumerate(preds, start=1):
            writer.writerow([t, repr(float(v))])


def read_predictions_csv(path) -> np.ndarray:
    path = Path(path)
    vals = []
    with path.open(newline="") as fh:
        header = None
        for raw in csv.reader(fh):
            if not raw or raw[0].startswith("#"):
                continue
            if header is None:
                header = raw
                continue
            vals.append(float(raw[1]))
    return np.asarray(vals)


class _RunningStats:
    """Causal mean/std over the values revealed so far."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    @property
    def std(self) -> float:
        if self.n < 2:
            return 1.0
        return max(float(np.sqrt(self.m2 / (self.n - 1))), 1e-6)


def train_predict_online(u: np.ndarray, config: LstmConfig = LstmConfig()
                         ) -> np.ndarray:
    """One prediction per slot, trained online with one update per slot.

    Slot conventions (0-based input, prediction i targets u[i]):
      i = 0            no history: predict 0.5 (domain midpoint; the hidden
                       target is a share in [0, 1] by schema)
      0 < i < window   persistence warm-up: predict u[i-1]
      i >= window      network prediction once warmed up (see below), then
                       one Adam step on the revealed u[i]

    Two stabilizers for constant-rate online training:

    * The single per-slot update averages the loss over the newest pair plus
      up to ``replay - 1`` recent (window, target) pairs, which keeps the
      optimizer from random-walking on per-sample noise.
    * A warm-up gate emits persistence until the network's rolling MAE over
      the last ``gate_window`` slots (tracked on its shadow predictions)
      beats persistence's rolling MAE, then latches onto the network for
      good.  A freshly initialized network mispredicts for the first stretch
      of the trace; the gate keeps those errors out of the output stream.

    Everything is causal: slot i uses only values revealed before i.
    """
    import torch
    from torch import nn

    u = np.asarray(u, dtype=np.float64).reshape(-1)
    T = u.shape[0]
    W = config.window
    if T < W + 1:
        raise ValueError(f"trace has {T} slots; need at least window+1={W + 1}")

    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    lstm = nn.LSTM(input_size=1, hidden_size=config.hidden_size,
                   num_layers=config.layers, batch_first=True)
    head = nn.Linear(config.hidden_size, 1)
    params = list(lstm.parameters()) + list(head.parameters())
    optimizer = torch.optim.Adam(params, lr=config.learning_rate)

    preds = np.zeros(T)
    preds[0] = 0.5
    stats = _RunningStats()
    preds[1:W] = u[:W - 1]
    for x in u[:W]:
        stats.push(float(x))

    G = config.gate_window
    net_abs_err: list[float] = []
    pers_abs_err: list[float] = []
    latched = False

    for i in range(W, T):
        mean, std = stats.mean, stats.std
        lo = max(W, i - config.replay + 1)
        windows = np.stack([(u[j - W:j] - mean) / std for j in range(lo, i + 1)])
        targets = (u[lo:i + 1] - mean) / std
        batch = torch.tensor(windows, dtype=torch.float32).unsqueeze(-1)
        out, _ = lstm(batch)
        pred_z = head(out[:, -1, :]).squeeze(-1)
        net_pred = float(pred_z[-1].detach()) * std + mean

        if not latched and len(net_abs_err) >= G:
            latched = (np.mean(net_abs_err[-G:]) < np.mean(pers_abs_err[-G:]))
        preds[i] = net_pred if latched else u[i - 1]

        loss = torch.mean(
            (pred_z - torch.tensor(targets, dtype=torch.float32)) ** 2)
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(params, config.clip_norm)
        optimizer.step()
        net_abs_err.append(abs(net_pred - float(u[i])))
        pers_abs_err.append(abs(float(u[i - 1]) - float(u[i])))
        stats.push(float(u[i]))
    return preds


def forecast_trace(trace_csv, out_csv, config: LstmConfig = LstmConfig()
                   ) -> np.ndarray:
    """Trace file in, predictions file out; returns the prediction series."""
    util = read_trace_csv(trace_csv)
    u = 1.0 - util
    preds = train_predict_online(u, config)
    write_predictions_csv(preds, out_csv, comments=[
        f"online lstm: window={config.window} hidden={config.hidden_size} "
        f"lr={config.learning_rate} seed={config.seed}"])
    return preds
