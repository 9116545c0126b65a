"""Torch network definitions for the neural classifier families.

Every family consumes a fixed-length feature vector treated as a
length-D sequence of scalars (one channel), so RNN, CNN, and Transformer
all share the same (batch, input_dim) input contract and emit one
sigmoid probability per row.
"""

from __future__ import annotations

import math

import torch
from torch import nn


class RnnClassifier(nn.Module):
    """Vanilla RNN over the feature sequence; last hidden state feeds the head."""

    def __init__(self, hidden_units: int = 50):
        super().__init__()
        self.rnn = nn.RNN(input_size=1, hidden_size=hidden_units, batch_first=True)
        self.head = nn.Linear(hidden_units, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _, hidden = self.rnn(x.unsqueeze(-1))
        return torch.sigmoid(self.head(hidden[-1])).squeeze(-1)


class CnnClassifier(nn.Module):
    """1-D convolution along the feature axis, global max pool, dense head."""

    def __init__(self, filters: int = 64, kernel_width: int = 3, dense_units: int = 128):
        super().__init__()
        self.conv = nn.Conv1d(1, filters, kernel_width)
        self.dense = nn.Linear(filters, dense_units)
        self.head = nn.Linear(dense_units, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        z = torch.relu(self.conv(x.unsqueeze(1)))
        z = z.max(dim=2).values
        z = torch.relu(self.dense(z))
        return torch.sigmoid(self.head(z)).squeeze(-1)


def sinusoidal_positions(length: int, width: int) -> torch.Tensor:
    """Fixed sin/cos positional encodings, shape (length, width)."""
    position = torch.arange(length, dtype=torch.float32).unsqueeze(1)
    div = torch.exp(torch.arange(0, width, 2, dtype=torch.float32)
                    * (-math.log(10000.0) / width))
    table = torch.zeros(length, width)
    table[:, 0::2] = torch.sin(position * div)
    table[:, 1::2] = torch.cos(position * div)
    return table


class TransformerClassifier(nn.Module):
    """Single encoder layer over scalar tokens projected to model width."""

    def __init__(self, input_dim: int, heads: int = 4, ff_units: int = 128,
                 model_width: int = 32):
        super().__init__()
        self.input_proj = nn.Linear(1, model_width)
        self.register_buffer("positions", sinusoidal_positions(input_dim, model_width))
        self.encoder = nn.TransformerEncoderLayer(
            d_model=model_width, nhead=heads, dim_feedforward=ff_units,
            dropout=0.0, batch_first=True)
        self.head = nn.Linear(model_width, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        z = self.input_proj(x.unsqueeze(-1)) + self.positions[: x.shape[1]]
        z = self.encoder(z)
        z = z.mean(dim=1)
        return torch.sigmoid(self.head(z)).squeeze(-1)


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
