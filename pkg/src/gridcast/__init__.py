"""gridcast: desk-scale two-stage transformer forecasting on lat/lon grids.

Library layout:
  grids       grid geometry, latitude weights, region masks, great-circle distance
  catalog     channel catalog and the dynamics/thermodynamics split
  dataset     snapshots, standardization, randomized-lead training pairs
  synth       deterministic toy atmosphere and synthetic vortex series
  seriesio    on-disk series format (JSON manifest + raw payload)
  autodiff    numpy tensors with tape-based reverse-mode differentiation
  model       the two-stage (slow/fast path) transformer with adaLN-Zero
  checkpoint  single-file checkpoints holding raw and EMA weights
  training    pressure/latitude-weighted loss, AdamW, EMA, training loop
  evaluation  autoregressive rollout, latitude-weighted RMSE/ACC, EMA report
  tracking    minimum-pressure cyclone tracker and track/intensity errors
  fields      forecast field panels (SVG heatmaps + CSV grids)
  cli         operator entry point (synth-data/train/rollout/evaluate/...)
"""

__version__ = "0.1.0"
