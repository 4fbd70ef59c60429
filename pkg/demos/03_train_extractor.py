"""Train a reduced-scale extractor and watch it converge.

Uses 2,000 Monte Carlo devices instead of the full 25,000 so the run takes
seconds; the training curve and the held-out accuracy are printed at the
end. Run the `fetfit demo --out ...` command for the full-scale pipeline.
"""

import time

from fetfit import MLPConfig, TrainConfig, build_dataset, fit_normalizer, train
from fetfit.verify import holdout_round_trip

t0 = time.perf_counter()
ds = build_dataset(2000, seed=1)
print(f"dataset: {ds.n} devices in {time.perf_counter() - t0:.1f} s "
      f"({len(ds.indices('train'))} train / {len(ds.indices('val'))} val / "
      f"{len(ds.indices('test'))} test)")

norm = fit_normalizer(ds)
t0 = time.perf_counter()
weights, history = train(ds, norm, MLPConfig(seed=0),
                         TrainConfig(max_epochs=150, patience=149, seed=0))
print(f"training: {history.meta['trained_epochs']} epochs in "
      f"{time.perf_counter() - t0:.1f} s")

print("\nepoch   train loss     val loss")
for entry in history.epochs[:: max(1, len(history.epochs) // 10)]:
    print(f"{entry['epoch']:5d}   {entry['train_loss']:.4e}   {entry['val_loss']:.4e}")
print(f"best val loss: {history.meta['best_val_loss']:.4e}")

reports, medians = holdout_round_trip(ds, norm, weights, n_devices=50)
print("\nround-trip medians over 50 held-out devices:")
for label, value in medians.items():
    print(f"  {label:9s} {value:7.3f}%")
