"""Extract the 24 curve features and see how they respond to parameters.

Featurizes the reference device, then perturbs a few physically meaningful
parameters and shows which features move.
"""

import numpy as np

from fetfit import FEATURE_NAMES, FeatureConfig, REFERENCE_PARAMS, featurize, simulate_curveset

cfg = FeatureConfig()
base = featurize(simulate_curveset(REFERENCE_PARAMS), cfg)

print(f"{'feature':11s} {'value':>13s}")
for name, value in zip(FEATURE_NAMES, base):
    print(f"{name:11s} {value:13.5g}")

perturbations = {
    "PHIG +50 mV": REFERENCE_PARAMS.replace(PHIG=REFERENCE_PARAMS.PHIG + 0.05),
    "CIT x2": REFERENCE_PARAMS.replace(CIT=REFERENCE_PARAMS.CIT * 2),
    "U0 +20%": REFERENCE_PARAMS.replace(U0=REFERENCE_PARAMS.U0 * 1.2),
    "ACV +50%": REFERENCE_PARAMS.replace(ACV=REFERENCE_PARAMS.ACV * 1.5),
}

print("\nlargest feature responses (percent change):")
for label, params in perturbations.items():
    vec = featurize(simulate_curveset(params), cfg)
    rel = 100.0 * (vec - base) / np.where(np.abs(base) > 0, np.abs(base), 1.0)
    top = np.argsort(-np.abs(rel))[:4]
    moved = ", ".join(f"{FEATURE_NAMES[i]} {rel[i]:+.1f}%" for i in top)
    print(f"  {label:12s} -> {moved}")
