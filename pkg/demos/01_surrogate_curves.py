"""Simulate the surrogate device and look at its characteristics.

Generates the three stored curves plus an output-characteristic family for
the reference device, prints headline figures of merit, and writes curve
CSVs and SVG plots alongside this script's output directory.
"""

from pathlib import Path

from fetfit import (
    REFERENCE_PARAMS,
    differentiate,
    simulate_curveset,
    simulate_ids_vds,
    write_curve_csv,
)
from fetfit.svg import write_overlay_svg

out = Path(__file__).with_suffix("") .name + "_out"
out = Path(out)
out.mkdir(exist_ok=True)

print("reference device:")
for name, value in REFERENCE_PARAMS.to_dict().items():
    print(f"  {name:7s} = {value:g}")

cs = simulate_curveset(REFERENCE_PARAMS)
ion = cs.ids_high.y[-1]
ioff = cs.ids_high.y[0]
print(f"\nIon  (Vgs=0.8, Vds=0.7) = {ion:.3e} A")
print(f"Ioff (Vgs=0.0, Vds=0.7) = {ioff:.3e} A")
print(f"Ion/Ioff                = {ion / ioff:.3e}")
print(f"Cgg range               = {cs.cgg_low.y.min():.3f} .. {cs.cgg_low.y.max():.3f} fF")

write_curve_csv(cs.ids_low, out / "ids_vgs_low.csv")
write_curve_csv(cs.ids_high, out / "ids_vgs_high.csv")
write_curve_csv(cs.cgg_low, out / "cgg_vgs.csv")

gm = cs.gm_low()
gm2 = differentiate(cs.ids_low, 2)
print(f"peak Gm  (Vds=0.05)     = {gm.y.max():.3e} A/V")
print(f"peak Gm' (Vds=0.05)     = {gm2.y.max():.3e} A/V^2")

for vgs_curve in simulate_ids_vds(REFERENCE_PARAMS, [0.5, 0.6, 0.7]):
    write_curve_csv(vgs_curve, out / f"ids_vds_vgs{vgs_curve.vgs:g}.csv")

# plot each stored curve against itself just to visualize the shape
write_overlay_svg(out / "ids_low.svg", cs.ids_low.x, cs.ids_low.y, cs.ids_low.y,
                  title="Ids-Vgs, Vds=0.05 V", x_label="Vgs (V)", y_label="Ids (A)",
                  log_y=True)
write_overlay_svg(out / "cgg.svg", cs.cgg_low.x, cs.cgg_low.y, cs.cgg_low.y,
                  title="Cgg-Vgs", x_label="Vgs (V)", y_label="Cgg (fF)")
print(f"\ncurves and plots written to {out}/")
