"""Fit the readiness model to measured success rates and pick delays.

A measured rate r over 50 round trips (99 switches) becomes a per-switch
probability r ** (1/99).  The smallest delay whose rate clears the
threshold is recommended, then a Monte Carlo sweep checks that the fitted
model gives the measured rates back.
"""

import warnings

from nfcsim import ProtocolConfig, SimSettings, Variant, success_rate
from nfcsim.readiness import calibrate, default_table

if __name__ == "__main__":
    rows = default_table()
    model = calibrate(rows, threshold=0.80)
    print("recommended delays (ms):", model.recommended)
    print()
    print(f"{'variant':20} {'stage':5} {'delay':>6} {'measured':>9} {'simulated':>9}")
    base = {Variant.DISABLING_ENABLING: ProtocolConfig(Variant.DISABLING_ENABLING),
            Variant.ENABLING_DISABLING: ProtocolConfig(Variant.ENABLING_DISABLING)}
    settings = SimSettings(readiness=model, seed=1)
    for row in rows:
        held = {row.held_stage: row.held_delay_ms} if row.held_stage else {}
        cfg = base[row.variant].with_delays(**held, **{row.stage: row.delay_ms})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = success_rate(cfg, 50, settings=settings, experiments=5000)
        print(f"{row.variant.value:20} {row.stage:5} {row.delay_ms:6.0f} "
              f"{row.success_rate:9.2f} {est.rate:9.3f}")
