"""When does shipping an N Queens board to another phone pay off?

Small boards finish locally before the link has even switched roles once;
from some N on the compute time dominates and offloading saves both time
and main-device energy.
"""

from nfcsim import ProtocolConfig, Variant
from nfcsim.runtime import GALAXY_NOTE3, XIAOMI_MI3, crossover_analysis

if __name__ == "__main__":
    ed = ProtocolConfig(Variant.ENABLING_DISABLING, t1_ms=310, t2_ms=100)

    energy = crossover_analysis(GALAXY_NOTE3, XIAOMI_MI3, "nqueens", range(9, 16), ed)
    print("main = galaxy_note3, offloadee = xiaomi_mi3 (energy on the main device)")
    print(f"{'N':>3} {'local mJ':>11} {'offload mJ':>11} {'ratio':>7}")
    for r in energy.rows:
        print(f"{r.size:3d} {r.local_energy_mj:11.1f} {r.offload_energy_mj:11.1f} {r.ratio:7.2f}")
    print(f"offloading starts to save energy at N = {energy.crossover}\n")

    time = crossover_analysis(XIAOMI_MI3, GALAXY_NOTE3, "nqueens", range(9, 16), ed)
    print("main = xiaomi_mi3, offloadee = galaxy_note3 (wall time)")
    print(f"{'N':>3} {'local ms':>11} {'offload ms':>11}")
    for r in time.rows:
        print(f"{r.size:3d} {r.local_time_ms:11.0f} {r.offload_time_ms:11.0f}")
