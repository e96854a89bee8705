"""Latency and bandwidth of the two switching orders for 2 to 16 KB payloads."""

from nfcsim import ProtocolConfig, Variant, run_disabling_enabling, run_enabling_disabling

if __name__ == "__main__":
    de = ProtocolConfig(Variant.DISABLING_ENABLING, t_ms=700)
    ed = ProtocolConfig(Variant.ENABLING_DISABLING, t1_ms=310, t2_ms=100)
    print(f"{'KB':>3} {'DE ms':>8} {'ED ms':>8} {'DE kbps':>8} {'ED kbps':>8} {'latency':>8} {'bw':>6}")
    for n in range(1, 9):
        a, b = run_disabling_enabling(de, n), run_enabling_disabling(ed, n)
        print(f"{2 * n:3d} {a.latency_ms:8.0f} {b.latency_ms:8.0f} {a.bandwidth_kbps:8.2f} "
              f"{b.bandwidth_kbps:8.2f} {b.latency_ms / a.latency_ms:8.3f} "
              f"{b.bandwidth_kbps / a.bandwidth_kbps:6.2f}")
    print(f"\nper switch: DE {a.t_switching_avg_ms:.0f} ms, ED {b.t_switching_avg_ms:.0f} ms")
