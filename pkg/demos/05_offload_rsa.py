"""Offload RSA-2048 key generation and encryption, then decrypt the result.

The offloadee returns the ciphertext and both keys in two APDU responses;
the main device decrypts with the received private key to check that
nothing was lost on the way.
"""

from nfcsim import ProtocolConfig, Variant
from nfcsim.runtime import GALAXY_NOTE3, XIAOMI_MI3, execute_local, offload_task
from nfcsim.workloads.rsa import RsaTask, rsa_decrypt, unframe_rsa_result

if __name__ == "__main__":
    ed = ProtocolConfig(Variant.ENABLING_DISABLING, t1_ms=310, t2_ms=100)
    task = RsaTask(b"offloaded over nfc", 2048, seed=3)

    local = execute_local(XIAOMI_MI3, task)
    off = offload_task(XIAOMI_MI3, GALAXY_NOTE3, task, ed)
    print(f"slow phone alone:     {local.wall_time_ms:9.0f} ms")
    print(f"offloaded to fast:    {off.wall_time_ms:9.0f} ms "
          f"({off.wall_time_ms / local.wall_time_ms:.2f} of local)")

    local_e = execute_local(GALAXY_NOTE3, task)
    off_e = offload_task(GALAXY_NOTE3, XIAOMI_MI3, task, ed)
    print(f"main-device energy:   {local_e.main_energy_mj:9.0f} mJ local, "
          f"{off_e.main_energy_mj:.0f} mJ offloaded "
          f"({100 * off_e.main_energy_mj / local_e.main_energy_mj:.1f} %)")

    ct, pub, priv = unframe_rsa_result(off.chunks, task.key_length)
    print(f"received {len(ct)}-byte ciphertext, chunk sizes {[len(c) for c in off.chunks]}")
    print("decrypted on the main device:", rsa_decrypt(ct, priv))
