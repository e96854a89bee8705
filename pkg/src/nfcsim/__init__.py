"""Discrete-event simulator for NFC role-switching communication and computation offloading."""

from .clock import ActivityLog, Interval, SimClock, SimEvent, TraceRecord, format_trace
from .link import (ApduCommand, ApduResponse, DeactivationEvent, Device, DeviceId, LinkSession,
                   NfcLink, Role, RoleState)
from .protocols import (RoleSwitchDriver, SimSettings, SuccessEstimate, TransferReport,
                        run_disabling_enabling, run_enabling_disabling, run_hce_one_tap,
                        run_protocol, run_two_tap, success_rate)
from .readiness import (ReadinessCurve, ReadinessModel, calibrate, default_readiness,
                        per_switch_probability, recommend_delays)
from .runtime import (GALAXY_NOTE3, XIAOMI_MI3, DeviceProfile, TaskOutcome, crossover_analysis,
                      energy_of_trace, execute_local, offload_task)
from .storage import MessageStorage, assemble, decode_aid, encode_aid, fragment, transfer_message
from .timing import TimingModel, bandwidth_kbps, t_round_trip, t_switching_avg
from .variants import ProtocolConfig, Variant

__version__ = "0.1.0"
