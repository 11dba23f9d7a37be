"""Event-timed density-matrix execution of distributed circuits.

Every event occupies simulated time from a duration table, and after each
advance all register qubits idle-depolarize for exactly that long, so
decoherence tracks the timeline rather than gate counts.  Ebit requests
install a fresh Werner pair once the 1/R distribution window has elapsed;
the pair therefore starts undecayed and ages only from then on.

Measurements come in two modes.  The default, ``mixture``, never samples:
a measurement is the dephasing channel on the measured qubit, conditional
corrections become controlled gates with the (classical, diagonal) measured
qubit as control, and re-initialization traces the record out.  Runs are
bit-for-bit reproducible and equal the probability-weighted average over
explicit outcomes.  ``sampled`` mode draws outcomes from a seeded generator
(or takes them from ``forced_outcomes``) and projects, which is the natural
way to inspect a single protocol branch.

Scheduling is sequential by default: one global clock, every event advances
it once.  The ``layered`` mode packs resource-disjoint events into slots
whose duration is the slot maximum, as a sensitivity study for how much the
strictly serial timeline overstates decoherence.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .channels import GateErrorParam, MemoryParam, WernerParam, memory_depol, noisy_cnot, werner_state
from .compiler import (
    ClassicalMessage,
    ConditionalCorrection,
    DistributedCircuit,
    EbitRequest,
    Event,
    LocalGate,
    Measure,
    Reinit,
    ResourceCount,
    count_resources,
)
from .gates import Gate, gate_unitary
from .qasm import Circuit, lower_to_basis
from .states import (
    DensityMatrix,
    PureState,
    apply_gate_pure,
    apply_unitary,
    apply_unitary_pure,
    bell_state,
    dephase,
    project,
    project_pure,
    reduce_to_wires,
    replace_subsystem,
)

DEFAULT_MAX_QUBITS = 14

_EBIT_RATE_HZ = 182.0
_LINK_LENGTH_M = 2.0
_SIGNAL_SPEED_M_PER_S = 2e8


class EngineError(Exception):
    pass


@dataclass(frozen=True)
class DurationTable:
    """Wall-clock cost of each event kind, in seconds.

    Defaults are the state-of-the-art trapped-ion figures: 135 us / 600 us
    gates, 6 ms readout, 182 Hz entanglement rate, and a 2 m inter-QPU link
    at half lightspeed in fibre (10 ns per classical message).
    """

    t_1q: float = 135e-6
    t_2q: float = 600e-6
    t_meas: float = 6e-3
    t_ebit: float = 1.0 / _EBIT_RATE_HZ
    t_classical: float = _LINK_LENGTH_M / _SIGNAL_SPEED_M_PER_S

    def __post_init__(self) -> None:
        for name in ("t_1q", "t_2q", "t_meas", "t_ebit", "t_classical"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_hardware(
        cls,
        *,
        t_1q: float = 135e-6,
        t_2q: float = 600e-6,
        t_meas: float = 6e-3,
        ebit_rate_hz: float = _EBIT_RATE_HZ,
        link_length_m: float = _LINK_LENGTH_M,
        signal_speed_m_per_s: float = _SIGNAL_SPEED_M_PER_S,
    ) -> "DurationTable":
        if ebit_rate_hz <= 0.0:
            raise ValueError("entanglement rate must be positive")
        if signal_speed_m_per_s <= 0.0:
            raise ValueError("signal speed must be positive")
        return cls(
            t_1q=t_1q,
            t_2q=t_2q,
            t_meas=t_meas,
            t_ebit=1.0 / ebit_rate_hz,
            t_classical=link_length_m / signal_speed_m_per_s,
        )

    def of(self, event: Event) -> float:
        if isinstance(event, LocalGate):
            return self.t_2q if len(event.gate.qubits) == 2 else self.t_1q
        if isinstance(event, EbitRequest):
            return self.t_ebit
        if isinstance(event, Measure):
            return self.t_meas
        if isinstance(event, ClassicalMessage):
            return self.t_classical
        if isinstance(event, ConditionalCorrection):
            # Fixed slot regardless of whether the Pauli fires: keeps the
            # timeline identical across branches and between modes.
            return self.t_1q
        if isinstance(event, Reinit):
            return 0.0
        raise TypeError(f"unknown event {event!r}")


_MODES_MEASUREMENT = ("mixture", "sampled")
_MODES_SCHEDULE = ("sequential", "layered")
_BELL_NAMES = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class SimConfig:
    """Noise, timing, and execution-mode knobs for one simulation."""

    werner: WernerParam = WernerParam(1.0)
    gate_err: GateErrorParam = GateErrorParam(0.0)
    memory: MemoryParam = MemoryParam(0.0)
    durations: DurationTable = DurationTable()
    measurement_mode: str = "mixture"
    seed: int | None = None
    schedule_mode: str = "sequential"
    max_qubits: int = DEFAULT_MAX_QUBITS
    ebit_state: str | None = None  # force a pure Bell pair instead of werner(F_w)

    def __post_init__(self) -> None:
        if self.measurement_mode not in _MODES_MEASUREMENT:
            raise ValueError(f"measurement_mode must be one of {_MODES_MEASUREMENT}")
        if self.schedule_mode not in _MODES_SCHEDULE:
            raise ValueError(f"schedule_mode must be one of {_MODES_SCHEDULE}")
        if self.ebit_state is not None and self.ebit_state not in _BELL_NAMES:
            raise ValueError(f"ebit_state must be one of {_BELL_NAMES}")
        if self.max_qubits < 1:
            raise ValueError("max_qubits must be positive")


@dataclass(frozen=True)
class TelemetryRow:
    event_index: int
    event_kind: str
    start_s: float
    duration_s: float


@dataclass(frozen=True)
class SimResult:
    rho_out: DensityMatrix
    elapsed: float
    telemetry: tuple[TelemetryRow, ...]
    resources: ResourceCount
    outcomes: dict[str, int] = field(default_factory=dict)
    branch_probability: float | None = None


def telemetry_csv(rows) -> str:
    """Render telemetry rows as CSV text (event_index, event_kind, start_s, duration_s)."""
    out = io.StringIO()
    out.write("event_index,event_kind,start_s,duration_s\n")
    for r in rows:
        out.write(f"{r.event_index},{r.event_kind},{r.start_s:.12g},{r.duration_s:.12g}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------


def _event_resources(ev: Event, tag_home: dict[str, int]) -> tuple:
    if isinstance(ev, LocalGate):
        return tuple(ev.gate.qubits)
    if isinstance(ev, EbitRequest):
        return (ev.qubit_a, ev.qubit_b)
    if isinstance(ev, Measure):
        return (ev.qubit, ev.tag)
    if isinstance(ev, ClassicalMessage):
        return ev.tags
    if isinstance(ev, ConditionalCorrection):
        # A correction reads the measured qubit's record, so it must stay
        # ordered against reinitialization of that qubit as well.
        home = tag_home.get(ev.tag)
        if home is None or home == ev.qubit:
            return (ev.qubit, ev.tag)
        return (ev.qubit, ev.tag, home)
    if isinstance(ev, Reinit):
        return (ev.qubit,)
    raise TypeError(f"unknown event {ev!r}")


@dataclass(frozen=True)
class _Layer:
    start: float
    duration: float
    items: tuple[tuple[int, Event], ...]  # (event index, event)


def _build_layers(dc: DistributedCircuit, durations: DurationTable, schedule_mode: str) -> list[_Layer]:
    if schedule_mode == "sequential":
        layers = []
        clock = 0.0
        for idx, ev in enumerate(dc.events):
            dt = durations.of(ev)
            layers.append(_Layer(clock, dt, ((idx, ev),)))
            clock += dt
        return layers

    # Layered: greedy ASAP packing; events conflict when they share a qubit
    # or a measurement tag.  Slot duration is the slowest member.
    tag_home = {ev.tag: ev.qubit for ev in dc.events if isinstance(ev, Measure)}
    slot_of: dict = {}
    buckets: list[list[tuple[int, Event]]] = []
    for idx, ev in enumerate(dc.events):
        res = _event_resources(ev, tag_home)
        slot = 0
        for r in res:
            if r in slot_of:
                slot = max(slot, slot_of[r] + 1)
        for r in res:
            slot_of[r] = slot
        while len(buckets) <= slot:
            buckets.append([])
        buckets[slot].append((idx, ev))
    layers = []
    clock = 0.0
    for items in buckets:
        dt = max(durations.of(ev) for _, ev in items)
        layers.append(_Layer(clock, dt, tuple(items)))
        clock += dt
    return layers


def elapsed_time(dc: DistributedCircuit, cfg: SimConfig) -> float:
    """Total simulated seconds for ``dc`` under the config's schedule mode."""
    layers = _build_layers(dc, cfg.durations, cfg.schedule_mode)
    if not layers:
        return 0.0
    return layers[-1].start + layers[-1].duration


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

_ZERO_1Q = DensityMatrix(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))


class _Run:
    def __init__(self, dc: DistributedCircuit, cfg: SimConfig, forced_outcomes: dict[str, int] | None):
        self.dc = dc
        self.cfg = cfg
        self.forced = dict(forced_outcomes or {})
        self.sampled = cfg.measurement_mode == "sampled"
        self.rng = np.random.default_rng(cfg.seed) if self.sampled else None
        self.tag_qubit: dict[str, int] = {}
        self.outcomes: dict[str, int] = {}
        self.branch_p = 1.0
        self.live_comm: set[int] = set()
        self.rho: DensityMatrix | None = None
        if cfg.ebit_state is None:
            self.ebit = werner_state(cfg.werner.f_w)
        else:
            self.ebit = DensityMatrix.from_pure(bell_state(cfg.ebit_state))

    def perform(self, ev: Event) -> None:
        if isinstance(ev, LocalGate):
            self._local_gate(ev.gate)
        elif isinstance(ev, Measure):
            self._measure(ev)
        elif isinstance(ev, ClassicalMessage):
            pass
        elif isinstance(ev, ConditionalCorrection):
            self._correction(ev)
        elif isinstance(ev, Reinit):
            self.rho = replace_subsystem(self.rho, (ev.qubit,), _ZERO_1Q)
            self.live_comm.discard(ev.qubit)
        else:
            raise TypeError(f"unknown event {ev!r}")

    def _local_gate(self, gate: Gate) -> None:
        if gate.kind == "cx":
            self.rho = noisy_cnot(self.rho, gate.qubits[0], gate.qubits[1], self.cfg.gate_err.eps_cnot)
        else:
            self.rho = apply_unitary(self.rho, gate_unitary(gate), gate.qubits)

    def _measure(self, ev: Measure) -> None:
        if self.sampled:
            p1, _ = project(self.rho, ev.qubit, 1)
            if ev.tag in self.forced:
                outcome = self.forced[ev.tag]
                if outcome not in (0, 1):
                    raise EngineError(f"forced outcome for '{ev.tag}' must be 0 or 1")
            else:
                outcome = int(self.rng.random() < p1)
            p_out = p1 if outcome == 1 else 1.0 - p1
            if p_out <= 1e-12:
                raise EngineError(
                    f"outcome {outcome} for tag '{ev.tag}' has probability {p_out:.3g}"
                )
            _, self.rho = project(self.rho, ev.qubit, outcome)
            self.outcomes[ev.tag] = outcome
            self.branch_p *= p_out
        else:
            self.rho = dephase(self.rho, ev.qubit)
            self.tag_qubit[ev.tag] = ev.qubit

    def _correction(self, ev: ConditionalCorrection) -> None:
        pauli = gate_unitary(Gate(ev.pauli, (0,)))
        if self.sampled:
            if ev.tag not in self.outcomes:
                raise EngineError(f"correction reads unmeasured tag '{ev.tag}'")
            if self.outcomes[ev.tag] == 1:
                self.rho = apply_unitary(self.rho, pauli, (ev.qubit,))
        else:
            ctrl = self.tag_qubit.get(ev.tag)
            if ctrl is None:
                raise EngineError(f"correction reads unmeasured tag '{ev.tag}'")
            controlled = np.eye(4, dtype=complex)
            controlled[2:, 2:] = pauli
            self.rho = apply_unitary(self.rho, controlled, (ctrl, ev.qubit))

    def install_ebit(self, ev: EbitRequest) -> None:
        for q in (ev.qubit_a, ev.qubit_b):
            if q in self.live_comm:
                raise EngineError(
                    f"ebit request would overwrite live state on communication qubit {q}"
                )
        self.rho = replace_subsystem(self.rho, (ev.qubit_a, ev.qubit_b), self.ebit)
        self.live_comm.update((ev.qubit_a, ev.qubit_b))

    def decay_all(self, dt: float) -> None:
        r = self.cfg.memory.r
        if dt <= 0.0 or r <= 0.0:
            return
        for w in range(self.dc.n_total):
            self.rho = memory_depol(self.rho, w, dt, r)


def simulate(
    dc: DistributedCircuit,
    input_state: PureState,
    cfg: SimConfig | None = None,
    forced_outcomes: dict[str, int] | None = None,
) -> SimResult:
    """Run ``dc`` on ``input_state`` and return the reduced output state.

    The input covers the processing qubits only; communication qubits start
    in |0>.  The returned ``rho_out`` is reduced onto the logical wires in
    logical order, following any teleported relocations, with everything
    else traced out.  ``forced_outcomes`` (sampled mode) pins named
    measurement tags to chosen branches for protocol inspection.
    """
    cfg = cfg or SimConfig()
    if forced_outcomes and cfg.measurement_mode != "sampled":
        raise EngineError("forced outcomes require measurement_mode='sampled'")
    if dc.n_total > cfg.max_qubits:
        raise EngineError(
            f"register of {dc.n_total} qubits exceeds the configured cap of {cfg.max_qubits}"
        )
    if input_state.n_qubits != dc.n_processing:
        raise EngineError(
            f"input covers {input_state.n_qubits} qubits, circuit has {dc.n_processing}"
        )
    input_state.validate()

    run = _Run(dc, cfg, forced_outcomes)
    n_comm = dc.n_total - dc.n_processing
    full = input_state.tensor(PureState.zero(n_comm)) if n_comm else input_state
    run.rho = DensityMatrix.from_pure(full)

    telemetry: list[TelemetryRow] = []
    layers = _build_layers(dc, cfg.durations, cfg.schedule_mode)
    for layer in layers:
        pending_ebits: list[EbitRequest] = []
        for idx, ev in layer.items:
            telemetry.append(TelemetryRow(idx, ev.kind, layer.start, cfg.durations.of(ev)))
            if isinstance(ev, EbitRequest):
                pending_ebits.append(ev)
            else:
                run.perform(ev)
        run.decay_all(layer.duration)
        # Fresh pairs materialize at the end of the distribution window and
        # have not idled yet, so they are installed after the decay step.
        for ev in pending_ebits:
            run.install_ebit(ev)

    elapsed = (layers[-1].start + layers[-1].duration) if layers else 0.0
    rho_out = reduce_to_wires(run.rho, dc.result_wires)
    return SimResult(
        rho_out=rho_out,
        elapsed=elapsed,
        telemetry=tuple(telemetry),
        resources=count_resources(dc),
        outcomes=dict(run.outcomes),
        branch_probability=run.branch_p if run.sampled else None,
    )


# ---------------------------------------------------------------------------
# Noiseless reference
# ---------------------------------------------------------------------------


def _ideal_circuit(circuit: Circuit, input_state: PureState) -> PureState:
    psi = input_state
    for g in lower_to_basis(circuit).ops:
        if g.kind in ("measure", "barrier"):
            continue
        psi = apply_gate_pure(psi, g)
    return psi


_H = gate_unitary(Gate("h", (0,)))
_CX = gate_unitary(Gate("cx", (0, 1)))


def _ideal_distributed(dc: DistributedCircuit, input_state: PureState) -> PureState:
    n_comm = dc.n_total - dc.n_processing
    psi = input_state.tensor(PureState.zero(n_comm)) if n_comm else input_state
    outcomes: dict[str, int] = {}
    for ev in dc.events:
        if isinstance(ev, LocalGate):
            psi = apply_gate_pure(psi, ev.gate)
        elif isinstance(ev, EbitRequest):
            # The pair is |00> here, so H + CNOT prepares the ideal Bell state.
            psi = apply_unitary_pure(psi, _H, (ev.qubit_a,))
            psi = apply_unitary_pure(psi, _CX, (ev.qubit_a, ev.qubit_b))
        elif isinstance(ev, Measure):
            # Any branch gives the same corrected output noiselessly; take the
            # likelier one so zero-probability branches are never chosen.
            p1, _ = project_pure(psi, ev.qubit, 1)
            outcome = int(p1 > 0.5)
            _, psi = project_pure(psi, ev.qubit, outcome)
            outcomes[ev.tag] = outcome
        elif isinstance(ev, ConditionalCorrection):
            if outcomes[ev.tag] == 1:
                psi = apply_unitary_pure(psi, gate_unitary(Gate(ev.pauli, (0,))), (ev.qubit,))
        elif isinstance(ev, Reinit):
            p1, _ = project_pure(psi, ev.qubit, 1)
            if p1 > 0.5:  # measured qubit sits in |1>, flip it back to |0>
                psi = apply_unitary_pure(psi, gate_unitary(Gate("x", (0,))), (ev.qubit,))
        elif isinstance(ev, ClassicalMessage):
            pass
        else:
            raise TypeError(f"unknown event {ev!r}")
    return _extract_wires(psi, dc.n_total, dc.result_wires)


def _extract_wires(psi: PureState, n_total: int, wires: tuple[int, ...]) -> PureState:
    t = psi.amplitudes.reshape((2,) * n_total)
    others = [w for w in range(n_total) if w not in set(wires)]
    t = np.transpose(t, axes=list(wires) + others)
    flat = t.reshape(1 << len(wires), -1)
    col_mass = np.sum(np.abs(flat) ** 2, axis=0)
    col = int(np.argmax(col_mass))
    out = flat[:, col]
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > 1e-9:
        raise EngineError(
            "result wires are entangled with discarded qubits; "
            f"residual norm {norm:.12f}"
        )
    return PureState(out / norm)


def ideal_output(target: Circuit | DistributedCircuit, input_state: PureState) -> PureState:
    """Noiseless reference state over the logical wires, for fidelity_pure."""
    input_state.validate()
    if isinstance(target, Circuit):
        if input_state.n_qubits != target.n_qubits:
            raise EngineError(
                f"input covers {input_state.n_qubits} qubits, circuit has {target.n_qubits}"
            )
        return _ideal_circuit(target, input_state)
    if input_state.n_qubits != target.n_processing:
        raise EngineError(
            f"input covers {input_state.n_qubits} qubits, circuit has {target.n_processing}"
        )
    return _ideal_distributed(target, input_state)
