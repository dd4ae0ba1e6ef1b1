"""Simulator and analysis toolkit for EPR-pair challenge-response authentication.

Layers:

- ``states``: exact few-qubit linear algebra (pure/mixed states, the three
  protocol gates, basis tests, partial trace, fidelity, trace distance).
- ``protocol``: the honest session state machine (key setup, bilateral
  rotation, challenge issue/encode/decode, abort and key-discard semantics).
- ``adversary``: every eavesdropper strategy as a channel-interception policy,
  with exact-probability counterparts.
- ``analysis``: closed-form security/robustness oracles and brute-force
  cross-validation reports.
- ``montecarlo``: seeded trial runner with confidence intervals and oracle
  z-scores.
- ``cli``: scenario files in, deterministic JSON/CSV reports out.
"""
from .adversary import (
    EveState,
    EveStrategy,
    FixedAngleImpersonate,
    FixedAngleKeySteal,
    GhzInject,
    InterceptForward,
    InterceptReturn,
    QuarterPiKeySteal,
    RandomImpersonation,
    ResponseEnsemble,
    best_key_steal,
    key_steal_fidelity,
    strategy_from_spec,
)
from .analysis import (
    OptimalAngle,
    OracleReport,
    RobustnessReport,
    detection_bound,
    ghz_detection_probability,
    impersonation_fidelity,
    impersonation_success_probability,
    key_theft_success_probability,
    optimal_fixed_angle,
    robustness_bounds,
)
from .montecarlo import Estimate, Scenario, StrategySpec, SweepPoint, run, sweep
from .protocol import (
    AuthKey,
    Challenge,
    ChallengeRecord,
    RegisterMap,
    RoundResult,
    SessionConfig,
    bilateral_rotate,
    make_challenge,
    make_real_challenge,
    run_session,
    setup_keys,
)
from .states import (
    MixedState,
    Party,
    PureState,
    QubitLabel,
    apply_cnot,
    apply_not,
    apply_rotation,
    bell_pair,
    fidelity,
    make_pure,
    measure_in_basis,
    partial_trace,
    tensor,
    trace_distance,
)

__version__ = "0.1.0"
