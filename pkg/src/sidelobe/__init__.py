"""Deterministic mmWave side-lobe eavesdropping simulator."""

from .arraymodel import (ArtifactModel, Direction, PhasedArray, apply_artifacts,
                         array_factor, gain_db, measured_like, steer)
from .attack import (AttackConfig, attack_derandomize, attack_noise_cancel,
                     attack_single, evaluate_pair, parse_attack)
from .baseband import PacketModel, SymbolTrace, demodulate, psr_from_ser, transmit
from .defense import (DefenseConfig, build_codebook, parse_defense,
                      rf_noise_precoders, weight_schedule)
from .errors import CalibrationError, ConfigurationError, EstimationError
from .linkabstraction import RateProfile, calibrate, psr_from_snr
from .propagation import LinkBudget, fspl_db, noise_floor_dbm, snr_db
from .scenario import Pose, Scenario, cell_centers, geometry_to, preset
from .sweep import (EavesdropReport, PsrGrid, area_above, area_vs_threshold_curve,
                    connected_components, sweep_psr)

__version__ = "0.1.0"
