"""Near-field interference of rotating symmetric-top molecules at a light grating.

Modules
-------
physics     constants, parameter records, rotor states and sin^2 expectations
rotor       classical free-top dynamics and time averages
thermal     thermal densities of the orientation average, Monte Carlo sampler
grating     optical potential, eikonal phase masks, kicks, transmission matrices
visibility  closed-form fringe visibilities and sweeps
talbot      brute-force three-grating simulation used as a reference
config, cli run configuration and command-line front end
"""

from .errors import (ConfigError, DomainError, KdtliError, NonHermitianError,
                     QuadratureError, SingularOrientationError, TruncationError,
                     TruncationWarning)
from .physics import (CONSTANTS, InterferometerSpec, LaserGratingSpec, LMaxPolicy,
                      MoleculeSpec, PhysicalConstants, RotEnsemble, RotQuantumNumbers,
                      ShapeRatio, de_broglie_wavelength, eikonal_phase, power_for_phase,
                      q_lm_linear, q_lmk, q_lmk_oracle, rotational_energy, talbot_length,
                      thermal_ensemble, thermal_weight)
from .rotor import (RotorPhasePoint, TemporalAverages, hamiltonian, integrate_rotor,
                    r_tilde, relative_frequencies, rotation_period, temporal_average_r)
from .thermal import (SampleSet, cdf_r_uspace, cumulative_table, expectation_over_pth, f_th,
                      ks_distance, ks_two_sample, p_th, q_density_u, sample_thermal)
from .grating import (Ensemble, PhaseMask, PotentialMatrix, apply_classical_transform,
                      classical_kick_diabatic, classical_kick_free, classical_torque_diabatic,
                      diabatic_phase, diffraction_orders, free_rotor_phase, grating_potential,
                      laser_intensity, transmission_matrix)
from .visibility import (FringeResult, Mode, Setup, SweepSpec, SweepVariable, bessel_j2,
                         classical_visibility, quantum_visibility_integral,
                         quantum_visibility_sum, run_sweep, velocity_average)
from .talbot import (FringePattern, OrderSpaceState, extract_sinusoidal_visibility,
                     oracle_visibility, simulate_kdtli)

__version__ = "0.1.0"
