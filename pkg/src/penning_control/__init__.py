"""Coherent control of Penning and associative ionization cross sections.

Angular-momentum algebra, state preparation, the beam-axis selection rule,
bilinear cross-section composition and (eta, xi) control landscapes.
"""

__version__ = "0.1.0"

from .angmom import clebsch_gordan, d_matrix, wigner_d
from .compose import (
    ChannelSigma,
    ChannelTable,
    Composer,
    CompositionResult,
    OmegaKey,
    SpinKey,
    WidthProfile,
    compose,
    map_to_omega,
    split_width,
)
from .errors import AxisError, ChannelError, DomainError, NormError, PhysicsError
from .landscape import GridSpec, Objective, phase_only_factor, ratio_surface, refine_extremum, scan
from .states import (
    AngLabel,
    Axis,
    ControlParams,
    CoupledState,
    Kinematics,
    ProductState,
    Superposition,
    couple,
    hopf_state,
    rotate_axis,
    to_center_of_mass,
)
from .symmetry import ChannelPairKey, interference_allowed, rotate_about_beam, verify_rotation_invariance
