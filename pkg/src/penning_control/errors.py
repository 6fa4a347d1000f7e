"""Exception hierarchy.

Everything that signals a physically meaningless request derives from
:class:`PhysicsError`, which the command line maps to exit status 3.
"""


class PhysicsError(ValueError):
    pass


class DomainError(PhysicsError):
    """Invalid angular-momentum quantum numbers."""


class AxisError(PhysicsError):
    """State quantized along the wrong axis for the requested operation."""


class ChannelError(PhysicsError, KeyError):
    """A populated channel has no entry in the channel table."""

    def __str__(self) -> str:
        # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""


class NormError(PhysicsError):
    """Amplitudes or branching ratios violate their normalization."""
