"""User placement, array geometry and Rician channel generation."""

from .geometry import angles_from_positions, element_indices, path_loss, steering_vector
from .rician import (
    ChannelRealization,
    Episode,
    UserSet,
    generate_episode,
    los_components,
    rician_channel,
    sample_users,
)

__all__ = [
    "angles_from_positions",
    "element_indices",
    "path_loss",
    "steering_vector",
    "ChannelRealization",
    "Episode",
    "UserSet",
    "generate_episode",
    "los_components",
    "rician_channel",
    "sample_users",
]
