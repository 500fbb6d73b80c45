"""Zero-forcing digital precoding and the perfect-CSI reference pipeline."""

from .zf import (
    default_regularization,
    equivalent_channel,
    oracle_phases,
    reference_pipeline,
    zf_precoder,
)

__all__ = [
    "default_regularization",
    "equivalent_channel",
    "oracle_phases",
    "reference_pipeline",
    "zf_precoder",
]
