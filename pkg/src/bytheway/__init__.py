"""Training-free temporal attention transforms for video diffusion models.

Temporal self-guidance blends later decoder blocks' temporal attention
toward an anchor block; Fourier motion enhancement scales the high-frequency
band of each attention row to raise its energy while keeping row sums.
"""

__version__ = "0.1.0"

from .attention import (AttnMapBatch, EnergyReport, ValidationResult, disparity, energy,
                        identity_map, random_map, site_energies, uniform_map, validate)
from .errors import (BtwError, BtwWarning, FormatError, InvalidParameterError,
                     InvalidShapeError, NumericContractError, SymmetryError)
from .fourier import (BandMask, SpectrumBatch, adaptive_beta, band_energies, critical_beta,
                      dft_rows, idft_rows, scale_bands, scale_high)
from .guidance import GuidanceConfig, blend, self_guide, upsample_spatial
from .harness import (FlowField, SweepResult, SyntheticVideo, block_matching_flow,
                      energy_motion_sweep, gen_video, reconstruct, temporal_variation,
                      toy_temporal_attention)
from .pipeline import (PRESETS, BlockTrace, BtwParams, apply_block, apply_step, preset,
                       should_apply)
from .tensor_io import load_map, read_tensor, save_map, write_tensor
