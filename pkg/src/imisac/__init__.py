"""Index-modulation waveforms for joint radar sensing and communication.

Schemes: OFDM subcarrier IM, sparse-array antenna IM, frequency-agile
(full and grouped array), chirp-based phase/frequency/element IM,
frequency-hopping IM, and spatial-path IM with hybrid beamforming.
"""

from .codebook import CodebookError, RateReport, scheme_rate
from .channel import RngStream, awgn, rayleigh_gains, stream_id
from .metrics import beampattern_sweep, monte_carlo_ber, se_sweep

__all__ = ["CodebookError", "RateReport", "RngStream", "awgn", "beampattern_sweep",
           "monte_carlo_ber", "rayleigh_gains", "scheme_rate", "se_sweep", "stream_id"]
__version__ = "0.1.0"
