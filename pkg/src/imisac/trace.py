"""Map from each signal-model relation to the code that implements it.

``OPERATIONS`` registers every public operation with the module that owns
it and whether it realises a modelling relation (as opposed to harness
plumbing). ``TRACE`` holds one entry per modelling operation and is
rendered to ``docs/paper-map.md`` by :func:`generate_trace_table`.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass


@dataclass(frozen=True)
class TraceEntry:
    model: str
    formula: str
    module: str
    operation: str


# operation -> (module, models a relation?)
OPERATIONS: dict[str, tuple[str, bool]] = {
    "binomial": ("codebook", True),
    "bits_for_selection": ("codebook", True),
    "rank_combination": ("codebook", False),
    "unrank_combination": ("codebook", False),
    "rank_permutation": ("codebook", True),
    "unrank_permutation": ("codebook", True),
    "scheme_rate": ("codebook", True),
    "build_lut": ("codebook", True),
    "steering": ("waveforms", True),
    "sparse_steering": ("waveforms", True),
    "fmcw_chirp": ("waveforms", True),
    "fh_subpulse": ("waveforms", True),
    "orthogonal_waveform_bank": ("waveforms", True),
    "rect_window": ("waveforms", True),
    "tx_subcarrier_im": ("subcarrier", True),
    "rx_null_detect": ("subcarrier", True),
    "tx_antenna_im": ("antenna", True),
    "user_matched_filter": ("antenna", True),
    "decode_antenna_im": ("antenna", True),
    "radar_receive": ("antenna", True),
    "tx_majorcom": ("freq_agile", True),
    "tx_grouped": ("freq_agile", True),
    "rx_freq_agile": ("freq_agile", True),
    "tx_frac": ("frac_fh", True),
    "rx_frac": ("frac_fh", True),
    "tx_fh": ("frac_fh", True),
    "rx_fh": ("frac_fh", False),
    "build_patterns": ("spim", True),
    "build_beamformer": ("spim", True),
    "spim_se": ("spim", True),
    "isac_se": ("spim", True),
    "tx_spim": ("spim", True),
    "decode_spim": ("spim", False),
    "beampattern": ("spim", True),
    "awgn": ("channel", True),
    "rayleigh_gains": ("channel", True),
    "synthesize_echo": ("channel", True),
    "geometric_channel": ("channel", True),
    "monte_carlo_ber": ("metrics", False),
    "se_sweep": ("metrics", True),
    "beampattern_sweep": ("metrics", True),
    "cmd_rate_table": ("cli", True),
    "cmd_ber": ("cli", False),
    "cmd_se": ("cli", True),
    "cmd_beampattern": ("cli", True),
    "cmd_roundtrip": ("cli", False),
    "generate_trace_table": ("trace", False),
}

TRACE: tuple[TraceEntry, ...] = (
    TraceEntry("binomial coefficient", "C(k,n) = n! / (k! (n-k)!)", "codebook", "binomial"),
    TraceEntry("index bits of a k-of-n selection", "floor(log2 C(k,n))", "codebook", "bits_for_selection"),
    TraceEntry("ordering of the selected waveforms", "floor(log2 k!) bits via Lehmer code",
               "codebook", "rank_permutation"),
    TraceEntry("inverse of the permutation mapping", "Lehmer digits -> order", "codebook",
               "unrank_permutation"),
    TraceEntry("bits per channel use of every scheme",
               "nominal closed form vs floor(log2 #patterns) per bit group", "codebook", "scheme_rate"),
    TraceEntry("bits-to-pattern lookup table", "LUT[i] = unrank(i), i < 2^bits", "codebook", "build_lut"),
    TraceEntry("ULA transmit steering vector", "a_n(theta) = exp(j 2 pi (d/lambda) n sin theta)",
               "waveforms", "steering"),
    TraceEntry("steering vector of the active subarray", "a_bar = Q a(theta)", "waveforms",
               "sparse_steering"),
    TraceEntry("baseband FMCW pulse", "s(t) = rect(t/T) exp(j pi kappa t^2), 0 <= t <= T~",
               "waveforms", "fmcw_chirp"),
    TraceEntry("frequency-hopping subpulse", "u(t,h) = exp(j 2 pi c delta_f t) v(t - h delta_t)",
               "waveforms", "fh_subpulse"),
    TraceEntry("orthogonal radar waveforms", "<Psi_n, Psi_m> = delta_nm", "waveforms",
               "orthogonal_waveform_bank"),
    TraceEntry("symbol gating window", "rect((t - b T0) / T0)", "waveforms", "rect_window"),
    TraceEntry("OFDM subcarrier-IM transmit signal",
               "x_S(t) = sum_b sum_k alpha_bk exp(j 2 pi f_k t) rect((t - b T0)/T0)",
               "subcarrier", "tx_subcarrier_im"),
    TraceEntry("null-subcarrier detection", "nulls = the K-K_s smallest |Y_bk|^2", "subcarrier",
               "rx_null_detect"),
    TraceEntry("antenna-IM transmit signal", "x(t,p) = Q(p)^T Psi(t), optionally PSK-scaled",
               "antenna", "tx_antenna_im"),
    TraceEntry("user matched filter", "y_C(p) = int y_C(t,p) Psi*(t) dt = alpha_C a_bar(phi,p) + n",
               "antenna", "user_matched_filter"),
    TraceEntry("Euclidean subarray decision", "i* = argmin_i ||y_C / alpha_C - a_bar_i(phi)||",
               "antenna", "decode_antenna_im"),
    TraceEntry("radar matched-filter stack",
               "y_R(p) = sum_r alpha_r (Q a(theta_r)) kron a_rx(theta_r) + n", "antenna",
               "radar_receive"),
    TraceEntry("full-array frequency-agile transmit signal",
               "x_n(t) = w_n(theta_r, f_n) exp(j 2 pi f_n t), w_n = exp(j 2 pi n f_n (d/c0) sin theta_r)",
               "freq_agile", "tx_majorcom"),
    TraceEntry("grouped-subarray transmit signal", "x~(t) = sum_g Q~_g w_g exp(j 2 pi f_g t)",
               "freq_agile", "tx_grouped"),
    TraceEntry("per-element frequency detection", "k_n = argmax_k |<y_n, tone_k>|^2", "freq_agile",
               "rx_freq_agile"),
    TraceEntry("chirp with phase, frequency and element IM",
               "x_n(t) = s(t - pT) exp(j 2 pi f_np t) exp(j varphi_np), f_np = f_c + k_np Df",
               "frac_fh", "tx_frac"),
    TraceEntry("block-sparse recovery of the chirp symbols", "xi = argmin ||y - Phi xi||^2",
               "frac_fh", "rx_frac"),
    TraceEntry("hybrid frequency-hopping transmit signal",
               "z_n(t,h) = exp(j vartheta_nh) u_n(t,h), zeta_n = n pi / N - angle(a_n(theta_r))",
               "frac_fh", "tx_fh"),
    TraceEntry("spatial-path pattern codebook", "S = 2^floor(log2 C(L_s, L_C)) selections B^(i)",
               "spim", "build_patterns"),
    TraceEntry("hybrid beamformer per pattern", "F_RF^(i) = [F_R | A_C B^(i)T], ||F_RF F_BB||_F^2 = N_S",
               "spim", "build_beamformer"),
    TraceEntry("spectral efficiency with path indexing",
               "log2(2^S / (2 s2)^Nr) - (1/S) sum_i log2 sum_j det(Sigma_i + Sigma_j)^-1",
               "spim", "spim_se"),
    TraceEntry("spectral efficiency of the single-pattern baseline", "log2 det Sigma_1", "spim",
               "isac_se"),
    TraceEntry("path-indexed hybrid transmit vector", "x^(i) = F_RF^(i) F_BB^(i) s", "spim",
               "tx_spim"),
    TraceEntry("transmit beampattern", "P(theta) = ||a(theta)^H F_RF F_BB||^2 / max", "spim",
               "beampattern"),
    TraceEntry("receiver noise", "n ~ CN(0, s2 I)", "channel", "awgn"),
    TraceEntry("flat Rayleigh fading per subcarrier", "h ~ CN(0, 1)", "channel", "rayleigh_gains"),
    TraceEntry("radar array output",
               "y(t,p) = sum_r alpha_r (a_bar(theta_r,p)^T Psi(t)) a_rx(theta_r) + n(t,p)",
               "channel", "synthesize_echo"),
    TraceEntry("multipath user channel", "H = sum_l beta_l a_rx(psi_l) a(phi_l)^H", "channel",
               "geometric_channel"),
    TraceEntry("spectral efficiency versus SNR", "E_H[SE(H, snr)] per SNR point", "metrics",
               "se_sweep"),
    TraceEntry("beampattern versus trade-off weight", "P_eta(theta) for each eta", "metrics",
               "beampattern_sweep"),
    TraceEntry("rate table output", "one row per scheme: nominal, exact", "cli", "cmd_rate_table"),
    TraceEntry("spectral efficiency curve output", "rows (snr_db, se_spim, se_isac)", "cli", "cmd_se"),
    TraceEntry("beampattern curve output", "rows (theta_deg, P_eta(theta) ...)", "cli",
               "cmd_beampattern"),
)


def check_trace(trace=TRACE, operations=OPERATIONS) -> list[str]:
    """Problems with the trace: missing, duplicate or unknown entries, or unresolvable names."""
    problems = []
    seen: dict[str, int] = {}
    for e in trace:
        seen[e.operation] = seen.get(e.operation, 0) + 1
        if e.operation not in operations:
            problems.append(f"trace entry for unregistered operation {e.operation}")
        elif operations[e.operation][0] != e.module:
            problems.append(f"{e.operation} traced to {e.module}, registered in {operations[e.operation][0]}")
    for op, (module, modeled) in operations.items():
        if modeled and seen.get(op, 0) != 1:
            problems.append(f"{op} has {seen.get(op, 0)} trace entries, expected 1")
        if not modeled and op in seen:
            problems.append(f"{op} is plumbing but has a trace entry")
        if not hasattr(importlib.import_module(f"imisac.{module}"), op):
            problems.append(f"imisac.{module} has no attribute {op}")
    keys = [(e.module, e.operation, e.formula) for e in trace]
    if len(set(keys)) != len(keys):
        problems.append("duplicate (module, operation, formula) rows")
    return problems


def generate_trace_table(trace=TRACE) -> str:
    """Markdown table of the trace; raises if the trace is incomplete."""
    problems = check_trace(trace)
    if problems:
        raise RuntimeError("trace check failed: " + "; ".join(problems))
    lines = ["# Model-to-code map", "",
             "One row per modelling relation and the function that implements it.", "",
             "| Model | Relation | Module | Operation |", "|---|---|---|---|"]
    for e in trace:
        formula = e.formula.replace("|", "\\|")
        lines.append(f"| {e.model} | `{formula}` | `imisac.{e.module}` | `{e.operation}` |")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    print(generate_trace_table(), end="")
