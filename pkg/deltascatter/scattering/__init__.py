name = "scattering"
from .scattering_core import (
    DeltaSpike,
    DeltaSystem,
    Spectrum,
    delta_transfer_matrix,
    reflection_at,
    spectrum_over_grid,
    system_transfer_matrix,
    transfer_matrix_determinant,
    transmission_at,
    transmission_spectrum,
)
from .closed_form import (
    ClosedFormThreeDelta,
    ClosedFormTwoDelta,
    three_delta_b11,
    transmission_closed_1delta,
    transmission_closed_2delta,
    transmission_closed_3delta,
)
from .resonance_windows import (
    TargetTwoDelta,
    Window,
    build_windows,
    detect_peaks,
    global_window,
    n_resonances_in_range,
    predict_resonances,
    separation_for_resonance_count,
)
