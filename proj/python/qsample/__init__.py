"""Quaternion bandlimited kernels: spectra, sampling and verification."""

from ._qsample import (
    BandlimitedSignal,
    InputError,
    NystromOperator,
    PsqwsBasis,
    QftSeparable2D,
    Quaternion,
    QuadratureGrid,
    SampledSignal,
    Sinc1D,
    Tabulated,
    build,
    check_admissibility,
    concentration_ratio,
    eigensystem,
    eval_E,
    eval_S,
    gauss_legendre_grid,
    kernel_dim,
    kernel_name,
    kernel_trace,
    load_tabulated_csv,
    mode_signal,
    normality_defect,
    reconstruct_psqws,
    reconstruct_wsk,
    sample_lattice,
    synth,
    tensor_eigensystem,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
