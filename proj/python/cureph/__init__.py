"""Cure-rate phase-type survival models.

Thin re-export of the compiled core: phase-type cure models with a death and
an immunity absorbing state, inhomogeneous time transforms, censored-data EM
estimation (plain and mixture-of-experts regression), Kaplan-Meier /
Nelson-Aalen estimators, automatic dimension selection, and Cox-Snell
residual diagnostics.
"""

from cureph._core import (
    CureDecomposition,
    CurephError,
    FitConfig,
    FitReport,
    MoeCureModel,
    PhaseTypeCureModel,
    ResidualSet,
    SelectionReport,
    SelectionRow,
    StepFunctionCurve,
    SurvivalDataset,
    TransformFamily,
    auto_select,
    cs_residuals,
    cumulative_hazard_plot_data,
    cvm_criterion,
    cvm_criterion_scaled,
    em_fit,
    expm,
    green_solve,
    iph_density,
    iph_survival,
    kaplan_meier,
    load_model,
    loglikelihood,
    make_structure,
    modified_cs_residuals,
    moe_em_fit,
    nelson_aalen,
    precalibrate,
    read_dataset,
    save_model,
    simulate_absorption,
    simulate_censored,
    softmax_pi,
    van_loan_integral,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
