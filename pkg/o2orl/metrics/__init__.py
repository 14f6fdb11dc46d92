from .metrics import (
    Metrics,
    aligned_curves,
    auc,
    bootstrap_ci,
    degradation,
    final_improvement,
    run_curve,
    run_metrics,
    summarize_metrics,
)
