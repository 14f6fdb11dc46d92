from pathlib import Path
from typing import Optional, Tuple, Union

import pandas as pd
import seaborn as sns
from matplotlib.pyplot import Figure

FIGURE_FORMAT: str = "svg"


def _new_axis(figsize: Tuple[int, int], title: str):
    figure = Figure(figsize=figsize)
    axis = figure.subplots()
    axis.set_title(title)
    return figure, axis


def learning_curve_figure(
    curves: pd.DataFrame,
    title: str = "",
    figsize: Tuple[int, int] = (8, 5),
    n_boot: int = 1000,
    seed: int = 0,
) -> Figure:
    """Create figure of mean learning curves with bootstrap confidence bands.

    Args:
        curves: Long frame with columns algorithm, seed, step and return_norm.
        title: Title of the figure. Defaults to "".
        figsize: Tuple with size of figure. Defaults to (8, 5).
        n_boot: Bootstrap resamples of the bands. Defaults to 1000.
        seed: Seed of the bands. Defaults to 0.

    Returns:
        Figure with one line per algorithm.
    """
    figure, axis = _new_axis(figsize, title)
    sns.lineplot(
        data=curves,
        x="step",
        y="return_norm",
        hue="algorithm",
        errorbar=("ci", 95),
        n_boot=n_boot,
        seed=seed,
        ax=axis,
    )
    axis.axhline(1.0, color="grey", linestyle=":", linewidth=1)
    axis.set_xlabel("Environment steps")
    axis.set_ylabel("Normalized return")
    return figure


def guide_step_figure(
    guide_steps: pd.DataFrame,
    horizon: Optional[int] = None,
    title: str = "",
    figsize: Tuple[int, int] = (8, 5),
) -> Figure:
    """Create figure of guide-step trajectories, one line per run.

    Args:
        guide_steps: Long frame with columns algorithm, seed, step and h.
        horizon: Episode horizon drawn as reference line.
        title: Title of the figure. Defaults to "".
        figsize: Tuple with size of figure. Defaults to (8, 5).

    Returns:
        Figure of h over environment steps.
    """
    figure, axis = _new_axis(figsize, title)
    sns.lineplot(
        data=guide_steps,
        x="step",
        y="h",
        hue="algorithm",
        units="seed",
        estimator=None,
        alpha=0.7,
        ax=axis,
    )
    if horizon is not None:
        axis.axhline(horizon, color="grey", linestyle=":", linewidth=1)
    axis.set_xlabel("Environment steps")
    axis.set_ylabel("Guide step h")
    return figure


def interpolation_figure(
    interpolation: pd.DataFrame,
    title: str = "",
    figsize: Tuple[int, int] = (6, 4),
) -> Figure:
    """Create figure of return along the actor interpolation segment.

    Args:
        interpolation: Long frame with columns algorithm, seed, lambda and return_norm.
        title: Title of the figure. Defaults to "".
        figsize: Tuple with size of figure. Defaults to (6, 4).

    Returns:
        Figure of normalized return over lambda.
    """
    figure, axis = _new_axis(figsize, title)
    sns.lineplot(
        data=interpolation,
        x="lambda",
        y="return_norm",
        hue="algorithm",
        errorbar=("ci", 95),
        marker="o",
        ax=axis,
    )
    axis.set_xlabel("Weight of the fine-tuned actor")
    axis.set_ylabel("Normalized return")
    return figure


def offline_curve_figure(
    curve: pd.DataFrame,
    title: str = "",
    figsize: Tuple[int, int] = (6, 4),
) -> Figure:
    """Create figure of the offline learning curve.

    Args:
        curve: Frame with columns update and return_norm (or return_raw).
        title: Title of the figure. Defaults to "".
        figsize: Tuple with size of figure. Defaults to (6, 4).

    Returns:
        Figure of evaluation return over updates.
    """
    figure, axis = _new_axis(figsize, title)
    column: str = "return_norm" if curve["return_norm"].notna().any() else "return_raw"
    sns.lineplot(data=curve, x="update", y=column, marker="o", ax=axis)
    axis.set_xlabel("Offline updates")
    axis.set_ylabel("Normalized return" if column == "return_norm" else "Return")
    return figure


def value_shift_figure(
    shift: pd.DataFrame,
    title: str = "",
    figsize: Tuple[int, int] = (6, 5),
) -> Figure:
    """Create scatter of projected states colored by value shift.

    Args:
        shift: Frame with columns pc1, pc2 and d.
        title: Title of the figure. Defaults to "".
        figsize: Tuple with size of figure. Defaults to (6, 5).

    Returns:
        Scatter figure.
    """
    figure, axis = _new_axis(figsize, title)
    sns.scatterplot(data=shift, x="pc1", y="pc2", hue="d", palette="coolwarm", s=12, ax=axis)
    axis.set_xlabel("First principal component")
    axis.set_ylabel("Second principal component")
    return figure


def save_figure(figure: Figure, path: Union[str, Path]) -> Path:
    """Write figure as SVG.

    Args:
        figure: Figure to save.
        path: Target path; the suffix is replaced by `.svg`.

    Returns:
        Written path.
    """
    target: Path = Path(path).with_suffix(f".{FIGURE_FORMAT}")
    target.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(target, format=FIGURE_FORMAT, bbox_inches="tight")
    return target
