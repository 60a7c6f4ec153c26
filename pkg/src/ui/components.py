"""
UI components for the Streamlit run explorer.
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple

import streamlit as st

from src.config.settings import config
from src.models.bench import BenchSummary
from src.models.genetics import GaRunResult
from src.models.level import Level
from src.services.domain import DomainPlugin


class SourceSelectUI:
    """Sidebar controls choosing which artifact to inspect."""

    @staticmethod
    def render(artifacts: Dict[str, List[Path]]) -> Tuple[Optional[str], Optional[Path]]:
        """
        Render the artifact picker.

        Args:
            artifacts: Output of find_artifacts

        Returns:
            Tuple of (artifact kind, directory), or (None, None) when nothing was found
        """
        st.sidebar.header("Artifacts")
        labels = {'runs': "GA run", 'levels': "Generated levels", 'bench': "Benchmark"}
        kinds = [kind for kind in labels if artifacts.get(kind)]
        if not kinds:
            st.sidebar.info("No runs, level folders or benchmark results found.")
            return None, None

        kind = st.sidebar.radio("Type", options=kinds, format_func=labels.get)
        directory = st.sidebar.selectbox(
            "Directory",
            options=artifacts[kind],
            format_func=str,
            help="Folders written by the pcg command line"
        )
        return kind, directory


class LevelViewUI:
    """Shows one level with its fitness breakdown."""

    @staticmethod
    def render(level: Level, domain: DomainPlugin, key: str):
        show_path = domain.name == 'maze' and st.checkbox("Show shortest path", key=f"path_{key}")
        text_col, fitness_col = st.columns([3, 2])
        with text_col:
            st.code(domain.render(level, show_path=show_path), language=None)
        with fitness_col:
            breakdown = domain.evaluate(level)
            if breakdown.total >= domain.fitness_threshold:
                st.success(f"Acceptable: fitness {breakdown.total:.4f}")
            else:
                st.warning(f"Below threshold {domain.fitness_threshold}: fitness {breakdown.total:.4f}")
            st.json(breakdown.to_dict())


class LevelListUI:
    """Picker over a list of levels."""

    @staticmethod
    def render(title: str, levels: List[Level], domain: DomainPlugin, key: str):
        st.subheader(f"{title} ({len(levels)})")
        if not levels:
            st.info("No levels.")
            return
        index = st.number_input("Level", min_value=0, max_value=len(levels) - 1, value=0, step=1, key=key)
        LevelViewUI.render(levels[int(index)], domain, key)


class RunViewUI:
    """Summary and levels of a saved GA run."""

    @staticmethod
    def render(run: GaRunResult, domain: DomainPlugin):
        st.header(f"GA run: {domain.name}, seed {run.seed}")
        generations_col, final_col, time_col = st.columns(3)
        generations_col.metric("Generations", run.generations_used)
        final_col.metric("Acceptable levels", len(run.final_levels))
        time_col.metric("Wall clock", f"{run.wall_clock_seconds:.3f}s")
        if run.best_fitness_history:
            st.line_chart({"best fitness": run.best_fitness_history})
        with st.expander("Run configuration"):
            st.json({'domain_params': domain.params(), **run.to_dict()})

        final_tab, initial_tab = st.tabs(["Final levels", "Initial levels"])
        with final_tab:
            LevelListUI.render("Final levels", run.final_levels, domain, key="final")
        with initial_tab:
            LevelListUI.render("Initial levels", run.initial_levels, domain, key="initial")


class BenchViewUI:
    """Benchmark summary table and curves."""

    @staticmethod
    def render(summaries: List[BenchSummary], directory: Path):
        st.header("Benchmark summary")
        degraded = [s for s in summaries if s.degraded]
        if degraded:
            st.error(f"{len(degraded)} cells degraded (policy failure rate above "
                     f"{config['bench'].DEGRADED_FAILURE_RATE:.0%})")
        st.dataframe([s.to_row() for s in summaries], use_container_width=True)
        for name in ('elapsed_vs_levels.svg', 'elapsed_vs_size.svg'):
            path = directory / name
            if path.is_file():
                st.image(str(path))
