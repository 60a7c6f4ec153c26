"""
Read-only Streamlit explorer for runs, generated levels and benchmark results.

Run with ``streamlit run src/app.py``.
"""

import logging
from pathlib import Path

import streamlit as st

from src.config.settings import config
from src.models.errors import PcgError
from src.services.bench_service import read_summary
from src.services.domain import create_domain, domain_for_text
from src.services.storage import find_artifacts, load_levels, load_run
from src.ui.components import BenchViewUI, LevelListUI, RunViewUI, SourceSelectUI
from src.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)


class ExplorerApp:
    """Browses artifacts written by the command line; never starts a generation."""

    def __init__(self):
        setup_logging()
        self._setup_page()

    def _setup_page(self):
        st.set_page_config(
            page_title="PCG Run Explorer",
            page_icon="🧩",
            layout="wide"
        )

    def run(self):
        st.title("PCG Run Explorer")
        root = st.sidebar.text_input("Output directory", value=config['app'].OUTPUT_DIR)
        kind, directory = SourceSelectUI.render(find_artifacts(root))
        if directory is None:
            st.info(f"Nothing to show under {root}. Run `python -m src.cli evolve` first.")
            return

        try:
            if kind == 'runs':
                run, domain = load_run(directory)
                RunViewUI.render(run, domain)
            elif kind == 'levels':
                self._render_levels(directory)
            else:
                BenchViewUI.render(read_summary(directory / config['bench'].SUMMARY_FILE), directory)
        except PcgError as e:
            logger.warning("Cannot display %s: %s", directory, e)
            st.error(f"Cannot display {directory}: {e}")

    @staticmethod
    def _render_levels(directory: Path):
        first = next(directory.glob(f"*{config['app'].LEVEL_SUFFIX}"))
        name = domain_for_text(first.read_text(encoding='ascii'))
        levels = load_levels(directory, create_domain(name).alphabet)
        width, height = levels[0].shape
        params = {'size': width} if name == 'maze' else {'width': width, 'height': height}
        LevelListUI.render(str(directory), levels, create_domain(name, params), key="levels")


def main():
    """Application entry point."""
    app = ExplorerApp()
    app.run()


if __name__ == "__main__":
    main()
