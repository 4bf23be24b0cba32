#!/usr/bin/env python3
"""
Report Saver: archive of CLI/API reports.

Each saved report gets its own session directory with the JSON document and a
Markdown rendering; a global session_index.json lists all sessions. The index
is the only place where timestamps appear, so the report files themselves stay
byte-identical across runs.
"""

import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict

try:
    from .scenario_io import render_report
except ImportError:
    from scenario_io import render_report


class ReportSaver:
    """Writes reports under ``<base_output_dir>/reports/<session_name>/``."""

    def __init__(self, base_output_dir: str = "outputs"):
        self.base_output_dir = Path(base_output_dir)
        self.setup_directories()

    def setup_directories(self):
        for directory in (self.base_output_dir, self.base_output_dir / "reports"):
            directory.mkdir(parents=True, exist_ok=True)

    def save_report(
        self,
        document: Dict[str, Any],
        command: str
    ) -> Dict[str, str]:
        """
        Save one report document.

        Returns:
            Dictionary with paths to the saved files
        """
        body = json.dumps(document, indent=2, ensure_ascii=False) + "\n"
        session_id = self._generate_session_id(body)
        scenario = str(document.get("scenario", "scenario"))

        session_name = f"{self._sanitize_filename(scenario)}_{self._sanitize_filename(command)}_{session_id}"

        session_dir = self.base_output_dir / "reports" / session_name
        session_dir.mkdir(parents=True, exist_ok=True)

        saved_files = {}

        report_file = session_dir / "report.json"
        report_file.write_text(body, encoding="utf-8")
        saved_files["report"] = str(report_file)

        markdown_file = session_dir / "report.md"
        with open(markdown_file, "w", encoding="utf-8") as f:
            f.write(f"# {command}: {scenario}\n\n")
            f.write("```\n")
            f.write(render_report(document, fmt="text"))
            f.write("```\n")
        saved_files["markdown"] = str(markdown_file)

        self._update_global_index(session_name, session_id, command, document)
        return saved_files

    def _generate_session_id(self, content: str) -> str:
        """Content hash, so identical reports share an id."""
        return hashlib.sha256(content.encode()).hexdigest()[:12]

    def _sanitize_filename(self, text: str, max_length: int = 50) -> str:
        safe = "".join(c for c in text if c.isalnum() or c in (" ", "-", "_")).strip()
        safe = "_".join(safe.split())
        return safe[:max_length] or "report"

    def _update_global_index(self, session_name: str, session_id: str, command: str,
                             document: Dict[str, Any]):
        index_file = self.base_output_dir / "session_index.json"

        try:
            with open(index_file, "r") as f:
                index = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError):
            index = {"sessions": []}

        index["sessions"].append({
            "session_id": session_id,
            "session_name": session_name,
            "created_at": datetime.now().isoformat(),
            "command": command,
            "scenario": document.get("scenario"),
        })

        # Keep only the last 100 sessions
        index["sessions"] = index["sessions"][-100:]

        with open(index_file, "w") as f:
            json.dump(index, f, indent=2)
