"""
Observability and logging for band ranking, selection and evaluation
"""
import json
import logging
import sys
from typing import Dict, Any, List, Optional
from datetime import datetime
from pathlib import Path
import structlog


class ObservabilityManager:
    """Manages structured logging for the band selection pipeline"""

    def __init__(
        self,
        log_file: Optional[str] = "logs/band_selection.log",
        log_level: str = "info"
    ):
        self.log_file = Path(log_file) if log_file else None
        if self.log_file is not None:
            self.log_file.parent.mkdir(parents=True, exist_ok=True)

        # Configure structured logging; stdout is reserved for command output
        structlog.configure(
            processors=[
                structlog.processors.add_log_level,
                structlog.processors.TimeStamper(fmt="iso"),
                structlog.processors.JSONRenderer()
            ],
            wrapper_class=structlog.make_filtering_bound_logger(
                logging.getLevelName(log_level.upper())
            ),
            logger_factory=structlog.PrintLoggerFactory(sys.stderr)
        )

        self.logger = structlog.get_logger()

        # In-memory storage for summaries
        self.events: List[Dict[str, Any]] = []
        self.decisions: List[Dict[str, Any]] = []

    def log_event(
        self,
        event_type: str,
        message: str,
        data: Optional[Dict[str, Any]] = None,
        level: str = "info"
    ) -> None:
        """Log a general event"""
        event = {
            "timestamp": datetime.now().isoformat(),
            "type": event_type,
            "message": message,
            "data": data or {}
        }

        self.events.append(event)
        getattr(self.logger, level)(event_type, message=message, data=event["data"])

        self._write_to_file(event)

    def log_decision(
        self,
        band: int,
        mi: float,
        mi_before: Optional[float],
        threshold: float,
        accepted: bool
    ) -> None:
        """Log one accept/reject decision of the selection loop"""
        decision = {
            "timestamp": datetime.now().isoformat(),
            "decision_number": len(self.decisions) + 1,
            "band": int(band),
            "mi": float(mi),
            "mi_before": None if mi_before is None else float(mi_before),
            "threshold": float(threshold),
            "accepted": bool(accepted)
        }

        self.decisions.append(decision)
        self.logger.debug("decision", **decision)

        self._write_to_file(decision)

    def _write_to_file(self, data: Dict[str, Any]) -> None:
        """Append one JSON line to the log file, if persistence is enabled"""
        if self.log_file is None:
            return
        with open(self.log_file, "a") as f:
            f.write(json.dumps(data, default=str) + "\n")

    def get_events(self, limit: Optional[int] = None) -> List[Dict[str, Any]]:
        """Get recent events"""
        if limit:
            return self.events[-limit:]
        return self.events

    def get_decisions(self, limit: Optional[int] = None) -> List[Dict[str, Any]]:
        """Get recent selection decisions"""
        if limit:
            return self.decisions[-limit:]
        return self.decisions

    def get_summary(self) -> Dict[str, Any]:
        """Get a summary of the decisions logged so far"""
        examined = len(self.decisions)
        accepted = sum(1 for d in self.decisions if d["accepted"])

        return {
            "examined": examined,
            "accepted": accepted,
            "acceptance_rate": accepted / examined if examined > 0 else 0,
            "latest_decision": self.decisions[-1] if self.decisions else None,
            "total_events": len(self.events)
        }

    def clear(self) -> None:
        """Clear in-memory logs"""
        self.events.clear()
        self.decisions.clear()
