import logging
import threading
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


class RunLogger:
    """Collects structured run events for the metadata sidecar"""

    events: List[Dict[str, Any]] = []
    _lock = threading.Lock()

    @staticmethod
    def _record(event: Dict[str, Any]) -> Dict[str, Any]:
        event["created_at"] = datetime.now(timezone.utc).isoformat()
        with RunLogger._lock:
            RunLogger.events.append(event)
        logger.info(f"{event['title']}: {event['description']}")
        return event

    @staticmethod
    def log_instance(instance_id: str, vertices: int, edges: int, doubled: bool = False):
        """Log a generated or loaded instance"""
        return RunLogger._record({
            "type": "instance",
            "title": "Instance Ready",
            "description": f"'{instance_id}' has {vertices} vertices and {edges} edges",
            "metadata": {
                "instance_id": instance_id,
                "vertices": vertices,
                "edges": edges,
                "doubled": doubled
            }
        })

    @staticmethod
    def log_detection(instance_id: str, accept_prob: float, steps: int, model: str):
        """Log one detection run"""
        return RunLogger._record({
            "type": "detection",
            "title": "Detection Finished",
            "description": f"'{instance_id}' accepted with probability {accept_prob:.6f} after {steps} steps",
            "metadata": {
                "instance_id": instance_id,
                "accept_prob": accept_prob,
                "steps": steps,
                "model": model
            }
        })

    @staticmethod
    def log_failure(instance_id: str, reason: str, path: Optional[str] = None):
        """Log a failing instance, with the file that replays it"""
        event = RunLogger._record({
            "type": "failure",
            "title": "Check Failed",
            "description": f"'{instance_id}' failed: {reason}",
            "metadata": {
                "instance_id": instance_id,
                "reason": reason,
                "replay_file": path
            }
        })
        logger.error(f"{instance_id}: {reason}" + (f" (replay with {path})" if path else ""))
        return event

    @staticmethod
    def log_suite(name: str, passed: bool, instances: int, failures: int):
        """Log the outcome of a whole suite"""
        return RunLogger._record({
            "type": "suite",
            "title": "Suite Finished",
            "description": f"suite '{name}' {'passed' if passed else 'failed'} on {instances} instances",
            "metadata": {
                "suite": name,
                "passed": passed,
                "instances": instances,
                "failures": failures
            }
        })

    @staticmethod
    def drain() -> List[Dict[str, Any]]:
        """Return and clear the collected events"""
        with RunLogger._lock:
            events, RunLogger.events = RunLogger.events, []
        return events


# Helper function to safely log events without breaking a run
def safe_log_event(log_function, *args, **kwargs):
    """Safely log an event without affecting the run"""
    try:
        return log_function(*args, **kwargs)
    except Exception as e:
        logger.warning(f"Error logging event: {e}")
        return None
