"""Python bindings for the tcube engine."""

from ._tcube import (
    Error,
    Session,
    components,
    contact_graph,
    diff_snapshots,
    generate_scenario,
    replay_chunked,
    replay_file,
    replay_text,
    scenario_names,
    validate_rulebook,
)

# Error args are (message, code, line, column).
Error.code = property(lambda self: self.args[1] if len(self.args) > 1 else None)
Error.line = property(lambda self: self.args[2] if len(self.args) > 2 else 0)
Error.column = property(lambda self: self.args[3] if len(self.args) > 3 else 0)

__all__ = [
    "Error",
    "Session",
    "components",
    "contact_graph",
    "diff_snapshots",
    "generate_scenario",
    "replay_chunked",
    "replay_file",
    "replay_text",
    "scenario_names",
    "validate_rulebook",
]
