"""Exception types shared across the blade package."""

from __future__ import annotations


class BladeError(Exception):
    """Base class for every error raised by this package."""


class KBError(BladeError):
    """Knowledge-base document is malformed or violates an invariant."""


class RequirementsError(BladeError):
    """Requirements document is malformed or violates a local invariant."""


class BpmnError(BladeError):
    """BPMN document is malformed or uses an unsupported structure."""


class SimulationError(BladeError):
    """Simulator input violates a precondition."""


class MatrixError(BladeError):
    """A decision matrix cannot be built or is structurally invalid."""


class StubGenerationError(BladeError):
    """Architecture stubs cannot be generated from the given inputs."""


class UnknownProfileError(BladeError, LookupError):
    """A referenced blockchain profile does not exist in the knowledge base."""


class ValidationFailure(BladeError):
    """Requirement validation against a knowledge base produced error findings.

    Carries the full findings list so callers (CLI, HTTP service) can show
    every problem at once instead of the first one only.
    """

    def __init__(self, findings):
        self.findings = list(findings)
        messages = "; ".join(f.message for f in self.findings if f.severity == "error")
        super().__init__(messages or "validation failed")
