"""Scripted training sessions: a step-gated tutorial and a guided
annotation that checks every cluster decision against an answer key.

Both are driven by declarative JSON scripts. The tutorial wraps a small
annotation task and only lets the pre-scripted next action through; the
guided session runs a real task and rejects wrong cluster decisions with
configured feedback text, recording attempt counts per mention.
"""
from __future__ import annotations

from dataclasses import dataclass

from .annotation import AnnotationState, apply_action
from .corpus import Corpus, MentionSpan
from .errors import CorefError, ProtocolError, ScriptError

HIGHLIGHT_TARGETS = ("current_mention", "cluster_bank", "candidate_row", "none")

ACK = "ack"


# -- step results ----------------------------------------------------------

@dataclass(frozen=True)
class StepResult:
    """Outcome of feeding one event to a training session."""

    accepted: bool
    feedback: str | None = None   # blocking text on rejection
    toast: str | None = None      # transient text on acceptance


# -- tutorial --------------------------------------------------------------

@dataclass(frozen=True)
class TutorialStep:
    prompt: str
    target: str
    require: dict | str   # action pattern, or ACK for acknowledge-only steps


@dataclass(frozen=True)
class TutorialScript:
    steps: tuple[TutorialStep, ...]

    @classmethod
    def from_json(cls, data: dict) -> "TutorialScript":
        steps = []
        for i, raw in enumerate(data.get("steps", [])):
            target = raw.get("target", "none")
            if target not in HIGHLIGHT_TARGETS:
                raise ScriptError("step %d: unknown highlight target %r" % (i, target), i)
            require = raw.get("require", ACK)
            if require != ACK and not isinstance(require, dict):
                raise ScriptError("step %d: require must be an action pattern or %r"
                                  % (i, ACK), i)
            if isinstance(require, dict) and "op" not in require:
                raise ScriptError("step %d: action pattern needs an \"op\"" % i, i)
            steps.append(TutorialStep(prompt=str(raw.get("prompt", "")),
                                      target=target, require=require))
        if not steps:
            raise ScriptError("tutorial script has no steps")
        return cls(tuple(steps))


def _matches(pattern: dict, event: dict) -> bool:
    # pattern keys must all be present and equal in the event
    return all(event.get(k) == v for k, v in pattern.items())


class TutorialSession:
    """Walk-through over a sample task: each step names the one action
    that advances it; everything else is blocked and changes nothing."""

    def __init__(self, state: AnnotationState, script: TutorialScript):
        self.state = state
        self.script = script
        self.step_index = 0
        self.total_events = 0
        self.blocked_events = 0

    @property
    def passed(self) -> bool:
        return self.step_index >= len(self.script.steps)

    @property
    def current_step(self) -> TutorialStep | None:
        if self.passed:
            return None
        return self.script.steps[self.step_index]

    def step(self, event: dict) -> StepResult:
        self.total_events += 1
        step = self.current_step
        if step is None:
            self.blocked_events += 1
            return StepResult(False, feedback="tutorial already finished")
        if step.require == ACK:
            if event.get("op") == ACK:
                self.step_index += 1
                return StepResult(True)
            self.blocked_events += 1
            return StepResult(False, feedback=step.prompt)
        if not _matches(step.require, event):
            self.blocked_events += 1
            return StepResult(False, feedback=step.prompt)
        try:
            apply_action(self.state, event["op"], event)
        except CorefError as exc:
            self.blocked_events += 1
            return StepResult(False, feedback=str(exc))
        self.step_index += 1
        return StepResult(True)

    def outcome(self) -> dict:
        return {
            "completed": self.passed,
            "total_attempts": self.total_events,
            "errors": {"blocked": self.blocked_events},
            "transcript": [{"step": i,
                            "prompt": self.script.steps[i].prompt}
                           for i in range(self.step_index)],
        }


# -- guided annotation -----------------------------------------------------

@dataclass(frozen=True)
class GuidedStep:
    mention: int              # span-order index into the task's mentions
    expect: int | None        # same-cluster-as mention index, or None = new cluster
    on_wrong: str
    on_right: str | None = None


@dataclass
class GuidedScript:
    corpus: Corpus
    mentions: list[MentionSpan]
    steps: list[GuidedStep]

    @classmethod
    def from_json(cls, data: dict) -> "GuidedScript":
        task = data.get("task")
        if not isinstance(task, dict):
            raise ScriptError("guided script needs a \"task\" object")
        corpus = Corpus.from_json(task["corpus"])
        mentions = [MentionSpan.from_json(m) for m in task.get("mentions", [])]
        steps = []
        for i, raw in enumerate(data.get("steps", [])):
            expect = raw.get("expect")
            if expect == "new":
                parsed = None
            elif isinstance(expect, dict) and isinstance(expect.get("same_as"), int):
                parsed = expect["same_as"]
            else:
                raise ScriptError("step %d: expect must be \"new\" or {\"same_as\": int}"
                                  % i, i)
            if not isinstance(raw.get("mention"), int):
                raise ScriptError("step %d: missing mention index" % i, i)
            on_right = raw.get("on_right")
            steps.append(GuidedStep(mention=raw["mention"], expect=parsed,
                                    on_wrong=raw.get("on_wrong", ""),
                                    on_right=None if on_right is None else str(on_right)))
        return cls(corpus, mentions, steps)


def validate_script(script: GuidedScript) -> list[str]:
    """Structural checks; empty list means the script is runnable.

    The expected decisions, replayed in span order, must produce a
    complete annotation: one step per non-initial mention, backward
    references only, feedback text everywhere.
    """
    errors: list[str] = []
    try:
        state = AnnotationState.create(script.corpus, script.mentions)
    except CorefError as exc:
        return ["task does not initialize: %s" % exc]
    n = len(state.mentions)
    expected_indices = list(range(1, n))
    got = [s.mention for s in script.steps]
    if got != expected_indices:
        errors.append("steps must cover mentions %s in order, got %s"
                      % (expected_indices, got))
    for step in script.steps:
        if step.expect is not None and step.expect >= step.mention:
            errors.append("mention %d: forward reference to mention %d"
                          % (step.mention, step.expect))
        if not step.on_wrong:
            errors.append("missing feedback for mention m%d" % step.mention)
    if errors:
        return errors
    # dry-run the answer key; any engine rejection is a script bug
    order = {i: "m%d" % i for i in range(n)}
    try:
        for step in script.steps:
            if step.expect is None:
                state.assign_current(None)
            else:
                state.assign_current(state.assigned[order[step.expect]])
    except CorefError as exc:
        errors.append("expected decisions do not replay: %s" % exc)
    else:
        if not state.is_complete:
            errors.append("expected decisions leave the task incomplete")
    return errors


class GuidedSession:
    """Real annotation task with an answer key: wrong cluster decisions
    bounce with the step's feedback text, right ones advance (optionally
    with a confirmation toast)."""

    def __init__(self, script: GuidedScript):
        problems = validate_script(script)
        if problems:
            raise ScriptError("; ".join(problems))
        self.script = script
        self.state = AnnotationState.create(script.corpus, script.mentions)
        self.step_index = 0
        self.wrong: dict[str, int] = {}
        self.total_attempts = 0
        self.transcript: list[dict] = []

    @property
    def completed(self) -> bool:
        return self.step_index >= len(self.script.steps)

    @property
    def current_step(self) -> GuidedStep | None:
        return None if self.completed else self.script.steps[self.step_index]

    def step(self, action: dict) -> StepResult:
        """Check one cluster decision for the current mention."""
        step = self.current_step
        if step is None:
            raise ProtocolError("guided session already completed")
        op = action.get("op")
        if op == "select":
            # browsing the bank is free and never counts as an attempt
            self.state.select_cluster(action.get("cluster"))
            return StepResult(True)
        if op not in ("assign", "assign_new"):
            raise ProtocolError("guided mode accepts cluster decisions only, got %r" % op)
        target = None
        if op == "assign":
            target = action.get("cluster")
            if target not in self.state.clusters:
                raise ProtocolError("unknown cluster %r" % target)
        mention_id = self.state.current.mention_id
        self.total_attempts += 1
        if not self._is_expected(step, op, target):
            self.wrong[mention_id] = self.wrong.get(mention_id, 0) + 1
            return StepResult(False, feedback=step.on_wrong)
        self.state.assign_current(target)
        self.transcript.append({"mention": mention_id,
                                "attempts": self.wrong.get(mention_id, 0) + 1,
                                "decision": {"op": op, **({"cluster": target}
                                                          if target else {})}})
        self.step_index += 1
        return StepResult(True, toast=step.on_right)

    def _is_expected(self, step: GuidedStep, op: str, target: str | None) -> bool:
        if step.expect is None:
            return op == "assign_new"
        if op != "assign":
            return False
        # the right cluster is whichever one holds the referenced mention
        return ("m%d" % step.expect) in self.state.clusters[target].mentions

    def outcome(self) -> dict:
        return {
            "completed": self.completed,
            "total_attempts": self.total_attempts,
            "errors": dict(self.wrong),
            "transcript": list(self.transcript),
        }
