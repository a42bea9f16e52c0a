"""In-process message bus for the Master/Robot conversations.

Two conversations run over the bus: identity discovery (IdentityCheck ->
Identity) and dispatch (Order -> OrderNotice). Delivery is reliable, FIFO and
takes zero ticks; a message is visible at the recipient's next drain.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Union

from .domain import TaskKind
from .errors import UnknownAgent


class Outcome(enum.Enum):
    COMPLETED = "Completed"
    FAILED = "Failed"


@dataclass(frozen=True)
class IdentityCheck:
    pass


@dataclass(frozen=True)
class Identity:
    robot_id: str
    capabilities: frozenset[TaskKind]


@dataclass(frozen=True)
class Order:
    task_id: str


@dataclass(frozen=True)
class OrderNotice:
    task_id: str
    elapsed_ticks: int
    outcome: Outcome = Outcome.COMPLETED


Payload = Union[IdentityCheck, Identity, Order, OrderNotice]


def payload_to_json(p: Payload) -> dict[str, Any]:
    if isinstance(p, IdentityCheck):
        return {"type": "IdentityCheck"}
    if isinstance(p, Identity):
        return {
            "type": "Identity",
            "robot_id": p.robot_id,
            "capabilities": sorted(k.value for k in p.capabilities),
        }
    if isinstance(p, Order):
        return {"type": "Order", "task_id": p.task_id}
    if isinstance(p, OrderNotice):
        return {
            "type": "OrderNotice",
            "task_id": p.task_id,
            "elapsed_ticks": p.elapsed_ticks,
            "outcome": p.outcome.value,
        }
    raise TypeError(f"not a payload: {p!r}")


def payload_from_json(doc: dict[str, Any]) -> Payload:
    kind = doc["type"]
    if kind == "IdentityCheck":
        return IdentityCheck()
    if kind == "Identity":
        return Identity(doc["robot_id"], frozenset(TaskKind(k) for k in doc["capabilities"]))
    if kind == "Order":
        return Order(doc["task_id"])
    if kind == "OrderNotice":
        return OrderNotice(doc["task_id"], int(doc["elapsed_ticks"]), Outcome(doc["outcome"]))
    raise ValueError(f"unknown payload type {kind!r}")


@dataclass(frozen=True)
class Envelope:
    msg_id: int
    sender: str
    recipient: str
    sent_at: int
    payload: Payload
    correlates: int | None = None

    def to_record(self) -> dict[str, Any]:
        return {
            "tick": self.sent_at,
            "msg_id": self.msg_id,
            "from": self.sender,
            "to": self.recipient,
            "correlates": self.correlates,
            "payload": payload_to_json(self.payload),
        }

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "Envelope":
        return cls(
            msg_id=int(rec["msg_id"]),
            sender=rec["from"],
            recipient=rec["to"],
            sent_at=int(rec["tick"]),
            payload=payload_from_json(rec["payload"]),
            correlates=rec.get("correlates"),
        )


class MessageBus:
    """Deterministic mailbox-per-agent bus.

    ``now`` is set by the scheduler before each tick. Every sent envelope is
    passed to ``on_send`` (the run trace hooks in there).
    """

    def __init__(self, on_send: Callable[[Envelope], None] | None = None):
        self.now = 0
        self._next_id = 0
        self._mailboxes: dict[str, list[Envelope]] = {}
        self._on_send = on_send

    def register(self, agent_id: str) -> None:
        self._mailboxes.setdefault(agent_id, [])

    def is_registered(self, agent_id: str) -> bool:
        return agent_id in self._mailboxes

    def send(
        self,
        sender: str,
        recipient: str,
        payload: Payload,
        correlates: int | None = None,
    ) -> int:
        if recipient not in self._mailboxes:
            raise UnknownAgent(recipient)
        env = Envelope(self._next_id, sender, recipient, self.now, payload, correlates)
        self._next_id += 1
        self.deliver(env)
        if self._on_send is not None:
            self._on_send(env)
        return env.msg_id

    def deliver(self, env: Envelope) -> None:
        """Place an already-numbered envelope in its recipient's mailbox."""
        try:
            self._mailboxes[env.recipient].append(env)
        except KeyError:
            raise UnknownAgent(env.recipient) from None

    def drain(self, agent_id: str) -> list[Envelope]:
        try:
            box = self._mailboxes[agent_id]
        except KeyError:
            raise UnknownAgent(agent_id) from None
        ready = sorted((e for e in box if e.sent_at <= self.now), key=lambda e: e.msg_id)
        self._mailboxes[agent_id] = [e for e in box if e.sent_at > self.now]
        return ready


def send(bus: MessageBus, sender: str, recipient: str, payload: Payload,
         correlates: int | None = None) -> int:
    return bus.send(sender, recipient, payload, correlates)


def drain_mailbox(bus: MessageBus, agent_id: str) -> list[Envelope]:
    return bus.drain(agent_id)


def conversation_check(trace: Iterable[Envelope | dict], master_id: str = "master") -> list[str]:
    """Audit a message trace against the two conversation protocols.

    Accepts Envelopes or raw JSONL records (non-message records are skipped).
    Flags direction violations, replies without a request, notices without an
    outstanding order, duplicate completions and orders never answered.
    """
    problems: list[str] = []
    checked: set[str] = set()  # robots that received an IdentityCheck
    orders: dict[int, Envelope] = {}
    answered: set[int] = set()
    completed: set[str] = set()

    for item in trace:
        if isinstance(item, dict):
            if "msg_id" not in item or "event" in item:
                continue
            env = Envelope.from_record(item)
        else:
            env = item
        p = env.payload
        from_master = env.sender == master_id
        to_master = env.recipient == master_id

        if isinstance(p, IdentityCheck):
            if not from_master or to_master:
                problems.append(f"IdentityCheck from {env.sender} to {env.recipient}: wrong direction")
                continue
            checked.add(env.recipient)
        elif isinstance(p, Identity):
            if from_master or not to_master:
                problems.append(f"Identity from {env.sender} to {env.recipient}: wrong direction")
                continue
            if env.sender not in checked:
                problems.append("Identity without IdentityCheck")
        elif isinstance(p, Order):
            if not from_master or to_master:
                problems.append(f"Order from {env.sender} to {env.recipient}: wrong direction")
                continue
            orders[env.msg_id] = env
        elif isinstance(p, OrderNotice):
            if from_master or not to_master:
                problems.append(f"OrderNotice from {env.sender} to {env.recipient}: wrong direction")
                continue
            req = orders.get(env.correlates) if env.correlates is not None else None
            matches = (
                req is not None
                and req.payload.task_id == p.task_id
                and req.recipient == env.sender
            )
            done = p.outcome is Outcome.COMPLETED
            if done and p.task_id in completed:
                problems.append(f"duplicate completion for {p.task_id}")
            elif not matches or env.correlates in answered:
                problems.append(f"OrderNotice without matching Order for {p.task_id}")
            if matches:
                answered.add(env.correlates)
            if done:
                completed.add(p.task_id)

    for msg_id, env in orders.items():
        if msg_id not in answered:
            problems.append(f"Order {msg_id} for {env.payload.task_id} never answered")
    return problems
