"""Execution: delegates, hook tables, and the code-block interpreter.

A Delegate pairs a signature with either a host behavior (a Python callable
supplied by the game) or a generated code block. Hooks are named delegate
slots with a default binding that is never absent, so dispatching through an
unbound hook runs the baseline behavior instead of failing.

Every host-method call made by interpreted code first checks the method's
parameter constraints, so out-of-range arguments surface as
ConstraintViolation whether they came from literals or computed values.
Execution has no transactional rollback: an erroring invocation leaves the
world in whatever partial state it reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from .lang import (
    Assign,
    BoolLit,
    Call,
    CodeBlock,
    EnumLit,
    Expression,
    ExprStmt,
    FieldRef,
    IfElse,
    IntLit,
    LocalRef,
    LocalTarget,
    Return,
    Signature,
    Statement,
    VarDecl,
    typecheck,
)
from .registry import BOOL, INT, VOID, Registry, TypeId, enum_type

INT64_MASK = 2**64
INT64_HALF = 2**63


def wrap64(value: int) -> int:
    """Wrap to 64-bit two's-complement, the arithmetic of host builtins."""
    return (value + INT64_HALF) % INT64_MASK - INT64_HALF


# --------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class Value:
    pass


@dataclass(frozen=True)
class IntV(Value):
    value: int


@dataclass(frozen=True)
class BoolV(Value):
    value: bool


@dataclass(frozen=True)
class EnumV(Value):
    enum: str
    variant: str


@dataclass(frozen=True)
class UnitV(Value):
    pass


UNIT = UnitV()


def value_type(v: Value) -> TypeId:
    if isinstance(v, IntV):
        return INT
    if isinstance(v, BoolV):
        return BOOL
    if isinstance(v, EnumV):
        return enum_type(v.enum)
    return VOID


# --------------------------------------------------------------------------
# Errors


class ExecutionError(Exception):
    """Base class for failures raised while running a delegate."""

    method: str = "-"

    @property
    def kind(self) -> str:
        return type(self).__name__

    def detail(self) -> str:
        return str(self)

    def report_line(self) -> str:
        return f"ERROR kind={self.kind} method={self.method} detail={self.detail()}"


class ConstraintViolation(ExecutionError):
    def __init__(self, method: str, param: str, value: int, bound: int, bound_kind: str):
        super().__init__(
            f"{method}: argument {param}={value} violates {bound_kind} bound {bound}"
        )
        self.method = method
        self.param = param
        self.value = value
        self.bound = bound
        self.bound_kind = bound_kind

    def detail(self) -> str:
        return f"{self.param}={self.value} violates {self.bound_kind}={self.bound}"


class HostError(ExecutionError):
    def __init__(self, detail: str, method: str = "-"):
        super().__init__(detail)
        self.method = method


class BudgetExceeded(ExecutionError):
    def __init__(self, limit: int):
        super().__init__(f"host call budget of {limit} exhausted")
        self.limit = limit


class ArityMismatch(ExecutionError):
    pass


class InterpreterError(ExecutionError):
    """A dynamic check failed; unreachable for typechecked blocks."""


class HookError(Exception):
    pass


class UnknownHook(HookError):
    pass


class SignatureMismatch(HookError):
    pass


# --------------------------------------------------------------------------
# Budget


@dataclass
class ExecBudget:
    """Guard rail on host-method invocations within one execution context."""

    max_host_calls: int = 10_000
    remaining: int = field(init=False)

    def __post_init__(self) -> None:
        self.remaining = self.max_host_calls

    def spend(self) -> None:
        if self.remaining <= 0:
            raise BudgetExceeded(self.max_host_calls)
        self.remaining -= 1


# --------------------------------------------------------------------------
# Delegates

# A host behavior receives (world, argument values) and returns a Value.
HostFn = Callable[[Any, Sequence[Value]], Value]


@dataclass(frozen=True)
class Delegate:
    sig: Signature


@dataclass(frozen=True)
class HostDelegate(Delegate):
    fn: HostFn = field(compare=False)  # type: ignore[assignment]


@dataclass(frozen=True)
class GeneratedDelegate(Delegate):
    block: CodeBlock = CodeBlock()
    registry: Optional[Registry] = field(default=None, compare=False)


def compile_block(sig: Signature, block: CodeBlock, registry: Registry) -> GeneratedDelegate:
    """Typecheck ``block`` against ``sig`` and wrap it as a delegate."""
    typecheck(block, sig, registry)
    return GeneratedDelegate(sig, block, registry)


# --------------------------------------------------------------------------
# Hook table


@dataclass
class _HookSlot:
    sig: Signature
    default: Delegate
    current: Delegate


class HookTable:
    """Named delegate slots; each keeps a default that reset() restores."""

    def __init__(self) -> None:
        self._slots: Dict[str, _HookSlot] = {}

    def declare(self, name: str, default: Delegate) -> None:
        if name in self._slots:
            raise HookError(f"hook '{name}' already declared")
        self._slots[name] = _HookSlot(default.sig, default, default)

    def _slot(self, name: str) -> _HookSlot:
        slot = self._slots.get(name)
        if slot is None:
            raise UnknownHook(f"unknown hook '{name}'")
        return slot

    def sig(self, name: str) -> Signature:
        return self._slot(name).sig

    def delegate(self, name: str) -> Delegate:
        return self._slot(name).current

    def bind(self, name: str, delegate: Delegate) -> None:
        slot = self._slot(name)
        if delegate.sig != slot.sig:
            raise SignatureMismatch(
                f"hook '{name}' expects {slot.sig.format()}, got {delegate.sig.format()}"
            )
        slot.current = delegate

    def reset(self, name: str) -> None:
        slot = self._slot(name)
        slot.current = slot.default

    def names(self) -> List[str]:
        return list(self._slots)

    def clone(self) -> "HookTable":
        table = HookTable()
        for name, slot in self._slots.items():
            table._slots[name] = _HookSlot(slot.sig, slot.default, slot.current)
        return table


# --------------------------------------------------------------------------
# Invocation


def invoke(
    delegate: Delegate,
    args: Sequence[Value],
    world: Any,
    budget: Optional[ExecBudget] = None,
) -> Value:
    """Run a delegate against ``world``; returns the produced value.

    Host delegates dispatch straight to their behavior. Generated delegates
    interpret the block statement by statement; each host-method call checks
    the target's parameter constraints and spends one unit of budget first.
    """
    budget = budget if budget is not None else ExecBudget()
    sig = delegate.sig
    if len(args) != len(sig.params):
        raise ArityMismatch(
            f"{sig.name}: expected {len(sig.params)} argument(s), got {len(args)}"
        )
    for value, (pname, ptype) in zip(args, sig.params):
        if value_type(value) != ptype:
            raise ArityMismatch(
                f"{sig.name}: argument '{pname}' expected {ptype.display()}, "
                f"got {value_type(value).display()}"
            )
    if isinstance(delegate, HostDelegate):
        budget.spend()
        return delegate.fn(world, list(args))
    if not isinstance(delegate, GeneratedDelegate):
        raise InterpreterError(f"cannot invoke delegate {delegate!r}")
    if delegate.registry is None:
        raise InterpreterError("generated delegate carries no registry")
    interp = _Interp(delegate.registry, world, budget)
    frames: List[Dict[str, Value]] = [
        {pname: value for value, (pname, _) in zip(args, sig.params)}
    ]
    result = interp.run_block(delegate.block, frames)
    return result if result is not None else UNIT


class _Interp:
    def __init__(self, registry: Registry, world: Any, budget: ExecBudget):
        self.registry = registry
        self.world = world
        self.budget = budget

    def run_block(self, block: CodeBlock, frames: List[Dict[str, Value]]) -> Optional[Value]:
        for st in block.statements:
            result = self.run_stmt(st, frames)
            if result is not None:
                return result
        return None

    def run_stmt(self, st: Statement, frames: List[Dict[str, Value]]) -> Optional[Value]:
        if isinstance(st, VarDecl):
            frames[-1][st.name] = self.eval(st.init, frames)
            return None
        if isinstance(st, Assign):
            value = self.eval(st.value, frames)
            if isinstance(st.target, LocalTarget):
                for frame in reversed(frames):
                    if st.target.name in frame:
                        frame[st.target.name] = value
                        return None
                raise InterpreterError(f"unknown local '{st.target.name}'")
            fd = self.registry.field_named(st.target.name)
            if fd is None:
                raise InterpreterError(f"unknown field '{st.target.name}'")
            if not fd.writable:
                raise InterpreterError(f"field '{st.target.name}' is read-only")
            self.world.write_field(st.target.name, value)
            return None
        if isinstance(st, ExprStmt):
            self.eval(st.call, frames)
            return None
        if isinstance(st, IfElse):
            cond = self.eval(st.cond, frames)
            if not isinstance(cond, BoolV):
                raise InterpreterError("if condition did not evaluate to a bool")
            branch = st.then_block if cond.value else st.else_block
            if branch is None:
                return None
            frames.append({})
            try:
                return self.run_block(branch, frames)
            finally:
                frames.pop()
        if isinstance(st, Return):
            if st.value is None:
                return UNIT
            return self.eval(st.value, frames)
        raise InterpreterError(f"cannot execute statement {st!r}")

    def eval(self, expr: Expression, frames: List[Dict[str, Value]]) -> Value:
        if isinstance(expr, IntLit):
            return IntV(expr.value)
        if isinstance(expr, BoolLit):
            return BoolV(expr.value)
        if isinstance(expr, EnumLit):
            return EnumV(expr.enum, expr.variant)
        if isinstance(expr, LocalRef):
            for frame in reversed(frames):
                if expr.name in frame:
                    return frame[expr.name]
            raise InterpreterError(f"unknown local '{expr.name}'")
        if isinstance(expr, FieldRef):
            if self.registry.field_named(expr.name) is None:
                raise InterpreterError(f"unknown field '{expr.name}'")
            return self.world.read_field(expr.name)
        if isinstance(expr, Call):
            return self.call(expr, frames)
        raise InterpreterError(f"cannot evaluate expression {expr!r}")

    def call(self, call: Call, frames: List[Dict[str, Value]]) -> Value:
        md = self.registry.method_named(call.method)
        if md is None:
            raise InterpreterError(f"unknown method '{call.method}'")
        if len(call.args) != md.arity:
            raise InterpreterError(
                f"method '{call.method}' takes {md.arity} argument(s), got {len(call.args)}"
            )
        args = [self.eval(a, frames) for a in call.args]
        by_param = {pname: i for i, (pname, _) in enumerate(md.params)}
        for c in md.constraints:
            arg = args[by_param[c.param]]
            if not isinstance(arg, IntV):
                raise InterpreterError(
                    f"constraint on non-int argument '{c.param}' of '{call.method}'"
                )
            if c.kind.value == "min" and arg.value < c.bound:
                raise ConstraintViolation(call.method, c.param, arg.value, c.bound, "min")
            if c.kind.value == "max" and arg.value > c.bound:
                raise ConstraintViolation(call.method, c.param, arg.value, c.bound, "max")
        self.budget.spend()
        if md.host_impl is None:
            raise HostError(f"method '{call.method}' has no host implementation", call.method)
        return md.host_impl(self.world, args)
