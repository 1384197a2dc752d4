"""Catalogue of the types, fields, and methods that generated code may touch.

A Registry models the slice of a host program that is opened up to code
generation: enums, fields, and methods, each gated by a ``usable`` flag, plus
optional min/max bounds on integer method parameters. Build one imperatively
with the ``register_*`` methods, then ``seal()`` it; a sealed registry is
validated, immutable, and safe to share between any number of generator and
interpreter instances.

``candidates_for`` is the search primitive: given a wanted type and the local
scope, it returns every producer of that type in a fixed order (usable fields,
then locals outermost-frame-first, then usable methods, then a single
LiteralOption marker when the type admits literals at all).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union


class TypeKind(Enum):
    INT = "int"
    BOOL = "bool"
    VOID = "void"
    ENUM = "enum"


@dataclass(frozen=True)
class TypeId:
    """Type tag for values in the generated language."""

    kind: TypeKind
    enum_name: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.kind is TypeKind.ENUM) != (self.enum_name is not None):
            raise ValueError("enum_name is required exactly for enum types")

    @property
    def is_void(self) -> bool:
        return self.kind is TypeKind.VOID

    def display(self) -> str:
        if self.kind is TypeKind.ENUM:
            return self.enum_name  # type: ignore[return-value]
        return self.kind.value

    def __repr__(self) -> str:
        return f"TypeId<{self.display()}>"


INT = TypeId(TypeKind.INT)
BOOL = TypeId(TypeKind.BOOL)
VOID = TypeId(TypeKind.VOID)


def enum_type(name: str) -> TypeId:
    return TypeId(TypeKind.ENUM, name)


def admits_literals(t: TypeId) -> bool:
    """int, bool and enum values can be spelled as literals; void cannot."""
    return t.kind is not TypeKind.VOID


class RegistryError(Exception):
    """Base class for design-space registration and validation failures."""


class DuplicateName(RegistryError):
    pass


class EmptyEnum(RegistryError):
    pass


class UnresolvedType(RegistryError):
    pass


class VoidField(RegistryError):
    pass


class UnknownConstraintParam(RegistryError):
    pass


class ConstraintTypeMismatch(RegistryError):
    pass


class InvertedBounds(RegistryError):
    pass


class RegistrySealed(RegistryError):
    """Raised on any mutation attempt after seal()."""


class RegistryNotSealed(RegistryError):
    """Raised when a query requiring a sealed registry runs on an open one."""


class ValidationFailed(RegistryError):
    def __init__(self, diagnostics: Sequence[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = tuple(diagnostics)


class ConstraintKind(Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class ParamConstraint:
    """A min or max bound on one integer parameter of a method."""

    param: str
    kind: ConstraintKind
    bound: int

    def __post_init__(self) -> None:
        # bool is an int subclass; reject it explicitly.
        if type(self.bound) is not int:
            raise ConstraintTypeMismatch(
                f"constraint bound for '{self.param}' must be an int, got {self.bound!r}"
            )


@dataclass(frozen=True)
class EnumDef:
    name: str
    variants: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variants", tuple(self.variants))
        if not self.variants:
            raise EmptyEnum(f"enum '{self.name}' has no variants")
        if len(set(self.variants)) != len(self.variants):
            raise DuplicateName(f"enum '{self.name}' repeats a variant name")


@dataclass(frozen=True)
class FieldDescriptor:
    name: str
    type: TypeId
    usable: bool = True
    writable: bool = True

    def __post_init__(self) -> None:
        if self.type.is_void:
            raise VoidField(f"field '{self.name}' cannot have type void")


# A host behavior takes (world, argument values) and returns a runtime value.
HostImpl = Callable[..., Any]


@dataclass(frozen=True)
class MethodDescriptor:
    name: str
    params: Tuple[Tuple[str, TypeId], ...]
    return_type: TypeId
    usable: bool = True
    constraints: Tuple[ParamConstraint, ...] = ()
    host_impl: Optional[HostImpl] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        names = [n for n, _ in self.params]
        if len(set(names)) != len(names):
            raise DuplicateName(f"method '{self.name}' repeats a parameter name")
        for _, t in self.params:
            if t.is_void:
                raise VoidField(f"method '{self.name}' has a void parameter")
        by_param: Dict[str, TypeId] = dict(self.params)
        for c in self.constraints:
            if c.param not in by_param:
                raise UnknownConstraintParam(
                    f"method '{self.name}': constraint names unknown parameter '{c.param}'"
                )
            if by_param[c.param] != INT:
                raise ConstraintTypeMismatch(
                    f"method '{self.name}': constraint on non-int parameter '{c.param}'"
                )
        lo, hi = {}, {}
        for c in self.constraints:
            target = lo if c.kind is ConstraintKind.MIN else hi
            target[c.param] = c.bound
        for p in lo:
            if p in hi and lo[p] > hi[p]:
                raise InvertedBounds(
                    f"method '{self.name}': parameter '{p}' has min {lo[p]} > max {hi[p]}"
                )

    @property
    def arity(self) -> int:
        return len(self.params)

    def literal_interval(self, param: str) -> Tuple[Optional[int], Optional[int]]:
        """(min, max) bounds declared for a parameter; None means unbounded."""
        lo: Optional[int] = None
        hi: Optional[int] = None
        for c in self.constraints:
            if c.param != param:
                continue
            if c.kind is ConstraintKind.MIN:
                lo = c.bound if lo is None else max(lo, c.bound)
            else:
                hi = c.bound if hi is None else min(hi, c.bound)
        return lo, hi


@dataclass(frozen=True)
class FieldProducer:
    field: FieldDescriptor

    @property
    def produced_type(self) -> TypeId:
        return self.field.type


@dataclass(frozen=True)
class LocalProducer:
    name: str
    type: TypeId

    @property
    def produced_type(self) -> TypeId:
        return self.type


@dataclass(frozen=True)
class MethodProducer:
    method: MethodDescriptor

    @property
    def produced_type(self) -> TypeId:
        return self.method.return_type


@dataclass(frozen=True)
class LiteralOption:
    type: TypeId

    @property
    def produced_type(self) -> TypeId:
        return self.type


Producer = Union[FieldProducer, LocalProducer, MethodProducer, LiteralOption]

# Ordered (name, type) pairs describing visible locals, outermost frame first.
ScopePairs = Sequence[Tuple[str, TypeId]]


class Registry:
    """The design space: enums, fields, and methods open to generation.

    ``enums``/``fields``/``methods`` are plain insertion-ordered dicts while
    the registry is open; ``seal()`` validates everything, freezes them behind
    read-only views, and precomputes the per-type producer caches used by
    ``candidates_for``.
    """

    def __init__(self) -> None:
        self.enums: Dict[str, EnumDef] = {}
        self.fields: Dict[str, FieldDescriptor] = {}
        self.methods: Dict[str, MethodDescriptor] = {}
        self._sealed = False
        self._fields_by_type: Dict[TypeId, Tuple[FieldDescriptor, ...]] = {}
        self._methods_by_type: Dict[TypeId, Tuple[MethodDescriptor, ...]] = {}

    @property
    def sealed(self) -> bool:
        return self._sealed

    def _require_open(self) -> None:
        if self._sealed:
            raise RegistrySealed("registry is sealed; no further registration allowed")

    def register_enum(self, enum_def: EnumDef) -> None:
        self._require_open()
        if enum_def.name in self.enums:
            raise DuplicateName(f"enum '{enum_def.name}' already registered")
        self.enums[enum_def.name] = enum_def

    def register_field(self, desc: FieldDescriptor) -> None:
        self._require_open()
        if desc.name in self.fields:
            raise DuplicateName(f"field '{desc.name}' already registered")
        if not self._resolves(desc.type):
            raise UnresolvedType(
                f"field '{desc.name}': unresolved type '{desc.type.display()}'"
            )
        self.fields[desc.name] = desc

    def register_method(self, desc: MethodDescriptor) -> None:
        self._require_open()
        if desc.name in self.methods:
            raise DuplicateName(f"method '{desc.name}' already registered")
        for pname, ptype in desc.params:
            if not self._resolves(ptype):
                raise UnresolvedType(
                    f"method '{desc.name}': parameter '{pname}' has "
                    f"unresolved type '{ptype.display()}'"
                )
        if not (desc.return_type.is_void or self._resolves(desc.return_type)):
            raise UnresolvedType(
                f"method '{desc.name}': unresolved return type "
                f"'{desc.return_type.display()}'"
            )
        self.methods[desc.name] = desc

    def _resolves(self, t: TypeId) -> bool:
        if t.kind is TypeKind.ENUM:
            return t.enum_name in self.enums
        return t.kind is not TypeKind.VOID

    def validate(self) -> List[str]:
        """Re-check every registry-level invariant; returns all violations.

        Registration already rejects bad input, so this mainly guards
        registries assembled directly (tests, bulk loading).
        """
        out: List[str] = []
        for name, e in self.enums.items():
            if name != e.name:
                out.append(f"enum '{name}': key does not match descriptor name '{e.name}'")
        for name, f in self.fields.items():
            if name != f.name:
                out.append(f"field '{name}': key does not match descriptor name '{f.name}'")
            if f.type.is_void:
                out.append(f"field '{name}': void is not a value type")
            elif not self._resolves(f.type):
                out.append(f"field '{name}': unresolved type '{f.type.display()}'")
        for name, m in self.methods.items():
            if name != m.name:
                out.append(f"method '{name}': key does not match descriptor name '{m.name}'")
            for pname, ptype in m.params:
                if not self._resolves(ptype):
                    out.append(
                        f"method '{name}': parameter '{pname}' has "
                        f"unresolved type '{ptype.display()}'"
                    )
            if not (m.return_type.is_void or self._resolves(m.return_type)):
                out.append(
                    f"method '{name}': unresolved return type '{m.return_type.display()}'"
                )
        return out

    def seal(self) -> "Registry":
        if self._sealed:
            return self
        diagnostics = self.validate()
        if diagnostics:
            raise ValidationFailed(diagnostics)
        self._fields_by_type = {}
        for f in self.fields.values():
            if f.usable:
                self._fields_by_type.setdefault(f.type, []).append(f)  # type: ignore[arg-type]
        self._fields_by_type = {t: tuple(v) for t, v in self._fields_by_type.items()}
        self._methods_by_type = {}
        for m in self.methods.values():
            if m.usable:
                self._methods_by_type.setdefault(m.return_type, []).append(m)  # type: ignore[arg-type]
        self._methods_by_type = {t: tuple(v) for t, v in self._methods_by_type.items()}
        self.enums = MappingProxyType(dict(self.enums))  # type: ignore[assignment]
        self.fields = MappingProxyType(dict(self.fields))  # type: ignore[assignment]
        self.methods = MappingProxyType(dict(self.methods))  # type: ignore[assignment]
        self._sealed = True
        return self

    def enum(self, name: str) -> Optional[EnumDef]:
        return self.enums.get(name)

    def field_named(self, name: str) -> Optional[FieldDescriptor]:
        return self.fields.get(name)

    def method_named(self, name: str) -> Optional[MethodDescriptor]:
        return self.methods.get(name)

    def value_types(self) -> List[TypeId]:
        """Every non-void type a local could hold: int, bool, then enums."""
        return [INT, BOOL] + [enum_type(n) for n in self.enums]

    def candidates_for(
        self,
        wanted: TypeId,
        scope: ScopePairs = (),
        grounded_only: bool = False,
    ) -> List[Producer]:
        """All producers of ``wanted`` visible from ``scope``, in fixed order.

        Order: usable fields (registration order), locals (scope order,
        innermost frame last), usable methods (registration order, methods of
        arity >= 1 dropped when ``grounded_only``), then one LiteralOption if
        the type admits literals. Non-usable items never appear.
        """
        if not self._sealed:
            raise RegistryNotSealed("candidates_for requires a sealed registry")
        out: List[Producer] = []
        for f in self._fields_by_type.get(wanted, ()):
            out.append(FieldProducer(f))
        for name, t in scope:
            if t == wanted:
                out.append(LocalProducer(name, t))
        for m in self._methods_by_type.get(wanted, ()):
            if grounded_only and m.arity >= 1:
                continue
            out.append(MethodProducer(m))
        if admits_literals(wanted):
            if wanted.kind is not TypeKind.ENUM or wanted.enum_name in self.enums:
                out.append(LiteralOption(wanted))
        return out

    def dump_lines(self) -> List[str]:
        """One line per item, sorted by kind (ENUM, FIELD, METHOD) then name."""
        lines: List[str] = []
        for name in sorted(self.enums):
            e = self.enums[name]
            lines.append(f"ENUM {name} {{{','.join(e.variants)}}}")
        for name in sorted(self.fields):
            f = self.fields[name]
            flags = ""
            if f.usable:
                flags += " [usable]"
            if f.writable:
                flags += " [writable]"
            lines.append(f"FIELD {name} : {f.type.display()}{flags}")
        for name in sorted(self.methods):
            m = self.methods[name]
            params = ",".join(f"{p}:{t.display()}" for p, t in m.params)
            line = f"METHOD {name}({params}) : {m.return_type.display()}"
            if m.usable:
                line += " [usable]"
            if m.constraints:
                rendered = []
                for c in m.constraints:
                    op = ">=" if c.kind is ConstraintKind.MIN else "<="
                    rendered.append(f"{c.param}{op}{c.bound}")
                line += " {" + ",".join(rendered) + "}"
            lines.append(line)
        return lines
