"""The sample host application: a grid of coloured tiles with a tap hook.

Tapping a tile dispatches through the ``onTileTapped`` hook. The baseline
behavior destroys the tapped tile; gravity then compacts each column so no
empty cell sits below an occupied one (gravity-normal form). Swapping the
hook's delegate is the single integration point for replacement mechanics:
``tap`` touches the hook table and nothing else needs to change.

``build_game_registry`` publishes the design space for this game: the Colour
enum, the read-only board dimensions, tile manipulation methods with
coordinate bounds, and arithmetic/comparison builtins.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Set, Tuple

from .lang import Signature
from .registry import (
    BOOL,
    INT,
    VOID,
    ConstraintKind,
    EnumDef,
    FieldDescriptor,
    MethodDescriptor,
    ParamConstraint,
    Registry,
    enum_type,
)
from .runtime import (
    UNIT,
    BoolV,
    ExecBudget,
    HookTable,
    HostDelegate,
    HostError,
    IntV,
    Value,
    invoke,
    wrap64,
)

COLOURS = ("R", "G", "B", "Y")
ON_TILE_TAPPED = "onTileTapped"


class OutOfBounds(Exception):
    pass


Cell = Optional[str]  # a colour name, or None for empty


class Board:
    """width x height grid; cells[x][y] with y=0 the bottom row."""

    def __init__(self, width: int, height: int, cells: Optional[List[List[Cell]]] = None):
        if width < 1 or height < 1:
            raise ValueError("board dimensions must be >= 1")
        self.width = width
        self.height = height
        if cells is None:
            cells = [[None] * height for _ in range(width)]
        self.cells = cells

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "Board":
        """Build from text rows, top row first; '.' marks an empty cell."""
        height = len(rows)
        width = len(rows[0]) if rows else 0
        board = cls(width, height)
        for r, row in enumerate(rows):
            if len(row) != width:
                raise ValueError("all rows must have equal length")
            for x, ch in enumerate(row):
                if ch == ".":
                    continue
                if ch not in COLOURS:
                    raise ValueError(f"unknown tile character {ch!r}")
                board.cells[x][height - 1 - r] = ch
        return board

    def to_rows(self) -> List[str]:
        return [
            "".join(self.cells[x][self.height - 1 - r] or "." for x in range(self.width))
            for r in range(self.height)
        ]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def get(self, x: int, y: int) -> Cell:
        return self.cells[x][y]

    def set(self, x: int, y: int, colour: Cell) -> None:
        self.cells[x][y] = colour

    def count(self, colour: str) -> int:
        return sum(col.count(colour) for col in self.cells)

    def tile_count(self) -> int:
        return sum(1 for col in self.cells for c in col if c is not None)

    def is_gravity_normal(self) -> bool:
        for col in self.cells:
            seen_empty = False
            for cell in col:
                if cell is None:
                    seen_empty = True
                elif seen_empty:
                    return False
        return True

    def clone(self) -> "Board":
        return Board(self.width, self.height, [col[:] for col in self.cells])

    def key(self) -> Tuple[Tuple[Cell, ...], ...]:
        return tuple(tuple(col) for col in self.cells)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Board) and self.key() == other.key()

    def __repr__(self) -> str:
        return f"Board({'|'.join(self.to_rows())})"


def apply_gravity(board: Board) -> Board:
    """Compact each column downward, preserving vertical order; idempotent."""
    out = Board(board.width, board.height)
    for x in range(board.width):
        tiles = [c for c in board.cells[x] if c is not None]
        out.cells[x] = tiles + [None] * (board.height - len(tiles))
    return out


class GameState:
    """A board plus the tap counter; a value type, cloned per search branch."""

    def __init__(self, board: Board, taps_used: int = 0):
        self.board = board
        self.taps_used = taps_used

    def clone(self) -> "GameState":
        return GameState(self.board.clone(), self.taps_used)

    # Field access for interpreted code; both game fields are read-only.
    def read_field(self, name: str) -> Value:
        if name == "Width":
            return IntV(self.board.width)
        if name == "Height":
            return IntV(self.board.height)
        raise HostError(f"unknown game field '{name}'")

    def write_field(self, name: str, value: Value) -> None:
        raise HostError(f"game field '{name}' is read-only")


def baseline_on_tile_tapped(world: GameState, x: int, y: int) -> None:
    """Default tap logic: destroy the tapped tile (a no-op on empty cells)."""
    world.board.set(x, y, None)


def tap(state: GameState, x: int, y: int, hooks: HookTable) -> GameState:
    """One tap: dispatch the hook, restore gravity-normal form, count the tap.

    This is the only call site that knows about the hook table; binding a
    generated delegate to ``onTileTapped`` swaps the mechanic everywhere.
    Errors from the hook propagate and may leave the board partially
    modified, so searchers clone the state first.
    """
    if not state.board.in_bounds(x, y):
        raise OutOfBounds(f"tap at ({x}, {y}) outside {state.board.width}x{state.board.height}")
    invoke(hooks.delegate(ON_TILE_TAPPED), [IntV(x), IntV(y)], state, ExecBudget())
    state.board = apply_gravity(state.board)
    state.taps_used += 1
    return state


# --------------------------------------------------------------------------
# Host method implementations (arguments arrive constraint-checked)


def _host_destroy_tile(world: GameState, args: Sequence[Value]) -> Value:
    world.board.set(args[0].value, args[1].value, None)  # type: ignore[union-attr]
    return UNIT


def _host_set_tile(world: GameState, args: Sequence[Value]) -> Value:
    world.board.set(args[0].value, args[1].value, args[2].variant)  # type: ignore[union-attr]
    return UNIT


def _host_swap_tiles(world: GameState, args: Sequence[Value]) -> Value:
    x1, y1, x2, y2 = (a.value for a in args)  # type: ignore[union-attr]
    board = world.board
    board.cells[x1][y1], board.cells[x2][y2] = board.cells[x2][y2], board.cells[x1][y1]
    return UNIT


def _host_count_colour(world: GameState, args: Sequence[Value]) -> Value:
    return IntV(world.board.count(args[0].variant))  # type: ignore[union-attr]


def _host_is_occupied(world: GameState, args: Sequence[Value]) -> Value:
    return BoolV(world.board.get(args[0].value, args[1].value) is not None)  # type: ignore[union-attr]


def _host_add(world: GameState, args: Sequence[Value]) -> Value:
    return IntV(wrap64(args[0].value + args[1].value))  # type: ignore[union-attr]


def _host_sub(world: GameState, args: Sequence[Value]) -> Value:
    return IntV(wrap64(args[0].value - args[1].value))  # type: ignore[union-attr]


def _host_less(world: GameState, args: Sequence[Value]) -> Value:
    return BoolV(args[0].value < args[1].value)  # type: ignore[union-attr]


def _host_equal(world: GameState, args: Sequence[Value]) -> Value:
    return BoolV(args[0].value == args[1].value)  # type: ignore[union-attr]


def _host_do_nothing(world: GameState, args: Sequence[Value]) -> Value:
    return UNIT


def _coord_bounds(param: str, upper: int) -> List[ParamConstraint]:
    return [
        ParamConstraint(param, ConstraintKind.MIN, 0),
        ParamConstraint(param, ConstraintKind.MAX, upper),
    ]


def build_game_registry(
    width: int = 3,
    height: int = 3,
    usable: Optional[Set[str]] = None,
) -> Registry:
    """The sealed design space for a ``width`` x ``height`` game.

    Every coordinate parameter carries min 0 / max (dimension - 1) bounds.
    When ``usable`` is given, fields and methods outside that set are
    registered with ``usable=False``, narrowing the searchable scope the way
    a designer would with annotations.
    """
    colour = enum_type("Colour")

    def is_usable(name: str) -> bool:
        return usable is None or name in usable

    reg = Registry()
    reg.register_enum(EnumDef("Colour", COLOURS))
    reg.register_field(FieldDescriptor("Width", INT, usable=is_usable("Width"), writable=False))
    reg.register_field(FieldDescriptor("Height", INT, usable=is_usable("Height"), writable=False))

    xmax, ymax = width - 1, height - 1
    methods = [
        MethodDescriptor(
            "DestroyTile",
            (("x", INT), ("y", INT)),
            VOID,
            usable=is_usable("DestroyTile"),
            constraints=(*_coord_bounds("x", xmax), *_coord_bounds("y", ymax)),
            host_impl=_host_destroy_tile,
        ),
        MethodDescriptor(
            "SetTile",
            (("x", INT), ("y", INT), ("c", colour)),
            VOID,
            usable=is_usable("SetTile"),
            constraints=(*_coord_bounds("x", xmax), *_coord_bounds("y", ymax)),
            host_impl=_host_set_tile,
        ),
        MethodDescriptor(
            "SwapTiles",
            (("x1", INT), ("y1", INT), ("x2", INT), ("y2", INT)),
            VOID,
            usable=is_usable("SwapTiles"),
            constraints=(
                *_coord_bounds("x1", xmax),
                *_coord_bounds("y1", ymax),
                *_coord_bounds("x2", xmax),
                *_coord_bounds("y2", ymax),
            ),
            host_impl=_host_swap_tiles,
        ),
        MethodDescriptor(
            "CountColour",
            (("c", colour),),
            INT,
            usable=is_usable("CountColour"),
            host_impl=_host_count_colour,
        ),
        MethodDescriptor(
            "IsOccupied",
            (("x", INT), ("y", INT)),
            BOOL,
            usable=is_usable("IsOccupied"),
            constraints=(*_coord_bounds("x", xmax), *_coord_bounds("y", ymax)),
            host_impl=_host_is_occupied,
        ),
        MethodDescriptor("Add", (("a", INT), ("b", INT)), INT,
                         usable=is_usable("Add"), host_impl=_host_add),
        MethodDescriptor("Sub", (("a", INT), ("b", INT)), INT,
                         usable=is_usable("Sub"), host_impl=_host_sub),
        MethodDescriptor("Less", (("a", INT), ("b", INT)), BOOL,
                         usable=is_usable("Less"), host_impl=_host_less),
        MethodDescriptor("Equal", (("a", INT), ("b", INT)), BOOL,
                         usable=is_usable("Equal"), host_impl=_host_equal),
        MethodDescriptor("DoNothing", (), VOID,
                         usable=is_usable("DoNothing"), host_impl=_host_do_nothing),
    ]
    for m in methods:
        reg.register_method(m)
    return reg.seal()


def on_tile_tapped_signature() -> Signature:
    return Signature(ON_TILE_TAPPED, (("x", INT), ("y", INT)), VOID)


def _baseline_hook(world: GameState, args: Sequence[Value]) -> Value:
    baseline_on_tile_tapped(world, args[0].value, args[1].value)  # type: ignore[union-attr]
    return UNIT


def build_hook_table() -> HookTable:
    """Hook table with the baseline tap behavior as the default binding."""
    table = HookTable()
    table.declare(ON_TILE_TAPPED, HostDelegate(on_tile_tapped_signature(), _baseline_hook))
    return table
