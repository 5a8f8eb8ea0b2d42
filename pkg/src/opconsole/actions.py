"""Declarative robot actions and the hierarchical structure tree.

An action is a middleware message, an embedded script, a composite running
children in sequence or parallel, or a toggle cycling through children.
The registry is the single authority on which actions exist; the tree only
holds references, so the same action can appear at multiple locations and
structure edits never create or destroy actions.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Union

from .errors import CycleError, DuplicateError, NotFoundError, ValidationError
from .scripting import check_script
from .wire import valid_channel


class CompositeMode(Enum):
    SEQUENCE = "sequence"
    PARALLEL = "parallel"


class CallStyle(Enum):
    PUBLISH = "publish"
    SERVICE = "service"


@dataclass
class ActionSpec:
    display_name: str
    id: str = ""
    # Unrecognized config keys, preserved verbatim across save/load cycles.
    extras: dict = field(default_factory=dict)


@dataclass
class MessageAction(ActionSpec):
    """Sends one middleware message; payload is static or script-generated."""

    channel: str = ""
    call_style: CallStyle = CallStyle.PUBLISH
    payload: object = None
    payload_script: str | None = None
    timeout_s: float = 5.0


@dataclass
class ScriptAction(ActionSpec):
    script: str = ""


@dataclass
class CompositeAction(ActionSpec):
    children: list[str] = field(default_factory=list)
    mode: CompositeMode = CompositeMode.SEQUENCE


@dataclass
class ToggleAction(ActionSpec):
    """Cycles through children; feedback can correct the current index."""

    children: list[str] = field(default_factory=list)
    feedback_channel: str | None = None
    state_extractor: str | None = None


@dataclass
class ToggleState:
    action_id: str
    current_index: int = 0


def _validate_spec(spec: ActionSpec, known_ids: Iterable[str]) -> None:
    if not spec.display_name:
        raise ValidationError("action needs a display name")
    known = set(known_ids)
    if isinstance(spec, MessageAction):
        if not valid_channel(spec.channel):
            raise ValidationError(f"action {spec.display_name!r}: invalid channel")
        if spec.payload_script is not None:
            check_script(spec.payload_script)
    elif isinstance(spec, ScriptAction):
        check_script(spec.script)
    elif isinstance(spec, (CompositeAction, ToggleAction)):
        if not spec.children:
            raise ValidationError(f"action {spec.display_name!r}: children must be non-empty")
        for child in spec.children:
            if child not in known:
                raise ValidationError(
                    f"action {spec.display_name!r}: unknown child {child!r}"
                )
        if isinstance(spec, ToggleAction):
            if (spec.feedback_channel is None) != (spec.state_extractor is None):
                raise ValidationError(
                    f"toggle {spec.display_name!r}: feedback channel and extractor go together"
                )
            if spec.feedback_channel is not None and not valid_channel(spec.feedback_channel):
                raise ValidationError(f"toggle {spec.display_name!r}: invalid feedback channel")
            if spec.state_extractor is not None:
                check_script(spec.state_extractor)
    else:
        raise ValidationError(f"unknown action kind {type(spec).__name__}")


class ActionRegistry:
    """All available actions, listed alphabetically by display name."""

    def __init__(self):
        self._actions: dict[str, ActionSpec] = {}
        self._names: dict[str, str] = {}
        self._counter = 0

    def register(self, spec: ActionSpec) -> str:
        if spec.display_name in self._names:
            raise DuplicateError(f"action named {spec.display_name!r} already exists")
        _validate_spec(spec, self._actions.keys())
        if not spec.id:
            self._counter += 1
            spec.id = f"act{self._counter}"
        elif spec.id in self._actions:
            raise DuplicateError(f"action id {spec.id!r} already exists")
        self._check_acyclic(spec)
        self._actions[spec.id] = spec
        self._names[spec.display_name] = spec.id
        return spec.id

    def _check_acyclic(self, spec: ActionSpec) -> None:
        # Children must already be registered, so a cycle can only appear
        # through a pre-assigned id referring to itself or a future node.
        children = getattr(spec, "children", None)
        if not children:
            return
        seen = {spec.id} if spec.id else set()
        stack = list(children)
        while stack:
            node = stack.pop()
            if node in seen:
                raise ValidationError(f"action {spec.display_name!r}: reference cycle")
            seen.add(node)
            stack.extend(getattr(self._actions.get(node), "children", ()) or ())

    def get(self, action_id: str) -> ActionSpec:
        try:
            return self._actions[action_id]
        except KeyError:
            raise NotFoundError(f"unknown action {action_id!r}") from None

    def __contains__(self, action_id: str) -> bool:
        return action_id in self._actions

    def all_sorted(self) -> list[ActionSpec]:
        return sorted(self._actions.values(), key=lambda s: s.display_name.casefold())

    def ids(self) -> set[str]:
        return set(self._actions)

    @classmethod
    def from_specs(cls, specs: Sequence[ActionSpec]) -> "ActionRegistry":
        """Build a registry from a config list, tolerating forward child refs."""
        registry = cls()
        ids = {s.id for s in specs if s.id}
        for spec in specs:
            _validate_spec(spec, ids | registry.ids())
            if spec.display_name in registry._names:
                raise DuplicateError(f"action named {spec.display_name!r} already exists")
            if not spec.id:
                registry._counter += 1
                spec.id = f"act{registry._counter}"
            registry._actions[spec.id] = spec
            registry._names[spec.display_name] = spec.id
        for spec in specs:
            registry._verify_no_cycles_from(spec.id)
        return registry

    def _verify_no_cycles_from(self, root: str) -> None:
        path: list[str] = []

        def visit(node: str) -> None:
            if node in path:
                raise ValidationError(f"action {root!r}: reference cycle via {node!r}")
            path.append(node)
            for child in getattr(self._actions.get(node), "children", ()) or ():
                visit(child)
            path.pop()

        visit(root)


# --- structure tree ---------------------------------------------------------


@dataclass
class ActionRef:
    action_id: str


@dataclass
class FolderNode:
    name: str
    items: list[Union["FolderNode", ActionRef]] = field(default_factory=list)


TreeNode = Union[FolderNode, ActionRef]


@dataclass
class ActionTree:
    root: FolderNode = field(default_factory=lambda: FolderNode(name="root"))


def _resolve_folder(tree: ActionTree, path: Sequence[int]) -> FolderNode:
    node: TreeNode = tree.root
    for index in path:
        if not isinstance(node, FolderNode) or not 0 <= index < len(node.items):
            raise NotFoundError(f"no folder at path {list(path)!r}")
        node = node.items[index]
    if not isinstance(node, FolderNode):
        raise ValidationError(f"path {list(path)!r} is an action, not a folder")
    return node


def _resolve_parent(tree: ActionTree, path: Sequence[int]) -> tuple[FolderNode, int]:
    if not path:
        raise ValidationError("the root folder itself cannot be moved or removed")
    parent = _resolve_folder(tree, path[:-1])
    index = path[-1]
    if not 0 <= index < len(parent.items):
        raise NotFoundError(f"no node at path {list(path)!r}")
    return parent, index


def _check_sibling_name(folder: FolderNode, name: str) -> None:
    for item in folder.items:
        if isinstance(item, FolderNode) and item.name == name:
            raise DuplicateError(f"folder {name!r} already exists here")


def move_node(
    tree: ActionTree,
    node_path: Sequence[int],
    dest_folder_path: Sequence[int],
    position: int,
) -> ActionTree:
    """Move a node to a folder at the given position (clamped).

    Pure: returns a new tree. Moving a folder into itself or its own
    descendant raises CycleError. The registry is untouched; moves never
    create or destroy action references.
    """
    tree = copy.deepcopy(tree)
    node_path = tuple(node_path)
    dest_folder_path = tuple(dest_folder_path)
    parent, index = _resolve_parent(tree, node_path)
    node = parent.items[index]
    if isinstance(node, FolderNode) and dest_folder_path[: len(node_path)] == node_path:
        raise CycleError(f"cannot move folder {node.name!r} into itself")
    dest = _resolve_folder(tree, dest_folder_path)
    if isinstance(node, FolderNode) and dest is not parent:
        _check_sibling_name(dest, node.name)
    parent.items.pop(index)
    position = min(max(position, 0), len(dest.items))
    dest.items.insert(position, node)
    return tree


def insert_reference(
    tree: ActionTree, folder_path: Sequence[int], position: int, action_id: str
) -> ActionTree:
    """Insert a reference to a registered action (drag from the all-actions list)."""
    tree = copy.deepcopy(tree)
    folder = _resolve_folder(tree, folder_path)
    position = min(max(position, 0), len(folder.items))
    folder.items.insert(position, ActionRef(action_id=action_id))
    return tree


def add_folder(
    tree: ActionTree, folder_path: Sequence[int], position: int, name: str
) -> ActionTree:
    if not name:
        raise ValidationError("folder needs a name")
    tree = copy.deepcopy(tree)
    folder = _resolve_folder(tree, folder_path)
    _check_sibling_name(folder, name)
    position = min(max(position, 0), len(folder.items))
    folder.items.insert(position, FolderNode(name=name))
    return tree


def remove_node(tree: ActionTree, node_path: Sequence[int]) -> ActionTree:
    tree = copy.deepcopy(tree)
    parent, index = _resolve_parent(tree, node_path)
    parent.items.pop(index)
    return tree


def action_multiset(tree: ActionTree) -> dict[str, int]:
    """Multiset of referenced action ids (structure edits preserve it)."""
    counts: dict[str, int] = {}

    def visit(node: TreeNode) -> None:
        if isinstance(node, ActionRef):
            counts[node.action_id] = counts.get(node.action_id, 0) + 1
        else:
            for item in node.items:
                visit(item)

    visit(tree.root)
    return counts


def validate_tree(tree: ActionTree, registry: ActionRegistry) -> list[str]:
    """Dangling reference descriptions (empty when the tree is consistent)."""
    problems: list[str] = []

    def visit(node: TreeNode, where: str) -> None:
        if isinstance(node, ActionRef):
            if node.action_id not in registry:
                problems.append(f"{where}: unknown action {node.action_id!r}")
            return
        names = set()
        for i, item in enumerate(node.items):
            if isinstance(item, FolderNode):
                if item.name in names:
                    problems.append(f"{where}: duplicate folder {item.name!r}")
                names.add(item.name)
            visit(item, f"{where}/{item.name if isinstance(item, FolderNode) else i}")

    visit(tree.root, tree.root.name)
    return problems
