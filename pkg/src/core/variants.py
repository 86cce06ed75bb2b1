"""Registry of interchangeable datapath implementations.

Datapath units exist in several functionally equivalent forms (mux vs.
one-hot ALU, mux vs. one-hot align/extend) and the pipeline's operand
bypass is pluggable too. Each form is registered under a dotted name
(`<unit>.<form>`) and looked up by the pipeline from its SimConfig, so
tests can register their own forms (for example a deliberately broken
bypass) without touching the engine.

Usage:
    from src.core.variants import get_variant, register_variant

    alu = get_variant("alu.onehot")
    alu.impl(5, 7, alu.encode(AluOp.ADD))  # 12

    register_variant("forward.broken", my_forward, description="drops Ma bypass")
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from blinker import Signal

logger = logging.getLogger(__name__)

UNITS = ("alu", "extend", "forward")


class UnknownVariantError(KeyError):
    """Raised when a variant name is not registered."""

    def __init__(self, name: str, known: list[str]) -> None:
        super().__init__(name)
        self.name = name
        self.known = known

    def __str__(self) -> str:
        return f"Unknown variant '{self.name}' (known: {', '.join(sorted(self.known))})"


def _identity(value: Any) -> Any:
    return value


@dataclass(frozen=True)
class Variant:
    """One registered implementation.

    Attributes:
        name: Dotted name, e.g. "alu.onehot"
        impl: The implementation callable
        encode: Maps a binary select (AluOp / LoadExtendSelect) to the
            control value impl expects
        description: Human-readable summary
        metadata: Free-form extra information
    """

    name: str
    impl: Callable[..., Any]
    encode: Callable[[Any], Any] = _identity
    description: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def unit(self) -> str:
        return self.name.split(".", 1)[0]

    @property
    def form(self) -> str:
        return self.name.split(".", 1)[-1]


class VariantRegistry:
    """Thread-safe name -> Variant registry.

    Example:
        registry = VariantRegistry()
        registry.register("alu.mux", alu_mux, description="binary select")
        registry.get("alu.mux").impl(1, 2, AluOp.ADD)  # 3
    """

    def __init__(self) -> None:
        self._variants: dict[str, Variant] = {}
        self._lock = threading.RLock()

        self.variant_registered = Signal("variant.registered")

    def register(
        self,
        name: str,
        impl: Callable[..., Any],
        *,
        encode: Optional[Callable[[Any], Any]] = None,
        description: str = "",
        metadata: Optional[dict[str, Any]] = None,
        overwrite: bool = False,
    ) -> Variant:
        """Register an implementation under a dotted name.

        Raises:
            ValueError: Name malformed, unit unknown, or already registered
                without overwrite
        """
        unit, _, form = name.partition(".")
        if not form or unit not in UNITS:
            raise ValueError(f"Variant name '{name}' must be '<unit>.<form>' with unit in {UNITS}")

        with self._lock:
            if name in self._variants and not overwrite:
                raise ValueError(
                    f"Variant '{name}' already registered. Use overwrite=True to replace."
                )

            variant = Variant(
                name=name,
                impl=impl,
                encode=encode or _identity,
                description=description,
                metadata=dict(metadata or {}),
            )
            self._variants[name] = variant

        logger.debug(f"Registered variant {name}")
        self.variant_registered.send(self, name=name, variant=variant)
        return variant

    def unregister(self, name: str) -> bool:
        with self._lock:
            return self._variants.pop(name, None) is not None

    def get(self, name: str) -> Variant:
        """Look up a variant.

        Raises:
            UnknownVariantError: If name is not registered
        """
        with self._lock:
            try:
                return self._variants[name]
            except KeyError:
                raise UnknownVariantError(name, list(self._variants)) from None

    def has(self, name: str) -> bool:
        with self._lock:
            return name in self._variants

    def list_variants(self, unit: Optional[str] = None) -> list[str]:
        """Registered names, optionally restricted to one unit, sorted."""
        with self._lock:
            names = self._variants.keys()
            return sorted(n for n in names if unit is None or n.startswith(f"{unit}."))

    def forms(self, unit: str) -> list[str]:
        """Form names registered for a unit (e.g. ["mux", "onehot"])."""
        return [n.split(".", 1)[1] for n in self.list_variants(unit)]

    def clear(self) -> None:
        with self._lock:
            self._variants.clear()

    def __contains__(self, name: str) -> bool:
        return self.has(name)

    def __len__(self) -> int:
        with self._lock:
            return len(self._variants)


def install_builtin_variants(registry: VariantRegistry) -> None:
    """Register the built-in datapath and bypass implementations."""
    from src.core import datapath
    from src.core.pipeline import forward_operands

    registry.register(
        "alu.mux",
        datapath.alu_mux,
        description="single wide multiplexer over a binary select code",
        overwrite=True,
    )
    registry.register(
        "alu.onehot",
        datapath.alu_onehot,
        encode=datapath.onehot_alu,
        description="gated candidates merged by XOR under a one-hot select",
        overwrite=True,
    )
    registry.register(
        "extend.mux",
        datapath.load_extend_mux,
        description="shift-align then sign/zero-extend",
        overwrite=True,
    )
    registry.register(
        "extend.onehot",
        datapath.load_extend_onehot,
        encode=datapath.onehot_extend,
        description="per-lane candidates merged by XOR under a one-hot select",
        overwrite=True,
    )
    registry.register(
        "forward.standard",
        forward_operands,
        description="Ma result beats Wb result beats register file",
        overwrite=True,
    )


_global_registry: Optional[VariantRegistry] = None
_registry_lock = threading.Lock()


def get_registry() -> VariantRegistry:
    """Get the global registry, creating it with the built-ins on first use."""
    global _global_registry
    if _global_registry is None:
        with _registry_lock:
            if _global_registry is None:
                registry = VariantRegistry()
                install_builtin_variants(registry)
                _global_registry = registry
    return _global_registry


def reset_registry() -> None:
    """Drop the global registry; the next access rebuilds the built-ins."""
    global _global_registry
    with _registry_lock:
        _global_registry = None


def register_variant(
    name: str,
    impl: Callable[..., Any],
    *,
    encode: Optional[Callable[[Any], Any]] = None,
    description: str = "",
    metadata: Optional[dict[str, Any]] = None,
    overwrite: bool = False,
) -> Variant:
    """Register an implementation in the global registry."""
    return get_registry().register(
        name, impl, encode=encode, description=description, metadata=metadata, overwrite=overwrite
    )


def get_variant(name: str) -> Variant:
    """Look up a variant in the global registry."""
    return get_registry().get(name)


def has_variant(name: str) -> bool:
    return get_registry().has(name)


def unregister_variant(name: str) -> bool:
    return get_registry().unregister(name)


def list_variants(unit: Optional[str] = None) -> list[str]:
    return get_registry().list_variants(unit)


__all__ = [
    "UNITS",
    "UnknownVariantError",
    "Variant",
    "VariantRegistry",
    "install_builtin_variants",
    "get_registry",
    "reset_registry",
    "register_variant",
    "get_variant",
    "has_variant",
    "unregister_variant",
    "list_variants",
]
