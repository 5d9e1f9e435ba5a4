from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Series:
    """Coefficients ``coeffs[i]`` of ``x**(start + i)``.

    ``modulus`` is ``None`` for exact integers (and for real-valued kinds),
    otherwise the prime the residues live under.
    """

    coeffs: list = field(default_factory=list)
    start: int = 0
    modulus: int | None = None
    kind: str = "t"
    digits: int | None = None

    def __len__(self):
        return len(self.coeffs)

    @property
    def stop(self) -> int:
        return self.start + len(self.coeffs)

    def __getitem__(self, n: int):
        if not self.start <= n < self.stop:
            raise IndexError(f"x^{n} outside [{self.start}, {self.stop})")
        return self.coeffs[n - self.start]

    def get(self, n: int, default=0):
        if self.start <= n < self.stop:
            return self.coeffs[n - self.start]
        return default

    def dense(self, stop: int | None = None) -> list:
        """Coefficients of x^0 .. x^(stop-1), zero-filled below ``start``."""
        stop = self.stop if stop is None else stop
        return [self.get(n) for n in range(stop)]

    def reduce(self, p: int) -> "Series":
        if self.modulus is not None and self.modulus != p:
            raise ValueError("cannot re-reduce residues to a different prime")
        return Series([int(c) % p for c in self.coeffs], self.start, p, self.kind)
