"""Small report records shared by the verification drivers and the CLI."""
from dataclasses import dataclass, field
from fractions import Fraction

from .exactalg import RatFun


@dataclass
class Check:
    name: str
    passed: bool
    witness: object = None

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def to_json(self):
        return {"name": self.name, "status": self.status, "witness": to_jsonable(self.witness)}


@dataclass
class Report:
    checks: list = field(default_factory=list)
    result: dict = field(default_factory=dict)

    def add(self, name, passed, witness=None):
        self.checks.append(Check(name, bool(passed), witness))
        return passed

    def extend(self, other):
        self.checks.extend(other.checks)
        self.result.update(other.result)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def to_jsonable(x):
    """Lossless JSON form: rationals as ``"p/q"``, rational functions in canonical text."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return str(x) if abs(x) >= 2 ** 53 else x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, RatFun):
        return x.to_text()
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "to_text"):
        return x.to_text()
    return repr(x)
