from .gauge import GaugeSuite
from .identities import IdentitiesSuite
from .invariance import InvarianceSuite
from .irreducibility import IrreducibilitySuite
from .locality import LocalitySuite
from .simulate import SimulateSuite

__all__ = [
    "GaugeSuite",
    "IdentitiesSuite",
    "InvarianceSuite",
    "IrreducibilitySuite",
    "LocalitySuite",
    "SimulateSuite",
]
