"""
Serializable descriptions of the L-GP prior mean.
"""

from typing import Annotated, Literal, Protocol, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from services.dynamics import FemRodParams, ReducedChainModel, TwoLinkParams, ZeroModel
from services.dynamics.models import ElComponents
from services.dynamics.plants import TwoLinkArm


class PriorModel(Protocol):
    """What the L-GP needs from its prior mean."""

    @property
    def dof(self) -> int: ...

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents: ...

    def gravity(self, q: np.ndarray) -> np.ndarray: ...

    def dissipation(self, dq: np.ndarray) -> np.ndarray: ...

    def potential(self, q: np.ndarray) -> float: ...


class _PriorSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TwoLinkPrior(_PriorSpec):
    kind: Literal["two_link"] = "two_link"
    params: TwoLinkParams

    def build(self) -> PriorModel:
        return TwoLinkArm(self.params)


class ReducedChainPrior(_PriorSpec):
    kind: Literal["reduced_chain"] = "reduced_chain"
    rod: FemRodParams
    n_segments: int = Field(ge=1)
    links_per_segment: int = Field(default=4, ge=1)
    chi: list[float]

    def build(self) -> PriorModel:
        return ReducedChainModel(
            self.rod, self.n_segments, self.links_per_segment, self.chi
        )


class ZeroPrior(_PriorSpec):
    kind: Literal["zero"] = "zero"
    dof: int = Field(ge=1)

    def build(self) -> PriorModel:
        return ZeroModel(self.dof)


PriorSpec = Annotated[
    Union[TwoLinkPrior, ReducedChainPrior, ZeroPrior], Field(discriminator="kind")
]


class PriorDocument(BaseModel):
    """Wrapper used to validate a prior spec coming from a model file."""

    prior: PriorSpec
