"""
The controlled single-server system shared by the learning engine and the
predict-then-optimize baseline.
"""

from dataclasses import dataclass, field

from src.analytic.gim1 import GIM1Objective
from src.analytic.objective import Objective, PKObjective
from src.demand.models import DemandModel, FeasibleBox, StaffingCost
from src.queue_sim.arrivals import ArrivalKind, ArrivalProcess, ArrivalSpec
from src.stochastic.distributions import DistFamily, UnitDist
from src.utils.errors import ConfigError


@dataclass(frozen=True)
class QueueSystem:
    """
    Demand, costs, service and arrival laws, and the decision box.

    Attributes:
        demand: True demand curve λ(p)
        cost: Staffing cost c(μ)
        h0: Holding cost per unit workload per unit time
        box: Feasible decisions
        service: Unit-mean law of individual workloads
        arrivals: Poisson or renewal arrivals
        holding_basis: Holding measure for renewal arrivals
            (``arrival`` or ``time_average``)
    """
    demand: DemandModel
    cost: StaffingCost
    h0: float
    box: FeasibleBox
    service: UnitDist = field(default_factory=UnitDist.exponential)
    arrivals: ArrivalSpec = field(default_factory=ArrivalSpec.poisson)
    holding_basis: str = "arrival"

    @property
    def scv(self) -> float:
        return self.service.scv()

    def arrival_process(self, p: float) -> ArrivalProcess:
        """Arrivals at the rate the true demand induces at price ``p``."""
        return self.arrivals.at_rate(float(self.demand.rate(p)))

    def objective(self) -> Objective:
        """
        Ground-truth objective: PK for Poisson arrivals, the GI/M/1 root
        equation for renewal arrivals with exponential service.

        Raises:
            ConfigError: Renewal arrivals with non-exponential service have
                no analytic benchmark
        """
        if self.arrivals.kind == ArrivalKind.POISSON:
            return PKObjective(self.demand, self.cost, self.h0, self.scv)
        if self.service.family != DistFamily.EXPONENTIAL:
            raise ConfigError(
                "service.family",
                "renewal arrivals are benchmarked with the GI/M/1 root equation, "
                "which needs exponential service",
            )
        return GIM1Objective(self.demand, self.cost, self.h0, self.arrivals.interarrival, self.holding_basis)
