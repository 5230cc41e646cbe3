"""Analytical transaction-cost and witness-incentive calculator.

Gas figures are constants measured on the reference contract deployment (mean
and standard deviation per transaction type, in kGas); they are carried, not
re-measured. USD conversion assumes a flat gas price in Gwei and an Ether/USD
rate. The incentive threshold answers: how expensive must one token unit be
for rational observers to keep posting contest transactions?
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GasCost:
    mean_kgas: float
    std_kgas: float

    def __post_init__(self) -> None:
        if self.mean_kgas <= 0:
            raise ValueError("mean cost must be positive")


@dataclass(frozen=True)
class GasTable:
    """Measured per-transaction cost, in thousands of gas units."""

    claim: GasCost = GasCost(57.7, 11.1)
    contest: GasCost = GasCost(81.5, 64.2)
    finalize: GasCost = GasCost(45.5, 0.1)
    veto: GasCost = GasCost(131.3, 91.9)
    finalize_veto: GasCost = GasCost(48.6, 1.7)

    def mean(self, kind: str) -> float:
        return getattr(self, kind).mean_kgas


@dataclass(frozen=True)
class PriceModel:
    gas_price_gwei: float = 10.0
    ether_usd: float = 115.71

    def __post_init__(self) -> None:
        if self.gas_price_gwei < 0 or self.ether_usd < 0:
            raise ValueError("prices must be non-negative")

    def usd(self, kgas: float) -> float:
        # 1 kGas = 1000 gas; 1 Ether = 1e9 Gwei.
        return kgas * 1000 * self.gas_price_gwei * 1e-9 * self.ether_usd


@dataclass(frozen=True)
class TransferCost:
    """Expected per-transfer cost breakdown by role for m chains, n observers."""

    chains: int
    observers: int
    receiver_kgas: float
    observer_kgas: float  # per posting observer
    sender_kgas: float
    receiver_usd: float
    observer_usd: float
    sender_usd: float
    expected_posting_observers: float


def transfer_cost(
    m: int,
    n: int,
    gas: GasTable = GasTable(),
    price: PriceModel = PriceModel(),
) -> TransferCost:
    """Expected cost of one conflict-free transfer.

    The receiver pays one claim plus one finalize per chain; each of the
    roughly log2(n) posting observers pays one contest per chain; the sender
    pays nothing.
    """
    if m < 1:
        raise ValueError("need at least one chain")
    if n < 1:
        raise ValueError("need at least one observer")
    receiver_kgas = gas.claim.mean_kgas + m * gas.finalize.mean_kgas
    observer_kgas = m * gas.contest.mean_kgas
    return TransferCost(
        chains=m,
        observers=n,
        receiver_kgas=receiver_kgas,
        observer_kgas=observer_kgas,
        sender_kgas=0.0,
        receiver_usd=price.usd(receiver_kgas),
        observer_usd=price.usd(observer_kgas),
        sender_usd=0.0,
        expected_posting_observers=math.log2(n),
    )


def min_viable_price(
    n: int,
    m: int = 10,
    reward: int = 1,
    gas: GasTable = GasTable(),
    price: PriceModel = PriceModel(),
    round_observer_cost: bool = True,
) -> float:
    """Token price (USD) above which posting contests has positive expected value.

    A posting observer invests the cost of m contests and wins the reward with
    likelihood log2(n)/n, so the break-even token price is
    cost * n / (log2(n) * reward). With round_observer_cost the investment is
    first rounded to whole cents, matching the published thresholds.
    """
    if n < 2:
        raise ValueError("incentive threshold needs n >= 2 observers")
    if reward <= 0:
        raise ValueError("reward must be positive")
    observer_usd = transfer_cost(m, n, gas, price).observer_usd
    if round_observer_cost:
        observer_usd = round(observer_usd, 2)
    return observer_usd * n / (math.log2(n) * reward)


def simulated_cost_report(
    run,
    gas: GasTable = GasTable(),
    price: PriceModel = PriceModel(),
) -> dict:
    """Empirical cost breakdown for a completed run, using the transactions the
    chains actually included (gas is spent whether or not a transaction was
    accepted at apply time).

    ``run`` is a RunReport or anything exposing ``tx_counts`` (included
    transactions by kind) and ``stats``.
    """
    counts: dict = run.tx_counts if hasattr(run, "tx_counts") else run["tx_counts"]
    stats: dict = run.stats if hasattr(run, "stats") else run.get("stats", {})
    kinds = ("claim", "contest", "finalize", "veto", "finalize_veto")
    kgas = {kind: counts.get(kind, 0) * gas.mean(kind) for kind in kinds}
    role_kgas = {
        "receiver": kgas["claim"] + kgas["finalize"],
        "observer": kgas["contest"],
        "watchdog": kgas["veto"] + kgas["finalize_veto"],
        "sender": 0.0,
    }
    report = {
        "tx_counts": {kind: counts.get(kind, 0) for kind in kinds},
        "kgas_by_kind": kgas,
        "kgas_by_role": role_kgas,
        "usd_by_role": {role: price.usd(v) for role, v in role_kgas.items()},
        "transfers_executed": stats.get("transfers_executed", 0),
    }
    executed = report["transfers_executed"]
    if executed:
        report["per_transfer_usd"] = {
            role: price.usd(v) / executed for role, v in role_kgas.items()
        }
    return report
