"""A simulated blockchain: FIFO transaction pool and periodic block production.

Transactions are queued unconditionally and judged only at inclusion time,
with the block timestamp as the contract's notion of "now". Every drained
transaction appears in its block together with its apply outcome, so agents
can observe rejections (they are on-chain data) without any mempool access.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .contract import ChainState, TxError
from .protocol import Transaction


@dataclass(frozen=True)
class ChainConfig:
    chain_id: int
    block_interval: float = 13.0
    # Capacity stands in for the block gas limit; the reference chain's
    # 8 MGas divided by the costliest transaction is on the order of 100.
    max_txs_per_block: int = 100
    # Fraction of the interval for uniform timing noise; 0 keeps timestamps
    # at exactly height * block_interval.
    jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.block_interval <= 0:
            raise ValueError("block_interval must be positive")
        if self.max_txs_per_block <= 0:
            raise ValueError("max_txs_per_block must be positive")
        if not 0 <= self.jitter < 1:
            raise ValueError("jitter must be in [0, 1)")


@dataclass(frozen=True)
class AppliedTx:
    tx: Transaction
    ok: bool
    error: Optional[str] = None  # TxError code when not ok


@dataclass(frozen=True)
class Block:
    height: int
    timestamp: float
    transactions: tuple[Transaction, ...]
    results: tuple[AppliedTx, ...]


class SimChain:
    """One chain: config, contract state, mempool, and the produced blocks."""

    def __init__(
        self,
        config: ChainConfig,
        state: ChainState,
        rng: Optional[random.Random] = None,
    ):
        self.config = config
        self.state = state
        self._rng = rng or random.Random(0)
        self.mempool: deque[Transaction] = deque()
        genesis = Block(height=0, timestamp=0, transactions=(), results=())
        self.blocks: list[Block] = [genesis]
        self.next_block_time = self._draw_interval()

    @property
    def chain_id(self) -> int:
        return self.config.chain_id

    @property
    def last_block(self) -> Block:
        return self.blocks[-1]

    def _draw_interval(self) -> float:
        base = self.config.block_interval
        if self.config.jitter:
            return self.blocks[-1].timestamp + base * (
                1 + self._rng.uniform(-self.config.jitter, self.config.jitter)
            )
        return self.blocks[-1].timestamp + base

    def submit(self, tx: Transaction, now: float) -> int:
        """Queue a transaction; returns its position in the pool."""
        self.mempool.append(tx)
        return len(self.mempool)

    def produce_block(self, now: float) -> Block:
        """Drain up to the capacity cap in FIFO order and apply each
        transaction with this block's timestamp."""
        if now != self.next_block_time:
            raise ValueError(
                f"chain {self.chain_id} expected block at {self.next_block_time}, got {now}"
            )
        drained: list[Transaction] = []
        results: list[AppliedTx] = []
        while self.mempool and len(drained) < self.config.max_txs_per_block:
            tx = self.mempool.popleft()
            drained.append(tx)
            try:
                self.state.apply(tx, now)
                results.append(AppliedTx(tx=tx, ok=True))
            except TxError as err:
                results.append(AppliedTx(tx=tx, ok=False, error=err.code))
        block = Block(
            height=len(self.blocks),
            timestamp=now,
            transactions=tuple(drained),
            results=tuple(results),
        )
        self.blocks.append(block)
        self.next_block_time = self._draw_interval()
        return block


def block_log_entry(chain_id: int, block: Block) -> dict:
    """JSON-ready one-line summary of a block and its apply outcomes."""

    def tx_summary(applied: AppliedTx) -> dict:
        tx = applied.tx
        entry: dict = {"kind": tx.kind, "poster": tx.poster.hex()[:16]}
        if hasattr(tx, "poi"):
            entry["alpha"] = tx.poi.alpha.hex()[:16]
        elif hasattr(tx, "alpha"):
            entry["alpha"] = tx.alpha.hex()[:16]
        entry["ok"] = applied.ok
        if applied.error:
            entry["error"] = applied.error
        return entry

    return {
        "chain_id": chain_id,
        "height": block.height,
        "timestamp": block.timestamp,
        "txs": [tx_summary(applied) for applied in block.results],
    }
