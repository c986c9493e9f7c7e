"""Quote and contract service over a live cluster ledger.

``QuoteService`` is the in-process back end; ``create_app`` wraps it in a
JSON/REST front end:

    POST /v1/quote            {tenant_id, job_type}
    POST /v1/contract         {quote_id, tier}
    GET  /v1/contracts/{id}
    GET  /v1/cluster

Quotes never touch the ledger. Accepting a quote re-checks feasibility and
admits under one lock, so admissions are linearizable.
"""

from __future__ import annotations

import itertools
import threading
import time
import uuid
from dataclasses import dataclass
from typing import Callable, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .catalog import JobCatalog
from .choice import PriceMenu
from .ledger import ClusterLedger
from .pricing import PricingConfig
from .simulator import Contract, RevOpStrategy
from .wtp import CustomerMix

DEFAULT_EXPIRY = 60.0


class QuoteError(Exception):
    """A contract request that cannot be honoured."""


class UnknownQuote(QuoteError):
    pass


class UnknownJobType(QuoteError):
    pass


@dataclass(frozen=True)
class QuoteSession:
    quote_id: str
    tenant_id: int
    job_type: str
    menu: PriceMenu
    issued_at: float
    expiry: float

    def to_dict(self) -> dict:
        return {"quote_id": self.quote_id, "tiers": self.menu.to_list(),
                "expires_at": self.expiry}


class QuoteService:
    def __init__(self, catalog: JobCatalog, mix: CustomerMix, capacity: int,
                 pricing: Optional[PricingConfig] = None,
                 clock: Callable[[], float] = time.time,
                 expiry: float = DEFAULT_EXPIRY, strategy=None):
        self.catalog = catalog
        self.mix = mix
        self.ledger = ClusterLedger(capacity)
        self.strategy = strategy or RevOpStrategy(mix, pricing or PricingConfig())
        self.clock = clock
        self.expiry = expiry
        self._lock = threading.Lock()
        self._quotes: dict[str, QuoteSession] = {}
        self._accepted: set[str] = set()
        self._contracts: dict[int, Contract] = {}
        self._ids = itertools.count(1)
        self.admissions: list[tuple[float, float, int]] = []  # (start, release, nodes)

    def quote(self, tenant_id: int, job_type: str) -> Optional[QuoteSession]:
        """Issue a menu over the tiers that fit right now, or None when nothing fits."""
        try:
            job = self.catalog.get(job_type)
        except KeyError as exc:
            raise UnknownJobType(str(exc)) from None
        now = self.clock()
        with self._lock:
            free = self.ledger.available(now)
        feasible = [t for t in job.tier_options() if t.node_count <= free]
        if not feasible:
            return None
        menu = self.strategy.menu(job, feasible)
        session = QuoteSession(uuid.uuid4().hex, int(tenant_id), job.name, menu, now,
                               now + self.expiry)
        with self._lock:
            self._quotes[session.quote_id] = session
        return session

    def contract(self, quote_id: str, tier: str) -> Contract:
        with self._lock:
            session = self._quotes.get(quote_id)
            if session is None:
                raise UnknownQuote(quote_id)
            if quote_id in self._accepted:
                raise QuoteError(f"quote {quote_id} was already accepted")
            now = self.clock()
            if now >= session.expiry:
                raise QuoteError(f"quote {quote_id} expired")
            chosen = session.menu.tier(tier)
            if chosen is None:
                raise QuoteError(f"tier {tier!r} is not on quote {quote_id}")
            self.ledger.release_due(now)
            duration = chosen.completion_time * 60.0
            contract_id = next(self._ids)
            if not self.ledger.try_admit(chosen.node_count, now, duration, contract_id):
                raise QuoteError(f"tier {tier!r} no longer fits in the cluster")
            self._accepted.add(quote_id)
            contract = Contract(contract_id=contract_id, tenant_id=session.tenant_id,
                                tier=chosen.tier_id, price=chosen.price,
                                nodes=chosen.node_count, start=now,
                                promised_completion=now + duration,
                                actual_completion=now + duration, job_type=session.job_type)
            self._contracts[contract_id] = contract
            self.admissions.append((now, now + duration, chosen.node_count))
            return contract

    def get_contract(self, contract_id: int) -> Optional[Contract]:
        with self._lock:
            return self._contracts.get(contract_id)

    def cluster(self) -> dict:
        now = self.clock()
        with self._lock:
            return {"capacity": self.ledger.capacity, "available": self.ledger.available(now)}


class QuoteRequest(BaseModel):
    tenant_id: int
    job_type: str


class ContractRequest(BaseModel):
    quote_id: str
    tier: str


def contract_status(contract: Contract, now: float) -> dict:
    return {
        "contract_id": contract.contract_id,
        "tenant_id": contract.tenant_id,
        "job_type": contract.job_type,
        "tier": contract.tier,
        "price": contract.price,
        "nodes": contract.nodes,
        "start": contract.start,
        "promised_completion": contract.promised_completion,
        "status": "completed" if now >= contract.actual_completion else "running",
    }


def create_app(service: QuoteService) -> FastAPI:
    app = FastAPI(title="qossim quote service")

    @app.post("/v1/quote")
    def post_quote(req: QuoteRequest):
        try:
            session = service.quote(req.tenant_id, req.job_type)
        except UnknownJobType as exc:
            raise HTTPException(404, detail=f"unknown job type: {exc}")
        if session is None:
            raise HTTPException(409, detail="no-quote: no tier fits in free capacity")
        return session.to_dict()

    @app.post("/v1/contract")
    def post_contract(req: ContractRequest):
        try:
            contract = service.contract(req.quote_id, req.tier)
        except UnknownQuote:
            raise HTTPException(404, detail=f"unknown quote {req.quote_id}")
        except QuoteError as exc:
            raise HTTPException(409, detail=str(exc))
        return {"contract_id": contract.contract_id, "start": contract.start,
                "promised_completion": contract.promised_completion}

    @app.get("/v1/contracts/{contract_id}")
    def get_contract(contract_id: int):
        contract = service.get_contract(contract_id)
        if contract is None:
            raise HTTPException(404, detail=f"unknown contract {contract_id}")
        return contract_status(contract, service.clock())

    @app.get("/v1/cluster")
    def get_cluster():
        return service.cluster()

    return app
