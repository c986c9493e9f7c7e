"""QoS (completion-time) pricing versus fixed per-node-minute pricing for batch jobs."""

from .catalog import JobCatalog, JobType, TierShape, predict, sample_job_type
from .choice import (Choice, MenuTier, MonteCarlo, PriceMenu, Quadrature, TierOption, choose,
                     purchase_probabilities)
from .ledger import ClusterLedger
from .pricing import (FixedPrice, PricingConfig, bench_menu, calibrate_fixed_price,
                      expected_revenue, optimize_menu)
from .wtp import (CustomerMix, CustomerType, WtpRealization, sample_customer_type,
                  sample_realization, wtp_value)

__version__ = "0.1.0"
