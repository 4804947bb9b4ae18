"""Live campaign persistence, HTTP service, and command-line interface."""

from .state import (
    CampaignConfig,
    CampaignError,
    CampaignRound,
    CampaignState,
    CampaignStore,
    campaign_metrics,
    propose_batch,
    record_measurements,
)

__all__ = [
    "CampaignConfig",
    "CampaignError",
    "CampaignRound",
    "CampaignState",
    "CampaignStore",
    "campaign_metrics",
    "propose_batch",
    "record_measurements",
]
