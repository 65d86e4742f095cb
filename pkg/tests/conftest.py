from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile(
    "capmono",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("capmono")
